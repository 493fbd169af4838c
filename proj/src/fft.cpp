#include "pwtrack/fft.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <new>
#include <stdexcept>

#include <fftw3.h>

namespace pwtrack::fft {

namespace {

// The FFTW planner is not reentrant; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

template <typename T>
T* alloc(std::size_t n) {
    void* p = fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

void destroy(void* plan) {
    if (!plan) return;
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan));
}

}  // namespace

RealFft2D::RealFft2D(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), real_(alloc<double>(rows * cols)),
      spec_(alloc<std::complex<double>>(rows * (cols / 2 + 1))) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("RealFft2D: empty size");
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_2d(static_cast<int>(rows), static_cast<int>(cols), real_, as_fftw(spec_),
                                FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_2d(static_cast<int>(rows), static_cast<int>(cols), as_fftw(spec_), real_,
                                FFTW_ESTIMATE);
}

RealFft2D::~RealFft2D() {
    destroy(fwd_);
    destroy(bwd_);
    fftw_free(real_);
    fftw_free(spec_);
}

void RealFft2D::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }
// c2r destroys its input; callers refill spectrum() before every backward().
void RealFft2D::backward() { fftw_execute(static_cast<fftw_plan>(bwd_)); }

ComplexFft1D::ComplexFft1D(std::size_t n) : n_(n), buf_(alloc<std::complex<double>>(n)) {
    if (n == 0) throw std::invalid_argument("ComplexFft1D: empty size");
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(buf_), as_fftw(buf_), FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(buf_), as_fftw(buf_), FFTW_BACKWARD, FFTW_ESTIMATE);
}

ComplexFft1D::~ComplexFft1D() {
    destroy(fwd_);
    destroy(bwd_);
    fftw_free(buf_);
}

void ComplexFft1D::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }
void ComplexFft1D::backward() { fftw_execute(static_cast<fftw_plan>(bwd_)); }

Dct2D::Dct2D(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), in_(alloc<double>(rows * cols)), out_(alloc<double>(rows * cols)) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("Dct2D: empty size");
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_r2r_2d(static_cast<int>(rows), static_cast<int>(cols), in_, out_, FFTW_REDFT10,
                            FFTW_REDFT10, FFTW_ESTIMATE);
    inv_ = fftw_plan_r2r_2d(static_cast<int>(rows), static_cast<int>(cols), in_, out_, FFTW_REDFT01,
                            FFTW_REDFT01, FFTW_ESTIMATE);
}

Dct2D::~Dct2D() {
    destroy(fwd_);
    destroy(inv_);
    fftw_free(in_);
    fftw_free(out_);
}

// FFTW's REDFT10 computes 2 sum x cos(...); the orthonormal DCT-II scales index 0 by
// sqrt(1/4n) and the rest by sqrt(1/2n). REDFT01 computes X0 + 2 sum Xk cos(...), so the
// orthonormal inverse pre-scales index 0 by sqrt(1/n) and the rest by sqrt(1/2n).
void Dct2D::scale(std::span<double> v, bool forward) const {
    auto factors = [forward](std::size_t n, std::size_t k) {
        const double nn = static_cast<double>(n);
        if (k == 0) return forward ? std::sqrt(1.0 / (4.0 * nn)) : std::sqrt(1.0 / nn);
        return std::sqrt(1.0 / (2.0 * nn));
    };
    for (std::size_t r = 0; r < rows_; ++r) {
        const double fr = factors(rows_, r);
        for (std::size_t c = 0; c < cols_; ++c) v[r * cols_ + c] *= fr * factors(cols_, c);
    }
}

void Dct2D::forward(std::span<const double> in, std::span<double> out) {
    std::memcpy(in_, in.data(), sizeof(double) * rows_ * cols_);
    fftw_execute(static_cast<fftw_plan>(fwd_));
    std::memcpy(out.data(), out_, sizeof(double) * rows_ * cols_);
    scale(out, true);
}

void Dct2D::inverse(std::span<const double> in, std::span<double> out) {
    std::memcpy(in_, in.data(), sizeof(double) * rows_ * cols_);
    scale({in_, rows_ * cols_}, false);
    fftw_execute(static_cast<fftw_plan>(inv_));
    std::memcpy(out.data(), out_, sizeof(double) * rows_ * cols_);
}

std::size_t good_size(std::size_t n) {
    for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
        std::size_t r = m;
        for (std::size_t p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

}  // namespace pwtrack::fft
