#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace pwtrack::fft {

// Thin RAII wrappers over FFTW plans. Every plan owns its aligned buffers; callers copy data in
// through input() and read results from output(). Plans use FFTW_ESTIMATE so results do not
// depend on timing measurements taken at planning time.

/// Unnormalized 2-D real-to-complex forward and complex-to-real backward transforms.
class RealFft2D {
public:
    RealFft2D(std::size_t rows, std::size_t cols);
    ~RealFft2D();
    RealFft2D(const RealFft2D&) = delete;
    RealFft2D& operator=(const RealFft2D&) = delete;

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t spectrum_cols() const { return cols_ / 2 + 1; }

    std::span<double> real() { return {real_, rows_ * cols_}; }
    std::span<std::complex<double>> spectrum() { return {spec_, rows_ * spectrum_cols()}; }

    void forward();   // real() -> spectrum()
    void backward();  // spectrum() -> real(), scaled by rows*cols

private:
    std::size_t rows_, cols_;
    double* real_;
    std::complex<double>* spec_;
    void* fwd_;
    void* bwd_;
};

/// Length-n complex transform pair, unnormalized.
class ComplexFft1D {
public:
    explicit ComplexFft1D(std::size_t n);
    ~ComplexFft1D();
    ComplexFft1D(const ComplexFft1D&) = delete;
    ComplexFft1D& operator=(const ComplexFft1D&) = delete;

    std::size_t size() const { return n_; }
    std::span<std::complex<double>> data() { return {buf_, n_}; }
    void forward();
    void backward();

private:
    std::size_t n_;
    std::complex<double>* buf_;
    void* fwd_;
    void* bwd_;
};

/// Orthonormal 2-D DCT-II and its inverse (DCT-III) on a rows x cols array.
class Dct2D {
public:
    Dct2D(std::size_t rows, std::size_t cols);
    ~Dct2D();
    Dct2D(const Dct2D&) = delete;
    Dct2D& operator=(const Dct2D&) = delete;

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    void forward(std::span<const double> in, std::span<double> out);
    void inverse(std::span<const double> in, std::span<double> out);

private:
    void scale(std::span<double> v, bool forward) const;

    std::size_t rows_, cols_;
    double* in_;
    double* out_;
    void* fwd_;
    void* inv_;
};

/// Smallest n' >= n whose only prime factors are 2, 3, 5 and 7.
std::size_t good_size(std::size_t n);

}  // namespace pwtrack::fft
