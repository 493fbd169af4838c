#include "pwtrack/zncc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pwtrack/fft.hpp"

namespace pwtrack {

namespace {

struct Overlap {
    std::size_t a0, a1;  // half-open range in window a
    std::ptrdiff_t shift;
};

// Indices p of a with p + lag inside the window.
Overlap overlap(std::size_t n, int lag) {
    const auto ni = static_cast<std::ptrdiff_t>(n);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -lag);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(ni, ni - lag);
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi)), lag};
}

double mean_of(const Array2D<double>& w) {
    double s = 0;
    for (double v : w) s += v;
    return s / static_cast<double>(w.size());
}

double variance_sum(const Array2D<double>& w, double mean) {
    double s = 0;
    for (double v : w) s += (v - mean) * (v - mean);
    return s;
}

void check_windows(const Array2D<double>& a, const Array2D<double>& b, LagRange max_lag) {
    if (!a.same_shape(b)) throw std::invalid_argument("zncc: windows differ in shape");
    if (a.empty()) throw std::invalid_argument("zncc: empty window");
    if (max_lag.z < 0 || max_lag.x < 0) throw std::invalid_argument("zncc: negative lag range");
    if (static_cast<std::size_t>(max_lag.z) >= a.rows() || static_cast<std::size_t>(max_lag.x) >= a.cols())
        throw std::invalid_argument("zncc: lag range exceeds the window");
}

CorrelationSurface empty_surface(LagRange max_lag) {
    CorrelationSurface s;
    s.max_lag = max_lag;
    s.values = Array2D<double>(static_cast<std::size_t>(2 * max_lag.z + 1),
                               static_cast<std::size_t>(2 * max_lag.x + 1), 0.0);
    return s;
}

// Lowest (z, then x) lag wins ties.
void locate_peak(CorrelationSurface& s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int lz = -s.max_lag.z; lz <= s.max_lag.z; ++lz)
        for (int lx = -s.max_lag.x; lx <= s.max_lag.x; ++lx)
            if (s.at(lz, lx) > best) {
                best = s.at(lz, lx);
                s.peak_z = lz;
                s.peak_x = lx;
            }
}

// Variances below this fraction of the whole-window variance count as zero.
constexpr double kFlatTolerance = 1e-12;

}  // namespace

CorrelationSurface zncc_surface(const Array2D<double>& a, const Array2D<double>& b, LagRange max_lag) {
    check_windows(a, b, max_lag);
    CorrelationSurface out = empty_surface(max_lag);
    const double va_all = variance_sum(a, mean_of(a)) / static_cast<double>(a.size());
    const double vb_all = variance_sum(b, mean_of(b)) / static_cast<double>(b.size());
    if (!(va_all > 0) || !(vb_all > 0)) return out;
    out.valid = true;

    for (int lz = -max_lag.z; lz <= max_lag.z; ++lz) {
        const Overlap oz = overlap(a.rows(), lz);
        for (int lx = -max_lag.x; lx <= max_lag.x; ++lx) {
            const Overlap ox = overlap(a.cols(), lx);
            const double n = static_cast<double>((oz.a1 - oz.a0) * (ox.a1 - ox.a0));
            if (n < 2) continue;
            double ma = 0, mb = 0;
            for (std::size_t r = oz.a0; r < oz.a1; ++r)
                for (std::size_t c = ox.a0; c < ox.a1; ++c) {
                    ma += a(r, c);
                    mb += b(r + oz.shift, c + ox.shift);
                }
            ma /= n;
            mb /= n;
            double sab = 0, saa = 0, sbb = 0;
            for (std::size_t r = oz.a0; r < oz.a1; ++r)
                for (std::size_t c = ox.a0; c < ox.a1; ++c) {
                    const double da = a(r, c) - ma;
                    const double db = b(r + oz.shift, c + ox.shift) - mb;
                    sab += da * db;
                    saa += da * da;
                    sbb += db * db;
                }
            if (saa <= kFlatTolerance * n * va_all || sbb <= kFlatTolerance * n * vb_all) continue;
            out.values(static_cast<std::size_t>(lz + max_lag.z), static_cast<std::size_t>(lx + max_lag.x)) =
                sab / std::sqrt(saa * sbb);
        }
    }
    locate_peak(out);
    return out;
}

struct ZnccEngine::Impl {
    std::size_t rows, cols;
    LagRange lag;
    std::size_t pz, px;
    fft::RealFft2D fa, fb;
    std::vector<std::complex<double>> spec_a;
    std::vector<double> ia, ia2, ib, ib2;  // (rows+1) x (cols+1) integral images

    Impl(std::size_t r, std::size_t c, LagRange l)
        : rows(r), cols(c), lag(l), pz(fft::good_size(r + static_cast<std::size_t>(l.z))),
          px(fft::good_size(c + static_cast<std::size_t>(l.x))), fa(pz, px), fb(pz, px),
          spec_a(fa.spectrum().size()), ia((r + 1) * (c + 1)), ia2(ia.size()), ib(ia.size()),
          ib2(ia.size()) {}

    void integrate(const Array2D<double>& w, double mean, std::vector<double>& s1, std::vector<double>& s2) const {
        const std::size_t stride = cols + 1;
        std::fill(s1.begin(), s1.begin() + static_cast<std::ptrdiff_t>(stride), 0.0);
        std::fill(s2.begin(), s2.begin() + static_cast<std::ptrdiff_t>(stride), 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            double row1 = 0, row2 = 0;
            s1[(r + 1) * stride] = 0;
            s2[(r + 1) * stride] = 0;
            for (std::size_t c = 0; c < cols; ++c) {
                const double v = w(r, c) - mean;
                row1 += v;
                row2 += v * v;
                s1[(r + 1) * stride + c + 1] = s1[r * stride + c + 1] + row1;
                s2[(r + 1) * stride + c + 1] = s2[r * stride + c + 1] + row2;
            }
        }
    }

    double box(const std::vector<double>& s, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) const {
        const std::size_t stride = cols + 1;
        return s[r1 * stride + c1] - s[r0 * stride + c1] - s[r1 * stride + c0] + s[r0 * stride + c0];
    }

    void load(fft::RealFft2D& f, const Array2D<double>& w, double mean) const {
        auto real = f.real();
        std::fill(real.begin(), real.end(), 0.0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) real[r * px + c] = w(r, c) - mean;
    }
};

ZnccEngine::ZnccEngine(std::size_t rows, std::size_t cols, LagRange max_lag) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("zncc: empty window");
    if (max_lag.z < 0 || max_lag.x < 0 || static_cast<std::size_t>(max_lag.z) >= rows ||
        static_cast<std::size_t>(max_lag.x) >= cols)
        throw std::invalid_argument("zncc: lag range exceeds the window");
    impl_ = std::make_unique<Impl>(rows, cols, max_lag);
}

ZnccEngine::~ZnccEngine() = default;
ZnccEngine::ZnccEngine(ZnccEngine&&) noexcept = default;
ZnccEngine& ZnccEngine::operator=(ZnccEngine&&) noexcept = default;

CorrelationSurface ZnccEngine::compute(const Array2D<double>& a, const Array2D<double>& b) {
    Impl& m = *impl_;
    if (a.rows() != m.rows || a.cols() != m.cols) throw std::invalid_argument("zncc: window shape mismatch");
    check_windows(a, b, m.lag);
    CorrelationSurface out = empty_surface(m.lag);

    const double mean_a = mean_of(a), mean_b = mean_of(b);
    const double va_all = variance_sum(a, mean_a) / static_cast<double>(a.size());
    const double vb_all = variance_sum(b, mean_b) / static_cast<double>(b.size());
    if (!(va_all > 0) || !(vb_all > 0)) return out;
    out.valid = true;

    m.load(m.fa, a, mean_a);
    m.fa.forward();
    std::copy(m.fa.spectrum().begin(), m.fa.spectrum().end(), m.spec_a.begin());
    m.load(m.fb, b, mean_b);
    m.fb.forward();
    auto spec = m.fb.spectrum();
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= std::conj(m.spec_a[i]);
    m.fb.backward();
    const auto corr = m.fb.real();
    const double norm = 1.0 / static_cast<double>(m.pz * m.px);

    m.integrate(a, mean_a, m.ia, m.ia2);
    m.integrate(b, mean_b, m.ib, m.ib2);

    for (int lz = -m.lag.z; lz <= m.lag.z; ++lz) {
        const Overlap oz = overlap(m.rows, lz);
        const std::size_t wz = static_cast<std::size_t>((lz + static_cast<long>(m.pz)) % static_cast<long>(m.pz));
        for (int lx = -m.lag.x; lx <= m.lag.x; ++lx) {
            const Overlap ox = overlap(m.cols, lx);
            const double n = static_cast<double>((oz.a1 - oz.a0) * (ox.a1 - ox.a0));
            if (n < 2) continue;
            const std::size_t wx = static_cast<std::size_t>((lx + static_cast<long>(m.px)) % static_cast<long>(m.px));
            const double sab = corr[wz * m.px + wx] * norm;
            const double sa = m.box(m.ia, oz.a0, oz.a1, ox.a0, ox.a1);
            const double sa2 = m.box(m.ia2, oz.a0, oz.a1, ox.a0, ox.a1);
            const auto bz0 = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(oz.a0) + oz.shift);
            const auto bz1 = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(oz.a1) + oz.shift);
            const auto bx0 = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(ox.a0) + ox.shift);
            const auto bx1 = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(ox.a1) + ox.shift);
            const double sb = m.box(m.ib, bz0, bz1, bx0, bx1);
            const double sb2 = m.box(m.ib2, bz0, bz1, bx0, bx1);
            const double saa = sa2 - sa * sa / n;
            const double sbb = sb2 - sb * sb / n;
            if (saa <= kFlatTolerance * n * va_all || sbb <= kFlatTolerance * n * vb_all) continue;
            out.values(static_cast<std::size_t>(lz + m.lag.z), static_cast<std::size_t>(lx + m.lag.x)) =
                (sab - sa * sb / n) / std::sqrt(saa * sbb);
        }
    }
    locate_peak(out);
    return out;
}

CorrelationSurface zncc_surface_fft(const Array2D<double>& a, const Array2D<double>& b, LagRange max_lag) {
    check_windows(a, b, max_lag);
    ZnccEngine engine(a.rows(), a.cols(), max_lag);
    return engine.compute(a, b);
}

SubpixelPeak subpixel_peak(const CorrelationSurface& s) {
    SubpixelPeak out;
    out.z = s.peak_z;
    out.x = s.peak_x;
    if (std::abs(s.peak_z) == s.max_lag.z || std::abs(s.peak_x) == s.max_lag.x) {
        out.saturated = true;
        return out;
    }

    double l[3][3];  // l[dz + 1][dx + 1] = ln c
    bool positive = true;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dx = -1; dx <= 1; ++dx) {
            const double v = s.at(s.peak_z + dz, s.peak_x + dx);
            if (!(v > 0)) positive = false;
            l[dz + 1][dx + 1] = positive ? std::log(v) : 0.0;
        }

    if (positive) {
        double sum = 0, sx = 0, sz = 0, sxz = 0, sxx = 0, szz = 0;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dx = -1; dx <= 1; ++dx) {
                const double v = l[dz + 1][dx + 1];
                sum += v;
                sx += dx * v;
                sz += dz * v;
                sxz += dx * dz * v;
                sxx += dx * dx * v;
                szz += dz * dz * v;
            }
        // Normal equations of the 3x3 design decouple into the odd terms and a 3x3 system for
        // the even terms (a0, a3, a5).
        const double a1 = sx / 6.0, a2 = sz / 6.0, a4 = sxz / 4.0;
        const double even = 0.5 * (sxx + szz - 4.0 * sum / 3.0);  // a3 + a5
        const double a3 = 0.5 * (even + 0.5 * (sxx - szz));
        const double a5 = 0.5 * (even - 0.5 * (sxx - szz));
        const double det = 4.0 * a3 * a5 - a4 * a4;
        if (a3 < 0 && det > 0) {
            const double ox = (a4 * a2 - 2.0 * a5 * a1) / det;
            const double oz = (a4 * a1 - 2.0 * a3 * a2) / det;
            if (std::abs(ox) <= 1.0 && std::abs(oz) <= 1.0) {
                out.x = s.peak_x + ox;
                out.z = s.peak_z + oz;
                out.method = SubpixelPeak::Method::gaussian_2d;
                return out;
            }
        }
    }

    auto three_point = [](double m, double c, double p, double& offset) {
        if (!(m > 0 && c > 0 && p > 0)) return false;
        const double lm = std::log(m), lc = std::log(c), lp = std::log(p);
        const double den = 2.0 * (lm - 2.0 * lc + lp);
        if (!(den < 0)) return false;
        offset = (lm - lp) / den;
        return std::abs(offset) <= 1.0;
    };
    double ox = 0, oz = 0;
    const double c = s.at(s.peak_z, s.peak_x);
    const bool fx = three_point(s.at(s.peak_z, s.peak_x - 1), c, s.at(s.peak_z, s.peak_x + 1), ox);
    const bool fz = three_point(s.at(s.peak_z - 1, s.peak_x), c, s.at(s.peak_z + 1, s.peak_x), oz);
    if (fx) out.x += ox;
    if (fz) out.z += oz;
    if (fx || fz) out.method = SubpixelPeak::Method::gaussian_1d;
    return out;
}

}  // namespace pwtrack
