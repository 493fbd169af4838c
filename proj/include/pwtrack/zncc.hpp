#pragma once

#include <cstddef>
#include <memory>

#include "pwtrack/array2d.hpp"

namespace pwtrack {

/// Lag radius per axis, in pixels.
struct LagRange {
    int z = 0;
    int x = 0;
};

/// Zero-normalized cross-correlation over integer lags -max_lag..max_lag.
///
/// values(lz + max_lag.z, lx + max_lag.x) holds the correlation between a(p) and b(p + lag)
/// over the overlapping region, with means and variances recomputed on that region. A lag whose
/// overlap has zero variance scores 0. `valid` is false when either window is constant.
struct CorrelationSurface {
    Array2D<double> values;
    LagRange max_lag;
    int peak_z = 0;
    int peak_x = 0;
    bool valid = false;

    double at(int lz, int lx) const {
        return values(static_cast<std::size_t>(lz + max_lag.z), static_cast<std::size_t>(lx + max_lag.x));
    }
    double peak_value() const { return at(peak_z, peak_x); }
};

/// Direct evaluation of the definition, O(window * lags).
CorrelationSurface zncc_surface(const Array2D<double>& win_a, const Array2D<double>& win_b,
                                LagRange max_lag);

/// Same surface via FFT cross-correlation plus integral images for the per-lag statistics.
/// Plans are built once per window shape and lag range; an engine is not thread-safe.
class ZnccEngine {
public:
    ZnccEngine(std::size_t rows, std::size_t cols, LagRange max_lag);
    ~ZnccEngine();
    ZnccEngine(const ZnccEngine&) = delete;
    ZnccEngine& operator=(const ZnccEngine&) = delete;
    ZnccEngine(ZnccEngine&&) noexcept;
    ZnccEngine& operator=(ZnccEngine&&) noexcept;

    CorrelationSurface compute(const Array2D<double>& win_a, const Array2D<double>& win_b);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

CorrelationSurface zncc_surface_fft(const Array2D<double>& win_a, const Array2D<double>& win_b,
                                    LagRange max_lag);

struct SubpixelPeak {
    enum class Method { gaussian_2d, gaussian_1d, integer };
    double z = 0;  // lag in pixels, integer peak plus fractional offset
    double x = 0;
    Method method = Method::integer;
    bool saturated = false;  // integer peak on the border of the lag range
};

/// 2-D Gaussian regression on the 3x3 neighbourhood of the peak: least-squares fit of
/// ln c = a0 + a1 x + a2 z + a3 x^2 + a4 x z + a5 z^2 and the stationary point of that
/// quadratic. Falls back to independent three-point Gaussian fits per axis when the
/// neighbourhood is not strictly positive or the fit is not a maximum within one pixel, and to
/// the integer peak when neither applies.
SubpixelPeak subpixel_peak(const CorrelationSurface& surface);

}  // namespace pwtrack
