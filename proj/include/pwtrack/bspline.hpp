#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pwtrack/array2d.hpp"

namespace pwtrack::bspline {

// Cubic B-spline interpolation with whole-sample mirror boundaries. Samples are first turned
// into spline coefficients by the causal/anticausal recursive prefilter; evaluation then sums
// four coefficients per axis.

inline constexpr double kPole = -0.26794919243112270;  // sqrt(3) - 2

/// Maps any integer index into [0, n) by mirror reflection about 0 and n - 1.
std::ptrdiff_t mirror(std::ptrdiff_t k, std::ptrdiff_t n);

/// Cubic B-spline weights for the four coefficients at floor(s) - 1 .. floor(s) + 2, where t is
/// the fractional part of s.
inline std::array<double, 4> weights(double t) {
    const double t2 = t * t, t3 = t2 * t;
    const double u = 1.0 - t;
    return {u * u * u / 6.0, (4.0 - 6.0 * t2 + 3.0 * t3) / 6.0,
            (1.0 + 3.0 * t + 3.0 * t2 - 3.0 * t3) / 6.0, t3 / 6.0};
}

/// In-place conversion of samples to interpolation coefficients (strided access).
template <typename T>
void prefilter(T* data, std::size_t n, std::size_t stride = 1) {
    if (n < 2) return;
    const double z = kPole;
    const double gain = (1.0 - z) * (1.0 - 1.0 / z);
    auto at = [&](std::size_t i) -> T& { return data[i * stride]; };
    for (std::size_t i = 0; i < n; ++i) at(i) *= gain;

    // Causal initialization for the mirror-extended signal.
    T c0{};
    constexpr std::size_t horizon = 30;  // |z|^30 < 1e-17
    if (n > horizon) {
        double zk = 1.0;
        for (std::size_t k = 0; k < horizon; ++k) {
            c0 += zk * at(k);
            zk *= z;
        }
    } else {
        const double zn = std::pow(z, static_cast<double>(n - 1));
        double zk = z;
        double z2n = zn * zn / z;
        c0 = at(0) + zn * at(n - 1);
        for (std::size_t k = 1; k + 1 < n; ++k) {
            c0 += (zk + z2n) * at(k);
            zk *= z;
            z2n /= z;
        }
        c0 /= (1.0 - zn * zn);
    }
    at(0) = c0;
    for (std::size_t k = 1; k < n; ++k) at(k) += z * at(k - 1);

    at(n - 1) = (z / (z * z - 1.0)) * (at(n - 1) + z * at(n - 2));
    for (std::size_t k = n - 1; k-- > 0;) at(k) = z * (at(k + 1) - at(k));
}

/// Evaluates a 1-D spline at fractional index s using mirror boundaries.
template <typename T>
T evaluate(std::span<const T> coeffs, double s) {
    const auto n = static_cast<std::ptrdiff_t>(coeffs.size());
    const double fl = std::floor(s);
    const auto w = weights(s - fl);
    const auto base = static_cast<std::ptrdiff_t>(fl) - 1;
    T acc{};
    if (base >= 0 && base + 3 < n) {
        for (int i = 0; i < 4; ++i) acc += w[i] * coeffs[static_cast<std::size_t>(base + i)];
    } else {
        for (int i = 0; i < 4; ++i) acc += w[i] * coeffs[static_cast<std::size_t>(mirror(base + i, n))];
    }
    return acc;
}

/// Spline coefficients of a 2-D array (rows then columns).
template <typename T>
Array2D<T> prefilter_2d(const Array2D<T>& samples) {
    Array2D<T> c = samples;
    for (std::size_t r = 0; r < c.rows(); ++r) prefilter(c.data() + r * c.cols(), c.cols(), 1);
    for (std::size_t col = 0; col < c.cols(); ++col) prefilter(c.data() + col, c.rows(), c.cols());
    return c;
}

/// Evaluates a 2-D spline at fractional (row, col) with mirror boundaries.
template <typename T>
T evaluate_2d(const Array2D<T>& coeffs, double row, double col) {
    const auto nr = static_cast<std::ptrdiff_t>(coeffs.rows());
    const auto nc = static_cast<std::ptrdiff_t>(coeffs.cols());
    const double fr = std::floor(row), fc = std::floor(col);
    const auto wr = weights(row - fr), wc = weights(col - fc);
    const auto br = static_cast<std::ptrdiff_t>(fr) - 1, bc = static_cast<std::ptrdiff_t>(fc) - 1;
    std::array<std::size_t, 4> cols{};
    for (int j = 0; j < 4; ++j) cols[j] = static_cast<std::size_t>(mirror(bc + j, nc));
    T acc{};
    for (int i = 0; i < 4; ++i) {
        const auto r = static_cast<std::size_t>(mirror(br + i, nr));
        T line{};
        for (int j = 0; j < 4; ++j) line += wc[j] * coeffs(r, cols[j]);
        acc += wr[i] * line;
    }
    return acc;
}

}  // namespace pwtrack::bspline
