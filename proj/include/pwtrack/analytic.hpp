#pragma once

#include <complex>

#include "pwtrack/array2d.hpp"
#include "pwtrack/simulate.hpp"

namespace pwtrack {

/// Per-channel analytic signal of a ChannelData, same layout [n_time x n_elements].
struct AnalyticChannelData {
    Array2D<std::complex<double>> samples;
    double t0 = 0;
    double fs = 0;
    double tx_angle = 0;

    std::size_t n_time() const { return samples.rows(); }
    std::size_t n_elements() const { return samples.cols(); }
};

/// Analytic signal x + i H{x} per element, built from the one-sided spectrum (DC and Nyquist
/// bins kept once, positive bins doubled, negative bins zeroed). Requires n_time >= 8.
AnalyticChannelData to_analytic(const ChannelData& data);

}  // namespace pwtrack
