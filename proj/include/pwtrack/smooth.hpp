#pragma once

#include <optional>
#include <span>

#include "pwtrack/array2d.hpp"

namespace pwtrack {

struct SmoothOptions {
    bool robust = true;
    /// Fixed smoothing parameter; chosen by generalized cross-validation when unset.
    std::optional<double> smoothing;
    int max_iterations = 100;
    double tolerance = 1e-3;
};

struct SmoothReport {
    double smoothing = 0;
    int robust_steps = 0;
};

/// Robust penalized least-squares smoothing of gridded data in the DCT domain.
///
/// All components share one smoothing parameter and one set of weights; robust weights are
/// computed from the Euclidean norm of the residual vector (bisquare, MAD scale). Cells with
/// zero weight are treated as missing and filled in. Components are overwritten with the
/// smoothed result. Throws if every weight is zero.
SmoothReport smooth_components(std::span<Array2D<double>> components, const Array2D<double>& weights,
                               const SmoothOptions& options = {});

}  // namespace pwtrack
