#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pwtrack/array2d.hpp"
#include "pwtrack/phantom.hpp"
#include "pwtrack/tracking.hpp"

namespace pwtrack {

struct Vec2 {
    double x = 0;
    double z = 0;
};

/// Relative endpoint error |est - truth| / |truth|; empty when the truth is the zero vector.
std::optional<double> repe(Vec2 estimate, Vec2 truth);

struct MrepeResult {
    double value = 0;
    std::size_t used = 0;
    std::size_t skipped = 0;  // zero-truth pairs
};

/// Mean REPE over pairs (estimate, truth), skipping zero-truth pairs. Throws when none remain.
MrepeResult mrepe(std::span<const std::pair<Vec2, Vec2>> pairs);

/// Per-cell REPE (1.0 = 100%) and the cells that take part in aggregates.
struct RepeMap {
    Array2D<double> values;
    Array2D<std::uint8_t> mask;
};

/// Fraction of masked cells with value <= threshold. Throws on an empty mask.
double rve(const RepeMap& map, double threshold = 1.0);

/// REPE of `estimate` against `truth` on cells selected by `mask`; zero-truth cells drop out of
/// the mask.
RepeMap repe_map(const DisplacementField& estimate, const DisplacementField& truth,
                 const Array2D<std::uint8_t>& mask);

/// Cell-wise mean over realizations; a cell stays in the mask only if every map keeps it.
RepeMap average_repe_maps(std::span<const RepeMap> maps);

/// Exact rigid-rotation displacement over one frame interval, u = R(w dt)(p - c) - (p - c), at the
/// given window centers. Uses the MotionLaw sign convention.
DisplacementField analytic_rotation_field(RotationCenter center, double angular_velocity,
                                          double frame_interval, const std::vector<double>& centers_x,
                                          const std::vector<double>& centers_z);

/// Cells whose distance r from the cylinder axis satisfies inner <= r <= radius - outer.
/// Throws when the margins leave nothing or no center falls inside.
Array2D<std::uint8_t> zone_mask(const std::vector<double>& centers_x, const std::vector<double>& centers_z,
                                const Cylinder& cylinder, double inner_margin, double outer_margin);

}  // namespace pwtrack
