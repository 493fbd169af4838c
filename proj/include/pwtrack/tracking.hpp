#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pwtrack/array2d.hpp"
#include "pwtrack/beamform.hpp"
#include "pwtrack/config.hpp"
#include "pwtrack/smooth.hpp"

namespace pwtrack {

struct TrackingParams {
    std::vector<double> window_sizes;  // meters, square windows, strictly decreasing
    double overlap = 0.65;
    /// Lag radius in pixels per pass. Empty or negative entries use the default: half the
    /// window on the first pass, a quarter of the window afterwards.
    std::vector<int> search_margin;
    bool smooth_every_pass = true;
    SmoothOptions smoothing;

    std::size_t passes() const { return window_sizes.size(); }

    /// Four passes of 4, 2.5, 2 and 1.5 mm with 65% overlap.
    static TrackingParams standard();

    void validate() const;
};

/// Per-pass geometry in pixels of the tracked image.
struct PassLayout {
    int window_z = 0;  // odd pixel counts
    int window_x = 0;
    int step_z = 0;
    int step_x = 0;
    int lag_z = 0;
    int lag_x = 0;
    std::vector<int> center_rows;
    std::vector<int> center_cols;
};

/// Window sizes become the nearest odd pixel count along each axis; center spacing is
/// size * (1 - overlap). Centers are laid out symmetrically so every window lies inside the
/// image. An axis shorter than the window gets no centers.
PassLayout pass_layout(const TrackingParams& params, std::size_t pass, const ImageGrid& grid);

/// Displacements in meters on a separable window-center grid. u(p) maps a point of frame a to its
/// position in frame b.
struct DisplacementField {
    Array2D<double> u_x, u_z;
    std::vector<double> centers_x;  // meters, one per column
    std::vector<double> centers_z;  // meters, one per row
    Array2D<std::uint8_t> valid;
    ImageGrid image_grid;  // grid of the tracked frames

    std::vector<double> window_sizes;
    double overlap = 0;
    std::string frame_a, frame_b;

    std::size_t rows() const { return u_x.rows(); }
    std::size_t cols() const { return u_x.cols(); }
    std::size_t valid_count() const;
};

/// Bilinear interpolation of both components at (x, z) in meters, clamped to the center hull.
std::pair<double, double> sample_field(const DisplacementField& field, double x, double z);

/// Resamples img at p + u(p), u densified bilinearly to every pixel and the image evaluated by
/// cubic B-spline interpolation with mirror boundaries.
EnvelopeImage warp_image(const EnvelopeImage& img, const DisplacementField& field);

/// Robust DCT-PLS smoothing of both components; invalid cells are treated as missing and
/// inpainted. The validity mask is kept. Throws if every cell is invalid.
DisplacementField smooth_field(const DisplacementField& field, const SmoothOptions& options = {});

/// Coarse-to-fine multipass ZNCC tracking from frame_a to frame_b. Element k of the result is
/// the accumulated field after pass k.
std::vector<DisplacementField> track_passes(const EnvelopeImage& frame_a, const EnvelopeImage& frame_b,
                                            const TrackingParams& params);

/// Final accumulated field on the last pass's window-center grid.
DisplacementField track(const EnvelopeImage& frame_a, const EnvelopeImage& frame_b,
                        const TrackingParams& params);

}  // namespace pwtrack
