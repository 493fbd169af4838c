#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pwtrack/analytic.hpp"
#include "pwtrack/array2d.hpp"
#include "pwtrack/config.hpp"
#include "pwtrack/simulate.hpp"

namespace pwtrack {

/// Analytic (IQ) image, pixels(iz, ix).
struct IQImage {
    Array2D<std::complex<double>> pixels;
    ImageGrid grid;
};

/// Magnitude image, pixels(iz, ix).
struct EnvelopeImage {
    Array2D<double> pixels;
    ImageGrid grid;
};

struct DasOptions {
    /// Receive aperture gate: element e contributes to pixel p iff |x_p - x_e| <= z_p / (2 F#).
    /// Unset means the full aperture contributes everywhere.
    std::optional<double> receive_f_number;
};

/// Backprojection delay-and-sum. For pixel p and element e the analytic channel signal is
/// sampled at (z cos b + x sin b)/c + |p - p_e|/c by cubic B-spline interpolation; samples
/// outside the recorded window contribute nothing. The element sum is divided by the number of
/// contributing elements at each pixel (image equalization). Parallel over pixel rows.
IQImage das_reconstruct(const AnalyticChannelData& data, const ProbeConfig& probe,
                        const ImageGrid& grid, const DasOptions& options = {});

/// Converts to analytic channel data first, then reconstructs.
IQImage das_reconstruct(const ChannelData& data, const ProbeConfig& probe, const ImageGrid& grid,
                        const DasOptions& options = {});

/// Coherent compounding: pixel-wise complex mean of images sharing one grid.
IQImage compound(std::span<const IQImage> images);

/// Pixel-wise modulus on the same grid.
EnvelopeImage envelope(const IQImage& iq);

/// Modulus followed by axial decimation by two: rows 0, 2, 4, ... are kept and an odd trailing
/// row is dropped, so nz_out = nz / 2. The lambda/4 x lambda/8 reconstruction grid becomes
/// lambda/4 x lambda/4.
EnvelopeImage envelope_on_tracking_grid(const IQImage& iq);

/// Single-frame image enhancer slot. `identity` returns its input; `external_command` writes the
/// image to a temporary IQ file, runs `<command> <input> <output>` through the shell, and reads
/// the result back. The output must be on the identical grid.
struct EnhancerHook {
    enum class Kind { identity, external_command };
    Kind kind = Kind::identity;
    std::string command;

    static EnhancerHook identity() { return {}; }
    static EnhancerHook external(std::string cmd) { return {Kind::external_command, std::move(cmd)}; }
};

/// Throws std::runtime_error on command failure ("enhancer command failed") or when the
/// returned image differs in shape or extents ("grid mismatch").
IQImage enhance(const IQImage& img, const EnhancerHook& hook);

}  // namespace pwtrack
