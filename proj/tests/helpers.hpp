#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pwtrack/array2d.hpp"
#include "pwtrack/beamform.hpp"
#include "pwtrack/config.hpp"
#include "pwtrack/phantom.hpp"
#include "pwtrack/simulate.hpp"

namespace testutil {

using namespace pwtrack;

inline Array2D<double> random_array(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Array2D<double> a(rows, cols);
    for (auto& v : a) v = n(rng);
    return a;
}

/// Uniform block of scatterers in [x0, x1] x [z0, z1], |y| <= 0.5 mm.
inline ScattererPhantom speckle_block(double x0, double x1, double z0, double z1, std::size_t count,
                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(x0, x1), uz(z0, z1), uy(-0.5e-3, 0.5e-3);
    std::normal_distribution<double> amp(0.0, 1.0);
    ScattererPhantom ph;
    ph.scatterers.reserve(count);
    for (std::size_t i = 0; i < count; ++i) ph.scatterers.push_back({ux(rng), uy(rng), uz(rng), amp(rng), -1});
    return ph;
}

inline ScattererPhantom translated(ScattererPhantom ph, double dx, double dz) {
    for (auto& s : ph.scatterers) {
        s.x += dx;
        s.z += dz;
    }
    return ph;
}

inline ChannelData simulate(const ScattererPhantom& ph, const ProbeConfig& probe, double angle = 0.0) {
    const PulseModel pulse = PulseModel::from_probe(probe);
    return simulate_channel_data(ph, probe, angle, pulse, covering_time_window(ph, probe, angle, pulse));
}

/// Window around a depth range covering the full aperture, lambda/4 x lambda/8.
inline ImageGrid depth_grid(const ProbeConfig& probe, double z0, double z1) {
    return make_image_grid(probe, {z0, z1}, 0.125, 0.25);
}

}  // namespace testutil
