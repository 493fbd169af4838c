#include "pwtrack/phantom.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pwtrack {

PhantomGeometry default_four_cylinder_geometry() {
    PhantomGeometry g;
    // A: bright reference zone; B, C, D sit where A's edge-wave, side-lobe and
    // grating-lobe artifacts land in a single normal-incidence plane-wave image.
    g.cylinders = {
        {-8.0e-3, 16.0e-3, 6.86e-3, 1.0e-3, 20.0},
        {-8.0e-3, 32.0e-3, 6.86e-3, 1.0e-3, -20.0},
        {6.5e-3, 32.0e-3, 6.86e-3, 1.0e-3, -20.0},
        {12.0e-3, 16.0e-3, 6.86e-3, 1.0e-3, 0.0},
    };
    return g;
}

double resolution_cell_volume(const ProbeConfig& probe, double depth, double elevation_cell) {
    if (depth <= 0) throw std::invalid_argument("resolution_cell_volume: depth must be positive");
    const double bandwidth = probe.fractional_bandwidth * probe.center_frequency;
    const double axial = probe.sound_speed / (2.0 * bandwidth);
    const double lateral = probe.wavelength() * depth / probe.aperture;
    return axial * lateral * elevation_cell;
}

std::size_t scatterer_count(const ProbeConfig& probe, const PhantomGeometry& geometry,
                            const Cylinder& cyl) {
    if (!(cyl.radius > 0) || !(cyl.height > 0))
        throw std::invalid_argument("cylinder radius and height must be positive");
    if (!(geometry.density > 0)) throw std::invalid_argument("scatterer density must be positive");
    const double volume = kPi * cyl.radius * cyl.radius * cyl.height;
    const double cell = geometry.cell_volume
                            ? *geometry.cell_volume
                            : resolution_cell_volume(probe, cyl.center_z, geometry.elevation_cell);
    if (!(cell > 0)) throw std::invalid_argument("resolution cell volume must be positive");
    return static_cast<std::size_t>(std::llround(geometry.density * volume / cell));
}

ScattererPhantom build_rotating_cylinder_phantom(const ProbeConfig& probe,
                                                 const PhantomGeometry& geometry,
                                                 double angular_velocity, std::uint64_t seed) {
    if (geometry.cylinders.empty()) throw std::invalid_argument("phantom needs at least one cylinder");
    if (!std::isfinite(angular_velocity)) throw std::invalid_argument("angular velocity must be finite");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    ScattererPhantom ph;
    ph.motion.kind = MotionLaw::Kind::rigid_rotation;
    ph.motion.angular_velocity = angular_velocity;

    for (std::size_t g = 0; g < geometry.cylinders.size(); ++g) {
        const Cylinder& cyl = geometry.cylinders[g];
        if (cyl.center_z - cyl.radius <= 0)
            throw std::invalid_argument("cylinder extends above the probe surface");
        ph.motion.centers.push_back({cyl.center_x, cyl.center_z});

        const std::size_t n = scatterer_count(probe, geometry, cyl);
        const double mean_mag = std::pow(10.0, cyl.amplitude_db / 20.0);
        // E|N(0, s)| = s sqrt(2/pi)
        const double sigma = mean_mag * std::sqrt(kPi / 2.0);

        ph.scatterers.reserve(ph.scatterers.size() + n);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = cyl.radius * std::sqrt(unit(rng));
            const double phi = 2.0 * kPi * unit(rng);
            Scatterer s;
            s.x = cyl.center_x + r * std::cos(phi);
            s.z = cyl.center_z + r * std::sin(phi);
            s.y = (unit(rng) - 0.5) * cyl.height;
            s.group = static_cast<int>(g);
            if (geometry.distribution == AmplitudeDistribution::normal) {
                s.amplitude = sigma * gauss(rng);
            } else {
                s.amplitude = unit(rng) < 0.5 ? -mean_mag : mean_mag;
            }
            ph.scatterers.push_back(s);
        }
    }
    return ph;
}

ScattererPhantom advance_motion(const ScattererPhantom& phantom, double dt) {
    if (dt < 0) throw std::invalid_argument("advance_motion: dt must be non-negative");
    ScattererPhantom out = phantom;
    if (phantom.motion.kind == MotionLaw::Kind::static_scene || dt == 0) return out;

    const double phi = phantom.motion.angular_velocity * dt;
    const double cs = std::cos(phi), sn = std::sin(phi);
    for (auto& s : out.scatterers) {
        if (s.group < 0) continue;
        if (static_cast<std::size_t>(s.group) >= phantom.motion.centers.size())
            throw std::invalid_argument("scatterer group has no rotation center");
        const RotationCenter& c = phantom.motion.centers[static_cast<std::size_t>(s.group)];
        const double dx = s.x - c.x, dz = s.z - c.z;
        s.x = c.x + cs * dx + sn * dz;
        s.z = c.z - sn * dx + cs * dz;
    }
    return out;
}

double angular_velocity_for(double max_displacement, double radius, double frame_interval) {
    if (!(radius > 0) || !(frame_interval > 0))
        throw std::invalid_argument("angular_velocity_for: radius and interval must be positive");
    if (max_displacement > 2 * radius)
        throw std::invalid_argument("angular_velocity_for: chord longer than the diameter");
    // chord = 2 r sin(theta / 2)
    const double theta = 2.0 * std::asin(max_displacement / (2.0 * radius));
    return theta / frame_interval;
}

}  // namespace pwtrack
