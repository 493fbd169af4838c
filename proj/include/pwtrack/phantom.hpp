#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "pwtrack/config.hpp"

namespace pwtrack {

/// Point reflector. x lateral, y elevation, z axial (depth), all in meters.
struct Scatterer {
    double x = 0, y = 0, z = 0;
    double amplitude = 0;
    int group = -1;  // index of the rotating cylinder it belongs to; -1 = static
};

struct RotationCenter {
    double x = 0, z = 0;
};

/// Motion applied between transmit events.
///
/// Rigid rotation turns every scatterer of group g about centers[g] in the x-z plane.
/// Positive angular velocity is counter-clockwise as displayed with x to the right and
/// depth increasing downwards: a point right of its center moves towards the probe.
struct MotionLaw {
    enum class Kind { static_scene, rigid_rotation };
    Kind kind = Kind::static_scene;
    std::vector<RotationCenter> centers;
    double angular_velocity = 0;  // rad/s, shared by all groups
};

struct ScattererPhantom {
    std::vector<Scatterer> scatterers;
    MotionLaw motion;
};

/// Cylinder with its axis along elevation (y), centered on y = 0.
struct Cylinder {
    double center_x = 0;
    double center_z = 0;
    double radius = 6.86e-3;
    double height = 1.0e-3;
    double amplitude_db = 0;  // mean scatterer magnitude relative to 0 dB = 1.0
};

enum class AmplitudeDistribution { normal, constant_magnitude };

struct PhantomGeometry {
    std::vector<Cylinder> cylinders;
    double density = 10.0;  // scatterers per resolution cell
    /// Resolution-cell volume override (m^3); computed per cylinder from the probe when unset.
    std::optional<double> cell_volume;
    double elevation_cell = 1.0e-3;
    AmplitudeDistribution distribution = AmplitudeDistribution::normal;
};

/// Four-zone layout used by the numerical experiment (zones A, B, C, D in that order).
PhantomGeometry default_four_cylinder_geometry();

/// -6 dB resolution-cell volume at depth z: axial c/(2 B), lateral lambda z / L, elevation
/// `elevation_cell`.
double resolution_cell_volume(const ProbeConfig& probe, double depth, double elevation_cell);

/// Number of scatterers placed in `cyl`: round(density * cylinder volume / cell volume).
std::size_t scatterer_count(const ProbeConfig& probe, const PhantomGeometry& geometry,
                            const Cylinder& cyl);

ScattererPhantom build_rotating_cylinder_phantom(const ProbeConfig& probe,
                                                 const PhantomGeometry& geometry,
                                                 double angular_velocity, std::uint64_t seed);

/// State of the phantom after `dt` seconds of motion.
ScattererPhantom advance_motion(const ScattererPhantom& phantom, double dt);

/// Rotates (x, z) about `c` by angle `phi` using the MotionLaw sign convention.
inline void rotate_about(const RotationCenter& c, double phi, double& x, double& z) {
    const double cs = std::cos(phi), sn = std::sin(phi);
    const double dx = x - c.x, dz = z - c.z;
    x = c.x + cs * dx + sn * dz;
    z = c.z - sn * dx + cs * dz;
}

/// Angular velocity giving a chord displacement `max_displacement` at `radius` over
/// `frame_interval`.
double angular_velocity_for(double max_displacement, double radius, double frame_interval);

}  // namespace pwtrack
