#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace pwtrack {

inline constexpr double kPi = 3.14159265358979323846;

/// Linear-array transducer, excitation and acquisition constants. SI units throughout.
struct ProbeConfig {
    int element_count = 192;
    double pitch = 230e-6;
    double element_width = 207e-6;
    double aperture = 43.93e-3;
    double center_frequency = 5.3e6;
    double transmit_frequency = 5.208e6;
    double sampling_frequency = 20.833e6;
    double sound_speed = 1540.0;
    double elevation_focus = 28e-3;
    double fractional_bandwidth = 0.75;

    /// Wavelength at the transmit frequency. Used for grids, simulation and tracking.
    double wavelength() const { return sound_speed / transmit_frequency; }
    /// Wavelength at the probe center frequency. Used for steering-sequence planning.
    double center_wavelength() const { return sound_speed / center_frequency; }

    /// Lateral position of element e; the array is centered on x = 0.
    double element_x(int e) const {
        return (static_cast<double>(e) - 0.5 * static_cast<double>(element_count - 1)) * pitch;
    }

    /// Throws std::invalid_argument on the first violated invariant.
    void validate() const;

    /// GE 9L-D / Vantage 256 configuration.
    static ProbeConfig ge9ld() { return {}; }
};

/// Steered plane-wave transmits forming one compounded frame.
struct SteeringSequence {
    std::vector<double> angles;  // radians, in firing order
    double prf = 9e3;

    std::size_t size() const { return angles.size(); }
    double frame_rate() const { return prf / static_cast<double>(angles.size()); }
    double frame_interval() const { return static_cast<double>(angles.size()) / prf; }
};

/// Cartesian pixel grid; endpoints inclusive, pixel centers on nodes.
struct ImageGrid {
    double x_min = 0, x_max = 0;
    double z_min = 0, z_max = 0;
    double dx = 1, dz = 1;
    std::size_t nx = 1, nz = 1;

    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
    double z(std::size_t j) const { return z_min + static_cast<double>(j) * dz; }

    void validate() const;

    /// Builds a grid from spacings and extents; counts are rounded and the maxima snap to the last node.
    static ImageGrid from_extents(double x_min, double x_max, double z_min, double z_max, double dx,
                                  double dz);

    friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

double plan_angle_spacing(const ProbeConfig& probe);

/// Angles n*spacing for n = -M..M, fired in the alternate order
/// (-b_M, b_M, -b_{M-1}, b_{M-1}, ..., -b_1, b_1, 0).
SteeringSequence plan_sequence(const ProbeConfig& probe, int n_angles, double prf);

/// L / (lambda * F#), rounded to the nearest integer and then bumped up to the next odd value.
int reference_angle_count(const ProbeConfig& probe, double f_number);

/// Grid spanning the aperture laterally and `depth_range` axially with spacings given as
/// fractions of the transmit wavelength. Extents that are not whole multiples of the spacing
/// are widened symmetrically to the next pixel.
ImageGrid make_image_grid(const ProbeConfig& probe, std::pair<double, double> depth_range,
                          double axial_fraction, double lateral_fraction);

/// INI-style configuration ([probe], [sequence], [grid], ...). Keys mirror struct field names.
class Config {
public:
    Config() = default;
    static Config load(const std::filesystem::path& path);
    static Config parse(const std::string& text);

    bool has(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::string> get_strings(const std::string& key,
                                         const std::vector<std::string>& fallback) const;

    void set(const std::string& key, const std::string& value);
    std::string to_string() const;

private:
    boost::property_tree::ptree tree_;
};

ProbeConfig probe_from_config(const Config& cfg);

struct GridSettings {
    double depth_min = 1e-3;
    double depth_max = 45e-3;
    double axial_fraction = 0.125;
    double lateral_fraction = 0.25;
};
GridSettings grid_settings_from_config(const Config& cfg);

}  // namespace pwtrack
