#include "pwtrack/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

namespace pwtrack {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

std::size_t count_nodes(double span, double step) {
    // Tolerance absorbs spans that are whole multiples up to rounding.
    const double n = std::ceil(span / step - 1e-9);
    return static_cast<std::size_t>(std::max(0.0, n)) + 1;
}

}  // namespace

void ProbeConfig::validate() const {
    require(element_count >= 2, "probe: element_count must be >= 2");
    require(pitch > 0 && element_width > 0 && aperture > 0, "probe: geometry must be positive");
    require(std::abs(aperture - element_count * pitch) <= pitch * (1 + 1e-9),
            "probe: aperture must equal element_count * pitch within one pitch");
    require(center_frequency > 0 && transmit_frequency > 0 && sampling_frequency > 0,
            "probe: frequencies must be positive");
    require(sampling_frequency >= 2 * transmit_frequency,
            "probe: sampling_frequency must be at least twice the transmit frequency");
    require(sound_speed > 0, "probe: sound_speed must be positive");
    require(fractional_bandwidth > 0, "probe: fractional_bandwidth must be positive");
    require(wavelength() < aperture && center_wavelength() < aperture,
            "probe: wavelength must be smaller than the aperture");
}

void ImageGrid::validate() const {
    require(dx > 0 && dz > 0, "grid: spacings must be positive");
    require(nx >= 1 && nz >= 1, "grid: empty grid");
    require(nx == static_cast<std::size_t>(std::llround((x_max - x_min) / dx)) + 1,
            "grid: nx inconsistent with extent");
    require(nz == static_cast<std::size_t>(std::llround((z_max - z_min) / dz)) + 1,
            "grid: nz inconsistent with extent");
}

ImageGrid ImageGrid::from_extents(double x_min, double x_max, double z_min, double z_max,
                                  double dx, double dz) {
    require(dx > 0 && dz > 0, "grid: spacings must be positive");
    require(x_max >= x_min && z_max >= z_min, "grid: extents must be increasing");
    ImageGrid g;
    g.x_min = x_min;
    g.z_min = z_min;
    g.dx = dx;
    g.dz = dz;
    g.nx = static_cast<std::size_t>(std::llround((x_max - x_min) / dx)) + 1;
    g.nz = static_cast<std::size_t>(std::llround((z_max - z_min) / dz)) + 1;
    // Maxima snap to the last node so that x(nx - 1) == x_max.
    g.x_max = g.x(g.nx - 1);
    g.z_max = g.z(g.nz - 1);
    return g;
}

double plan_angle_spacing(const ProbeConfig& probe) {
    probe.validate();
    return std::asin(probe.center_wavelength() / probe.aperture);
}

SteeringSequence plan_sequence(const ProbeConfig& probe, int n_angles, double prf) {
    require(n_angles >= 1 && n_angles % 2 == 1, "plan_sequence: n_angles must be odd and >= 1");
    require(prf > 0, "plan_sequence: prf must be positive");
    const double spacing = n_angles > 1 ? plan_angle_spacing(probe) : 0.0;
    const int m = (n_angles - 1) / 2;
    SteeringSequence seq;
    seq.prf = prf;
    seq.angles.reserve(static_cast<std::size_t>(n_angles));
    for (int n = m; n >= 1; --n) {
        seq.angles.push_back(-n * spacing);
        seq.angles.push_back(n * spacing);
    }
    seq.angles.push_back(0.0);
    return seq;
}

int reference_angle_count(const ProbeConfig& probe, double f_number) {
    require(f_number > 0, "reference_angle_count: f_number must be positive");
    const double raw = probe.aperture / (probe.center_wavelength() * f_number);
    long n = std::lround(raw);
    if (n < 1) n = 1;
    if (n % 2 == 0) ++n;
    return static_cast<int>(n);
}

ImageGrid make_image_grid(const ProbeConfig& probe, std::pair<double, double> depth_range,
                          double axial_fraction, double lateral_fraction) {
    require(axial_fraction > 0 && lateral_fraction > 0,
            "make_image_grid: grid fractions must be positive");
    require(depth_range.first > 0 && depth_range.second >= depth_range.first,
            "make_image_grid: depth range must be positive and increasing");
    const double lambda = probe.wavelength();
    ImageGrid g;
    g.dx = lambda * lateral_fraction;
    g.dz = lambda * axial_fraction;
    g.nx = count_nodes(probe.aperture, g.dx);
    g.nz = count_nodes(depth_range.second - depth_range.first, g.dz);

    const double width = static_cast<double>(g.nx - 1) * g.dx;
    g.x_min = -0.5 * width;
    g.x_max = 0.5 * width;
    const double height = static_cast<double>(g.nz - 1) * g.dz;
    const double z_mid = 0.5 * (depth_range.first + depth_range.second);
    g.z_min = z_mid - 0.5 * height;
    g.z_max = z_mid + 0.5 * height;
    return g;
}

// ---------------------------------------------------------------------------

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, cfg.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw std::runtime_error(std::string("config parse error: ") + e.what());
    }
    return cfg;
}

bool Config::has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

double Config::get_double(const std::string& key, double fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    try {
        return std::stod(*v);
    } catch (const std::exception&) {
        throw std::runtime_error("config: '" + key + "' is not a number: " + *v);
    }
}

int Config::get_int(const std::string& key, int fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    try {
        return std::stoi(*v);
    } catch (const std::exception&) {
        throw std::runtime_error("config: '" + key + "' is not an integer: " + *v);
    }
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    return v ? boost::algorithm::trim_copy(*v) : fallback;
}

std::vector<std::string> Config::get_strings(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    std::vector<std::string> parts;
    boost::algorithm::split(parts, *v, boost::is_any_of(", "), boost::token_compress_on);
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& s : get_strings(key, {})) {
        try {
            out.push_back(std::stod(s));
        } catch (const std::exception&) {
            throw std::runtime_error("config: '" + key + "' has a non-numeric entry: " + s);
        }
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

std::string Config::to_string() const {
    std::ostringstream out;
    boost::property_tree::ini_parser::write_ini(out, tree_);
    return out.str();
}

ProbeConfig probe_from_config(const Config& cfg) {
    ProbeConfig p;
    p.element_count = cfg.get_int("probe.element_count", p.element_count);
    p.pitch = cfg.get_double("probe.pitch", p.pitch);
    p.element_width = cfg.get_double("probe.element_width", p.element_width);
    p.aperture = cfg.get_double("probe.aperture", p.aperture);
    p.center_frequency = cfg.get_double("probe.center_frequency", p.center_frequency);
    p.transmit_frequency = cfg.get_double("probe.transmit_frequency", p.transmit_frequency);
    p.sampling_frequency = cfg.get_double("probe.sampling_frequency", p.sampling_frequency);
    p.sound_speed = cfg.get_double("probe.sound_speed", p.sound_speed);
    p.elevation_focus = cfg.get_double("probe.elevation_focus", p.elevation_focus);
    p.fractional_bandwidth = cfg.get_double("probe.fractional_bandwidth", p.fractional_bandwidth);
    p.validate();
    return p;
}

GridSettings grid_settings_from_config(const Config& cfg) {
    GridSettings g;
    g.depth_min = cfg.get_double("grid.depth_min", g.depth_min);
    g.depth_max = cfg.get_double("grid.depth_max", g.depth_max);
    g.axial_fraction = cfg.get_double("grid.axial_fraction", g.axial_fraction);
    g.lateral_fraction = cfg.get_double("grid.lateral_fraction", g.lateral_fraction);
    return g;
}

}  // namespace pwtrack
