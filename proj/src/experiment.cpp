#include "pwtrack/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"

#include "pwtrack/io.hpp"
#include "pwtrack/metrics.hpp"
#include "pwtrack/simulate.hpp"

namespace pwtrack {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string zone_name(std::size_t g) {
    return g < 26 ? std::string(1, static_cast<char>('A' + g)) : "Z" + std::to_string(g);
}

std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

Regime parse_regime(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos || colon == 0)
        throw std::invalid_argument("regime must be name:max_displacement, got '" + text + "'");
    Regime r;
    r.name = text.substr(0, colon);
    try {
        r.max_displacement = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("regime displacement is not a number: '" + text + "'");
    }
    return r;
}

}  // namespace

std::string Method::name() const {
    return kind == Kind::das ? "das_" + std::to_string(n_angles) : "enhanced_single_pw";
}

Method Method::parse(const std::string& text) {
    if (text == "enhanced_single_pw") return {Kind::enhanced_single_pw, 1};
    if (text.rfind("das_", 0) == 0) {
        std::size_t used = 0;
        int n = 0;
        try {
            n = std::stoi(text.substr(4), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == text.size() - 4 && n >= 1 && n % 2 == 1) return {Kind::das, n};
    }
    throw std::invalid_argument("unknown method '" + text + "' (expected das_<odd n> or enhanced_single_pw)");
}

const SummaryRow* ExperimentReport::find(const std::string& zone, const std::string& method,
                                         const std::string& regime) const {
    for (const auto& r : rows)
        if (r.zone == zone && r.method == method && r.regime == regime) return &r;
    return nullptr;
}

double ExperimentSpec::reference_radius() const {
    if (geometry.cylinders.empty()) throw std::invalid_argument("experiment: no cylinders");
    return geometry.cylinders.front().radius - outer_margin;
}

ExperimentSpec ExperimentSpec::desk() {
    ExperimentSpec s;
    s.methods = {Method::parse("das_1"), Method::parse("das_3"), Method::parse("das_9"), Method::parse("das_15")};
    s.regimes = {{"small", 60e-6}, {"large", 600e-6}};
    return s;
}

ExperimentSpec ExperimentSpec::from_config(const Config& cfg) {
    ExperimentSpec s = desk();
    s.probe = probe_from_config(cfg);
    s.grid = grid_settings_from_config(cfg);
    s.prf = cfg.get_double("sequence.prf", s.prf);

    PhantomGeometry& g = s.geometry;
    g.density = cfg.get_double("phantom.density", g.density);
    g.elevation_cell = cfg.get_double("phantom.elevation_cell", g.elevation_cell);
    if (cfg.has("phantom.cell_volume")) g.cell_volume = cfg.get_double("phantom.cell_volume", 0);
    const auto dist = cfg.get_string("phantom.distribution", "normal");
    if (dist == "normal")
        g.distribution = AmplitudeDistribution::normal;
    else if (dist == "constant_magnitude")
        g.distribution = AmplitudeDistribution::constant_magnitude;
    else
        throw std::invalid_argument("phantom.distribution must be normal or constant_magnitude");
    const double radius = cfg.get_double("phantom.radius", g.cylinders.front().radius);
    const double height = cfg.get_double("phantom.height", g.cylinders.front().height);
    if (cfg.has("phantom.cylinders")) {
        const auto v = cfg.get_list("phantom.cylinders", {});
        if (v.empty() || v.size() % 3 != 0)
            throw std::invalid_argument("phantom.cylinders takes triples: x z amplitude_db");
        g.cylinders.clear();
        for (std::size_t i = 0; i < v.size(); i += 3) g.cylinders.push_back({v[i], v[i + 1], radius, height, v[i + 2]});
    }
    for (auto& c : g.cylinders) {
        c.radius = radius;
        c.height = height;
    }

    TrackingParams& t = s.tracking;
    t.window_sizes = cfg.get_list("tracking.window_sizes", t.window_sizes);
    t.overlap = cfg.get_double("tracking.overlap", t.overlap);
    for (double m : cfg.get_list("tracking.search_margin", {})) t.search_margin.push_back(static_cast<int>(m));
    t.smooth_every_pass = cfg.get_int("tracking.smooth_every_pass", t.smooth_every_pass ? 1 : 0) != 0;

    if (cfg.has("experiment.methods")) {
        s.methods.clear();
        for (const auto& m : cfg.get_strings("experiment.methods", {})) s.methods.push_back(Method::parse(m));
    }
    if (cfg.has("experiment.regimes")) {
        s.regimes.clear();
        for (const auto& r : cfg.get_strings("experiment.regimes", {})) s.regimes.push_back(parse_regime(r));
    }
    s.realizations = cfg.get_int("experiment.realizations", s.realizations);
    s.seed = static_cast<std::uint64_t>(std::stoull(cfg.get_string("experiment.seed", std::to_string(s.seed))));
    s.inner_margin = cfg.get_double("experiment.inner_margin", s.inner_margin);
    s.outer_margin = cfg.get_double("experiment.outer_margin", s.outer_margin);
    s.output_dir = cfg.get_string("experiment.output_dir", s.output_dir.string());
    s.write_fields = cfg.get_int("experiment.write_fields", s.write_fields ? 1 : 0) != 0;
    return s;
}

void ExperimentSpec::validate() const {
    probe.validate();
    tracking.validate();
    if (methods.empty()) throw std::invalid_argument("experiment: no methods");
    if (regimes.empty()) throw std::invalid_argument("experiment: no regimes");
    if (realizations < 1) throw std::invalid_argument("experiment: realizations must be at least 1");
    if (!(prf > 0)) throw std::invalid_argument("experiment: prf must be positive");
    if (geometry.cylinders.empty()) throw std::invalid_argument("experiment: no cylinders");
    for (const auto& r : regimes)
        if (!(r.max_displacement > 0)) throw std::invalid_argument("experiment: regime displacement must be positive");
    for (const auto& m : methods)
        if (m.kind == Method::Kind::enhanced_single_pw && !enhancer)
            throw std::invalid_argument("experiment: enhanced_single_pw needs an enhancer command");
    if (!(reference_radius() > 0)) throw std::invalid_argument("experiment: outer margin exceeds the radius");
}

FramePair acquire_frame_pair(const ExperimentSpec& spec, const Method& method, const Regime& regime,
                             std::uint64_t seed) {
    const SteeringSequence seq = plan_sequence(spec.probe, method.n_angles, spec.prf);
    FramePair out;
    out.frame_interval = seq.frame_interval();
    out.angular_velocity = angular_velocity_for(regime.max_displacement, spec.reference_radius(), out.frame_interval);

    const ScattererPhantom start =
        build_rotating_cylinder_phantom(spec.probe, spec.geometry, out.angular_velocity, seed);
    const ImageGrid grid = make_image_grid(spec.probe, {spec.grid.depth_min, spec.grid.depth_max},
                                           spec.grid.axial_fraction, spec.grid.lateral_fraction);
    const PulseModel pulse = PulseModel::from_probe(spec.probe);
    const std::size_t n = seq.size();

    for (int f = 0; f < 2; ++f) {
        std::vector<IQImage> images;
        images.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = static_cast<std::size_t>(f) * n + i;
            const ScattererPhantom ph = advance_motion(start, static_cast<double>(k) / spec.prf);
            const double angle = seq.angles[i];
            const auto window = covering_time_window(ph, spec.probe, angle, pulse);
            const ChannelData data = simulate_channel_data(ph, spec.probe, angle, pulse, window);
            images.push_back(das_reconstruct(data, spec.probe, grid));
        }
        IQImage frame = compound(images);
        if (method.kind == Method::Kind::enhanced_single_pw) frame = enhance(frame, *spec.enhancer);
        (f == 0 ? out.a : out.b) = envelope_on_tracking_grid(frame);
    }
    return out;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto started = std::chrono::steady_clock::now();
    fs::create_directories(spec.output_dir);
    if (spec.write_fields) {
        fs::create_directories(spec.output_dir / "fields");
        fs::create_directories(spec.output_dir / "maps");
    }

    ExperimentReport report;
    const std::size_t n_zones = spec.geometry.cylinders.size();
    std::vector<RotationCenter> centers;
    for (const auto& c : spec.geometry.cylinders) centers.push_back({c.center_x, c.center_z});

    for (const auto& regime : spec.regimes) {
        for (const auto& method : spec.methods) {
            std::vector<std::vector<RepeMap>> maps(n_zones);
            std::vector<double> sums(n_zones, 0.0);
            std::vector<std::size_t> counts(n_zones, 0);
            std::vector<double> cx, cz;
            ImageGrid image_grid;

            for (int r = 0; r < spec.realizations; ++r) {
                ++report.requested;
                const std::string tag = method.name() + "_" + regime.name + "_r" + std::to_string(r);
                try {
                    const auto seed = spec.seed + static_cast<std::uint64_t>(r);
                    const FramePair frames = acquire_frame_pair(spec, method, regime, seed);
                    DisplacementField field = track(frames.a, frames.b, spec.tracking);
                    field.frame_a = tag + "_frame0";
                    field.frame_b = tag + "_frame1";
                    if (spec.write_fields) io::write_field(spec.output_dir / "fields" / (tag + ".pwdf"), field);

                    for (std::size_t g = 0; g < n_zones; ++g) {
                        const auto truth = analytic_rotation_field(centers[g], frames.angular_velocity,
                                                                   frames.frame_interval, field.centers_x,
                                                                   field.centers_z);
                        const auto mask = zone_mask(field.centers_x, field.centers_z, spec.geometry.cylinders[g],
                                                    spec.inner_margin, spec.outer_margin);
                        RepeMap m = repe_map(field, truth, mask);
                        for (std::size_t i = 0; i < m.values.size(); ++i)
                            if (m.mask.data()[i]) {
                                sums[g] += m.values.data()[i];
                                ++counts[g];
                            }
                        maps[g].push_back(std::move(m));
                    }
                    cx = field.centers_x;
                    cz = field.centers_z;
                    image_grid = field.image_grid;
                    ++report.completed;
                    std::cerr << "[experiment] " << tag << " done\n";
                } catch (const std::exception& e) {
                    report.failures.push_back(tag + ": " + e.what());
                    std::cerr << "[experiment] " << tag << " failed: " << e.what() << '\n';
                }
            }

            for (std::size_t g = 0; g < n_zones; ++g) {
                SummaryRow row;
                row.zone = zone_name(g);
                row.method = method.name();
                row.regime = regime.name;
                row.realizations = static_cast<int>(maps[g].size());
                row.mrepe = std::numeric_limits<double>::quiet_NaN();
                row.rve = std::numeric_limits<double>::quiet_NaN();
                if (!maps[g].empty() && counts[g] > 0) {
                    const RepeMap avg = average_repe_maps(maps[g]);
                    row.mrepe = sums[g] / static_cast<double>(counts[g]);
                    row.rve = rve(avg);
                    row.n_valid = counts[g];
                    if (spec.write_fields) {
                        DisplacementField out;
                        out.u_x = avg.values;
                        out.u_z = Array2D<double>(avg.values.rows(), avg.values.cols(), 0.0);
                        out.valid = avg.mask;
                        out.centers_x = cx;
                        out.centers_z = cz;
                        out.image_grid = image_grid;
                        out.window_sizes = spec.tracking.window_sizes;
                        out.overlap = spec.tracking.overlap;
                        out.frame_a = "repe_mean";
                        out.frame_b = row.zone + "_" + row.method + "_" + row.regime;
                        io::write_field(spec.output_dir / "maps" / (out.frame_b + ".pwdf"), out);
                    }
                }
                report.rows.push_back(row);
            }
        }
    }

    {
        std::ofstream tsv(spec.output_dir / "summary.tsv", std::ios::trunc);
        tsv << "zone\tmethod\tregime\tmrepe_percent\trve_percent\tn_valid\trealizations\n";
        for (const auto& r : report.rows)
            tsv << r.zone << '\t' << r.method << '\t' << r.regime << '\t' << fixed(100 * r.mrepe, 2) << '\t'
                << fixed(100 * r.rve, 2) << '\t' << r.n_valid << '\t' << r.realizations << '\n';
        if (!tsv) throw std::runtime_error("cannot write summary.tsv");
    }

    json j;
    json rows = json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"zone", r.zone},
                        {"method", r.method},
                        {"regime", r.regime},
                        {"mrepe", std::isfinite(r.mrepe) ? json(r.mrepe) : json(nullptr)},
                        {"rve", std::isfinite(r.rve) ? json(r.rve) : json(nullptr)},
                        {"n_valid", r.n_valid},
                        {"realizations", r.realizations}});
    json methods = json::array(), regimes = json::array();
    for (const auto& m : spec.methods) methods.push_back(m.name());
    for (const auto& r : spec.regimes) regimes.push_back({{"name", r.name}, {"max_displacement", r.max_displacement}});
    j["spec"] = {{"methods", methods},
                 {"regimes", regimes},
                 {"realizations", spec.realizations},
                 {"seed", spec.seed},
                 {"prf", spec.prf},
                 {"density", spec.geometry.density},
                 {"depth_range", {spec.grid.depth_min, spec.grid.depth_max}},
                 {"window_sizes", spec.tracking.window_sizes},
                 {"overlap", spec.tracking.overlap}};
    j["rows"] = rows;
    j["requested"] = report.requested;
    j["completed"] = report.completed;
    j["failures"] = report.failures;
    if (!spec.deterministic)
        j["elapsed_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::ofstream js(spec.output_dir / "summary.json", std::ios::trunc);
    js << j.dump(2) << '\n';
    if (!js) throw std::runtime_error("cannot write summary.json");
    return report;
}

}  // namespace pwtrack
