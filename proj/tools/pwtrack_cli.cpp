#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pwtrack/beamform.hpp"
#include "pwtrack/config.hpp"
#include "pwtrack/experiment.hpp"
#include "pwtrack/io.hpp"
#include "pwtrack/metrics.hpp"
#include "pwtrack/phantom.hpp"
#include "pwtrack/simulate.hpp"
#include "pwtrack/tracking.hpp"

namespace fs = std::filesystem;
using namespace pwtrack;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    std::string config;
    bool deterministic = false;
    std::string enhancer;
    bool seed_given = false;
};

Config load_config(const Globals& g) { return g.config.empty() ? Config{} : Config::load(g.config); }

ExperimentSpec spec_from(const Globals& g) {
    ExperimentSpec spec = ExperimentSpec::from_config(load_config(g));
    if (g.seed_given) spec.seed = g.seed;
    spec.deterministic = g.deterministic;
    if (!g.enhancer.empty()) spec.enhancer = EnhancerHook::external(g.enhancer);
    return spec;
}

TrackingParams tracking_params(const std::string& which, const Globals& g) {
    if (which == "standard") return TrackingParams::standard();
    if (which == "config") return ExperimentSpec::from_config(load_config(g)).tracking;
    throw CLI::ValidationError("--params", "expected 'standard' or 'config'");
}

std::string frame_id(const fs::path& p) { return p.filename().string(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Plane-wave speckle tracking: simulation, beamforming, tracking and evaluation"};
    app.require_subcommand(1);
    Globals g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
    app.add_flag("--deterministic", g.deterministic, "Omit run-dependent data (timings) from outputs");
    app.add_option("--enhancer", g.enhancer, "External enhancer command: <cmd> <input.iq> <output.iq>");

    // phantom
    auto* ph_cmd = app.add_subcommand("phantom", "Build the rotating four-cylinder phantom");
    std::string ph_out;
    std::string ph_method = "das_1";
    std::string ph_regime = "small";
    ph_cmd->add_option("-o,--out", ph_out, "Output phantom file")->required();
    ph_cmd->add_option("--method", ph_method, "Sets the frame interval (das_<n>)");
    ph_cmd->add_option("--regime", ph_regime, "Regime name from the configuration");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate channel data for a steered sequence");
    std::string sim_phantom, sim_dir;
    int sim_angles = 1, sim_frames = 2;
    sim_cmd->add_option("phantom", sim_phantom, "Phantom file")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("-o,--out-dir", sim_dir, "Output directory")->required();
    sim_cmd->add_option("--angles", sim_angles, "Steered angles per frame (odd)");
    sim_cmd->add_option("--frames", sim_frames, "Consecutive frames to simulate")->check(CLI::PositiveNumber);

    // beamform
    auto* bf_cmd = app.add_subcommand("beamform", "Reconstruct IQ images from channel data");
    std::vector<std::string> bf_inputs;
    std::string bf_out, bf_envelope;
    bool bf_compound = false;
    bf_cmd->add_option("inputs", bf_inputs, "Channel data files")->required()->check(CLI::ExistingFile);
    bf_cmd->add_option("-o,--out", bf_out, "Output IQ file (or prefix without --compound)")->required();
    bf_cmd->add_flag("--compound", bf_compound, "Average all inputs into one image");
    bf_cmd->add_option("--envelope", bf_envelope, "Also write the tracking-grid envelope");

    // track
    auto* tr_cmd = app.add_subcommand("track", "Estimate the displacement between two envelope frames");
    std::string tr_a, tr_b, tr_out, tr_tsv, tr_params = "standard";
    tr_cmd->add_option("frame_a", tr_a, "First envelope")->required()->check(CLI::ExistingFile);
    tr_cmd->add_option("frame_b", tr_b, "Second envelope")->required()->check(CLI::ExistingFile);
    tr_cmd->add_option("--params", tr_params, "standard or config");
    tr_cmd->add_option("-o,--out", tr_out, "Output field file")->required();
    tr_cmd->add_option("--tsv", tr_tsv, "Also export the field as text");

    // metrics
    auto* me_cmd = app.add_subcommand("metrics", "Evaluate fields against the analytic rotation");
    std::vector<std::string> me_fields;
    double me_omega = 0, me_interval = 0;
    me_cmd->add_option("fields", me_fields, "Field files, one per realization")->required()->check(CLI::ExistingFile);
    me_cmd->add_option("--angular-velocity", me_omega, "rad/s")->required();
    me_cmd->add_option("--frame-interval", me_interval, "s")->required();

    // experiment
    auto* ex_cmd = app.add_subcommand("experiment", "Run the rotating-phantom experiment matrix");
    int ex_realizations = 0;
    std::string ex_out;
    std::vector<std::string> ex_methods;
    ex_cmd->add_option("--realizations", ex_realizations, "Override the realization count");
    ex_cmd->add_option("-o,--output", ex_out, "Output directory");
    ex_cmd->add_option("--methods", ex_methods, "Override the method list");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    g.seed_given = seed_opt->count() > 0;

    try {
        if (*ph_cmd) {
            ExperimentSpec spec = spec_from(g);
            const Method m = Method::parse(ph_method);
            const Regime* regime = nullptr;
            for (const auto& r : spec.regimes)
                if (r.name == ph_regime) regime = &r;
            if (!regime) throw std::invalid_argument("unknown regime '" + ph_regime + "'");
            const auto seq = plan_sequence(spec.probe, m.n_angles, spec.prf);
            const double omega =
                angular_velocity_for(regime->max_displacement, spec.reference_radius(), seq.frame_interval());
            const auto ph = build_rotating_cylinder_phantom(spec.probe, spec.geometry, omega, spec.seed);
            io::write_phantom(ph_out, ph);
            std::cout << ph.scatterers.size() << " scatterers, angular velocity " << omega << " rad/s\n";
        } else if (*sim_cmd) {
            const ExperimentSpec spec = spec_from(g);
            const auto start = io::read_phantom(sim_phantom);
            const auto seq = plan_sequence(spec.probe, sim_angles, spec.prf);
            const PulseModel pulse = PulseModel::from_probe(spec.probe);
            fs::create_directories(sim_dir);
            for (int f = 0; f < sim_frames; ++f)
                for (std::size_t i = 0; i < seq.size(); ++i) {
                    const std::size_t k = static_cast<std::size_t>(f) * seq.size() + i;
                    const auto ph = advance_motion(start, static_cast<double>(k) / spec.prf);
                    const auto window = covering_time_window(ph, spec.probe, seq.angles[i], pulse);
                    const auto data = simulate_channel_data(ph, spec.probe, seq.angles[i], pulse, window);
                    char name[64];
                    std::snprintf(name, sizeof name, "f%03d_tx%03zu.chd", f, i);
                    io::write_channel_data(fs::path(sim_dir) / name, data);
                }
            std::cout << sim_frames * static_cast<int>(seq.size()) << " transmits written to " << sim_dir << '\n';
        } else if (*bf_cmd) {
            const ExperimentSpec spec = spec_from(g);
            const ImageGrid grid = make_image_grid(spec.probe, {spec.grid.depth_min, spec.grid.depth_max},
                                                   spec.grid.axial_fraction, spec.grid.lateral_fraction);
            const EnhancerHook hook = spec.enhancer ? *spec.enhancer : EnhancerHook::identity();
            std::vector<IQImage> images;
            for (const auto& in : bf_inputs) images.push_back(das_reconstruct(io::read_channel_data(in), spec.probe, grid));
            auto emit = [&](const IQImage& img, const fs::path& path, const fs::path& env_path) {
                const IQImage out = enhance(img, hook);
                io::write_iq_image(path, out);
                if (!env_path.empty()) io::write_envelope_image(env_path, envelope_on_tracking_grid(out));
            };
            if (bf_compound) {
                emit(compound(images), bf_out, bf_envelope);
            } else {
                for (std::size_t i = 0; i < images.size(); ++i) {
                    const std::string stem = fs::path(bf_inputs[i]).stem().string();
                    emit(images[i], bf_out + stem + ".iq", bf_envelope.empty() ? "" : bf_envelope + stem + ".env");
                }
            }
        } else if (*tr_cmd) {
            const auto a = io::read_envelope_image(tr_a);
            const auto b = io::read_envelope_image(tr_b);
            auto field = track(a, b, tracking_params(tr_params, g));
            field.frame_a = frame_id(tr_a);
            field.frame_b = frame_id(tr_b);
            io::write_field(tr_out, field);
            if (!tr_tsv.empty()) io::write_field_tsv(tr_tsv, field);
            std::cout << field.rows() << " x " << field.cols() << " window centers, " << field.valid_count()
                      << " valid\n";
        } else if (*me_cmd) {
            const ExperimentSpec spec = spec_from(g);
            const auto& cyl = spec.geometry.cylinders;
            std::vector<std::vector<RepeMap>> maps(cyl.size());
            std::vector<double> sums(cyl.size(), 0.0);
            std::vector<std::size_t> counts(cyl.size(), 0);
            for (const auto& path : me_fields) {
                const auto field = io::read_field(path);
                for (std::size_t z = 0; z < cyl.size(); ++z) {
                    const auto truth = analytic_rotation_field({cyl[z].center_x, cyl[z].center_z}, me_omega,
                                                               me_interval, field.centers_x, field.centers_z);
                    const auto mask = zone_mask(field.centers_x, field.centers_z, cyl[z], spec.inner_margin,
                                                spec.outer_margin);
                    auto m = repe_map(field, truth, mask);
                    for (std::size_t i = 0; i < m.values.size(); ++i)
                        if (m.mask.data()[i]) {
                            sums[z] += m.values.data()[i];
                            ++counts[z];
                        }
                    maps[z].push_back(std::move(m));
                }
            }
            std::cout << "zone\tmrepe_percent\trve_percent\tn_valid\n";
            for (std::size_t z = 0; z < cyl.size(); ++z) {
                if (counts[z] == 0) {
                    std::cout << char('A' + z) << "\tnan\tnan\t0\n";
                    continue;
                }
                const double mr = 100.0 * sums[z] / static_cast<double>(counts[z]);
                const double rv = 100.0 * rve(average_repe_maps(maps[z]));
                std::printf("%c\t%.2f\t%.2f\t%zu\n", static_cast<char>('A' + z), mr, rv, counts[z]);
            }
        } else if (*ex_cmd) {
            ExperimentSpec spec = spec_from(g);
            if (ex_realizations > 0) spec.realizations = ex_realizations;
            if (!ex_out.empty()) spec.output_dir = ex_out;
            if (!ex_methods.empty()) {
                spec.methods.clear();
                for (const auto& m : ex_methods) spec.methods.push_back(Method::parse(m));
            }
            const auto report = run_experiment(spec);
            std::cout << "zone\tmethod\tregime\tmrepe_percent\trve_percent\tn_valid\n";
            for (const auto& r : report.rows)
                std::printf("%s\t%s\t%s\t%.2f\t%.2f\t%zu\n", r.zone.c_str(), r.method.c_str(), r.regime.c_str(),
                            100 * r.mrepe, 100 * r.rve, r.n_valid);
            std::cout << report.completed << "/" << report.requested << " realizations completed\n";
            return report.completed == report.requested ? 0 : 1;
        }
    } catch (const io::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
