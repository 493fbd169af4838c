#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pwtrack/beamform.hpp"
#include "pwtrack/config.hpp"
#include "pwtrack/phantom.hpp"
#include "pwtrack/tracking.hpp"

namespace pwtrack {

struct Method {
    enum class Kind { das, enhanced_single_pw };
    Kind kind = Kind::das;
    int n_angles = 1;

    std::string name() const;
    /// "das_<n>" or "enhanced_single_pw".
    static Method parse(const std::string& text);
};

/// Peak inter-frame displacement at the reference radius.
struct Regime {
    std::string name;
    double max_displacement = 0;  // meters
};

struct ExperimentSpec {
    ProbeConfig probe;
    GridSettings grid;
    PhantomGeometry geometry = default_four_cylinder_geometry();
    TrackingParams tracking = TrackingParams::standard();
    std::vector<Method> methods;
    std::vector<Regime> regimes;
    int realizations = 5;
    std::uint64_t seed = 1;
    double prf = 9e3;
    double inner_margin = 0.36e-3;
    double outer_margin = 0.36e-3;
    std::optional<EnhancerHook> enhancer;
    std::filesystem::path output_dir = "experiment_out";
    bool deterministic = false;
    bool write_fields = true;

    /// Radius at which the regime displacement is reached: cylinder radius minus outer margin.
    double reference_radius() const;

    /// Desk defaults: das_1/3/9/15, small (60 um) and large (600 um) regimes, 5 realizations.
    static ExperimentSpec desk();
    /// Overrides from [probe], [sequence], [grid], [phantom], [tracking] and [experiment].
    static ExperimentSpec from_config(const Config& cfg);
    void validate() const;
};

struct SummaryRow {
    std::string zone;
    std::string method;
    std::string regime;
    double mrepe = 0;  // fraction
    double rve = 0;    // fraction
    std::size_t n_valid = 0;
    int realizations = 0;
};

struct ExperimentReport {
    std::vector<SummaryRow> rows;
    int requested = 0;
    int completed = 0;
    std::vector<std::string> failures;

    const SummaryRow* find(const std::string& zone, const std::string& method, const std::string& regime) const;
};

/// Frames of one method: consecutive compounded frames a and b, on the tracking grid.
struct FramePair {
    EnvelopeImage a, b;
    double frame_interval = 0;
    double angular_velocity = 0;
};

/// Simulates 2N transmits of `method` with the phantom rotating between transmits, reconstructs
/// and compounds two consecutive frames, and returns their envelopes on the tracking grid.
FramePair acquire_frame_pair(const ExperimentSpec& spec, const Method& method, const Regime& regime,
                             std::uint64_t seed);

/// Runs methods x regimes x realizations, writes summary.tsv, summary.json, per-realization
/// fields and averaged REPE maps below spec.output_dir. A failing realization is logged to
/// stderr and counted; the others still run.
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace pwtrack
