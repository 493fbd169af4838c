#pragma once

#include <utility>
#include <vector>

#include "pwtrack/array2d.hpp"
#include "pwtrack/config.hpp"
#include "pwtrack/phantom.hpp"

namespace pwtrack {

/// Raw echoes of one transmit: samples(t, e) for time index t and element e.
struct ChannelData {
    Array2D<double> samples;  // [n_time x n_elements], time-major
    double t0 = 0;            // time of the first sample (s)
    double fs = 0;            // sampling frequency (Hz)
    double tx_angle = 0;      // steering angle (rad)

    std::size_t n_time() const { return samples.rows(); }
    std::size_t n_elements() const { return samples.cols(); }
};

/// Gaussian-modulated sine excitation. The pulse-echo response used by the simulator is the
/// autoconvolution of the one-way pulse.
class PulseModel {
public:
    PulseModel(double center_frequency, double fractional_bandwidth);
    static PulseModel from_probe(const ProbeConfig& probe);

    double center_frequency() const { return f0_; }
    double fractional_bandwidth() const { return bandwidth_; }
    /// Standard deviation of the one-way Gaussian envelope (s).
    double sigma() const { return sigma_; }

    double one_way(double t) const;
    /// Pulse-echo response, normalized to 1 at t = 0. Zero outside [-half_length, half_length].
    double two_way(double t) const;
    double half_length() const { return half_length_; }


private:
    double f0_;
    double bandwidth_;
    double sigma_;
    double half_length_;
    std::vector<double> fine_;  // two-way response on a fine grid starting at -half_length_
    double fine_step_;
};

struct SimulationOptions {
    bool element_directivity = true;
    bool spherical_spreading = true;
};

/// Earliest and latest echo arrival for `phantom` and steering angle, padded by the pulse.
std::pair<double, double> covering_time_window(const ScattererPhantom& phantom,
                                               const ProbeConfig& probe, double tx_angle,
                                               const PulseModel& pulse);

/// Far-field plane-wave transmit, point-receiver element echoes. Each scatterer contributes the
/// pulse-echo waveform delayed by (z cos b + x sin b)/c + |p - p_e|/c and weighted by element
/// directivity and 1/r spreading. Echoes falling outside `time_window` are truncated.
/// Parallel over elements; each element column is accumulated in scatterer order, so the
/// result does not depend on the thread count.
ChannelData simulate_channel_data(const ScattererPhantom& phantom, const ProbeConfig& probe,
                                  double tx_angle, const PulseModel& pulse,
                                  std::pair<double, double> time_window,
                                  const SimulationOptions& options = {});

}  // namespace pwtrack
