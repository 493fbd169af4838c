#include "pwtrack/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pwtrack {

namespace {

double sinc(double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x; }

}  // namespace

PulseModel::PulseModel(double center_frequency, double fractional_bandwidth)
    : f0_(center_frequency), bandwidth_(fractional_bandwidth) {
    if (!(f0_ > 0) || !(bandwidth_ > 0))
        throw std::invalid_argument("pulse: frequency and bandwidth must be positive");
    // -6 dB spectral full width B f0 of a Gaussian spectrum with std sf: B f0 = 2 sf sqrt(2 ln 2).
    const double spectral_sigma = bandwidth_ * f0_ / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    sigma_ = 1.0 / (2.0 * kPi * spectral_sigma);
    // The two-way envelope exp(-t^2 / 4 sigma^2) is below 1e-4 beyond this.
    half_length_ = 2.0 * sigma_ * std::sqrt(std::log(1e4));
    fine_step_ = 1.0 / (256.0 * f0_);

    const double one_way_extent = half_length_ + 4.0 * fine_step_;
    const long m = static_cast<long>(std::ceil(one_way_extent / fine_step_));
    std::vector<double> p(static_cast<std::size_t>(2 * m + 1));
    for (long i = -m; i <= m; ++i) p[static_cast<std::size_t>(i + m)] = one_way(i * fine_step_);

    const long h = static_cast<long>(std::ceil(half_length_ / fine_step_));
    fine_.assign(static_cast<std::size_t>(2 * h + 1), 0.0);
    for (long k = -h; k <= h; ++k) {
        // (p * p)(k) = sum_i p(i) p(k - i)
        double acc = 0;
        const long lo = std::max(-m, k - m), hi = std::min(m, k + m);
        for (long i = lo; i <= hi; ++i)
            acc += p[static_cast<std::size_t>(i + m)] * p[static_cast<std::size_t>(k - i + m)];
        fine_[static_cast<std::size_t>(k + h)] = acc;
    }
    // Sign and scale so that the echo of a positive reflector peaks at +1 on its arrival time.
    const double peak = fine_[static_cast<std::size_t>(h)];
    for (auto& v : fine_) v /= peak;
    half_length_ = static_cast<double>(h) * fine_step_;
}

PulseModel PulseModel::from_probe(const ProbeConfig& probe) {
    return PulseModel(probe.transmit_frequency, probe.fractional_bandwidth);
}

double PulseModel::one_way(double t) const {
    return std::exp(-t * t / (2.0 * sigma_ * sigma_)) * std::sin(2.0 * kPi * f0_ * t);
}

double PulseModel::two_way(double t) const {
    const double f = (t + half_length_) / fine_step_;
    if (f < 0 || f > static_cast<double>(fine_.size() - 1)) return 0.0;
    const auto i = static_cast<std::size_t>(f);
    if (i + 1 >= fine_.size()) return fine_.back();
    const double a = f - static_cast<double>(i);
    return (1.0 - a) * fine_[i] + a * fine_[i + 1];
}

std::pair<double, double> covering_time_window(const ScattererPhantom& phantom,
                                               const ProbeConfig& probe, double tx_angle,
                                               const PulseModel& pulse) {
    if (phantom.scatterers.empty()) throw std::invalid_argument("phantom is empty");
    const double c = probe.sound_speed;
    const double cb = std::cos(tx_angle), sb = std::sin(tx_angle);
    const double x_lo = probe.element_x(0), x_hi = probe.element_x(probe.element_count - 1);
    double t_min = std::numeric_limits<double>::infinity();
    double t_max = -t_min;
    for (const auto& s : phantom.scatterers) {
        const double tx = (s.z * cb + s.x * sb) / c;
        const double yz2 = s.y * s.y + s.z * s.z;
        const double near = s.x - std::clamp(s.x, x_lo, x_hi);
        const double far = std::max(std::abs(s.x - x_lo), std::abs(s.x - x_hi));
        t_min = std::min(t_min, tx + std::sqrt(near * near + yz2) / c);
        t_max = std::max(t_max, tx + std::sqrt(far * far + yz2) / c);
    }
    return {t_min - pulse.half_length(), t_max + pulse.half_length()};
}

ChannelData simulate_channel_data(const ScattererPhantom& phantom, const ProbeConfig& probe,
                                  double tx_angle, const PulseModel& pulse,
                                  std::pair<double, double> time_window,
                                  const SimulationOptions& options) {
    probe.validate();
    if (phantom.scatterers.empty()) throw std::invalid_argument("simulate: phantom is empty");
    for (const auto& s : phantom.scatterers) {
        if (!std::isfinite(s.amplitude)) throw std::invalid_argument("simulate: non-finite amplitude");
        if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z))
            throw std::invalid_argument("simulate: non-finite scatterer position");
    }
    if (!(time_window.second >= time_window.first))
        throw std::invalid_argument("simulate: empty time window");

    const double fs = probe.sampling_frequency;
    const double c = probe.sound_speed;
    const double lambda = probe.wavelength();
    const double cb = std::cos(tx_angle), sb = std::sin(tx_angle);
    const auto n_time = static_cast<std::size_t>(std::floor((time_window.second - time_window.first) * fs)) + 1;
    const auto n_el = static_cast<std::size_t>(probe.element_count);

    // Echoes are deposited as linearly split impulses on a grid oversampled by kOversampling
    // and then convolved once per element with the tabulated pulse-echo response.
    constexpr long kOversampling = 32;
    const double fine_fs = fs * static_cast<double>(kOversampling);
    const auto taps = static_cast<long>(std::floor(pulse.half_length() * fine_fs));
    std::vector<double> kernel(static_cast<std::size_t>(2 * taps + 1));
    for (long d = -taps; d <= taps; ++d)
        kernel[static_cast<std::size_t>(d + taps)] = pulse.two_way(static_cast<double>(d) / fine_fs);
    const long pad = taps + 2;

    // Element directivity tabulated over sin(theta) in [-1, 1].
    constexpr int kDirectivityTable = 4096;
    std::vector<double> directivity(kDirectivityTable + 2);
    for (int i = 0; i <= kDirectivityTable + 1; ++i) {
        const double st = -1.0 + 2.0 * i / kDirectivityTable;
        directivity[static_cast<std::size_t>(i)] = sinc(kPi * probe.element_width * st / lambda);
    }
    const double dir_scale = 0.5 * kDirectivityTable;
    const long n_fine = static_cast<long>(n_time - 1) * kOversampling + 2 * pad + 1;

    ChannelData out;
    out.t0 = time_window.first;
    out.fs = fs;
    out.tx_angle = tx_angle;
    out.samples = Array2D<double>(n_time, n_el, 0.0);

    // Transmit delays do not depend on the element.
    std::vector<double> tx_pos(phantom.scatterers.size());
    for (std::size_t i = 0; i < phantom.scatterers.size(); ++i) {
        const auto& s = phantom.scatterers[i];
        tx_pos[i] = ((s.z * cb + s.x * sb) / c - out.t0) * fs;
    }

#pragma omp parallel
    {
        std::vector<double> impulses(static_cast<std::size_t>(n_fine));
#pragma omp for schedule(static)
        for (long e = 0; e < static_cast<long>(n_el); ++e) {
            std::fill(impulses.begin(), impulses.end(), 0.0);
            const double xe = probe.element_x(static_cast<int>(e));
            for (std::size_t i = 0; i < phantom.scatterers.size(); ++i) {
                const auto& s = phantom.scatterers[i];
                const double dx = s.x - xe;
                const double r = std::sqrt(dx * dx + s.y * s.y + s.z * s.z);
                // Echo center on the fine grid, shifted so that sample 0 sits at index pad.
                const double q = (tx_pos[i] + r / c * fs) * static_cast<double>(kOversampling) + static_cast<double>(pad);
                if (q < 0 || q >= static_cast<double>(n_fine - 1)) continue;
                double w = s.amplitude;
                const double inv_r = 1.0 / r;
                if (options.element_directivity) {
                    const double u = (dx * inv_r + 1.0) * dir_scale;
                    const auto iu = static_cast<std::size_t>(u);
                    const double fu = u - static_cast<double>(iu);
                    w *= (1.0 - fu) * directivity[iu] + fu * directivity[iu + 1];
                }
                if (options.spherical_spreading) w *= inv_r;
                const auto j = static_cast<std::size_t>(q);
                const double a = q - static_cast<double>(j);
                impulses[j] += w * (1.0 - a);
                impulses[j + 1] += w * a;
            }
            for (std::size_t t = 0; t < n_time; ++t) {
                const long center = static_cast<long>(t) * kOversampling + pad;
                const double* imp = impulses.data() + (center - taps);
                // sample(t) = sum_q impulses[q] kernel(center - q)
                double acc = 0;
                for (long d = 0; d <= 2 * taps; ++d) acc += imp[d] * kernel[static_cast<std::size_t>(2 * taps - d)];
                out.samples(t, static_cast<std::size_t>(e)) = acc;
            }
        }
    }
    return out;
}

}  // namespace pwtrack
