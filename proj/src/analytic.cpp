#include "pwtrack/analytic.hpp"

#include <stdexcept>

#include "pwtrack/fft.hpp"

namespace pwtrack {

AnalyticChannelData to_analytic(const ChannelData& data) {
    const std::size_t n = data.n_time();
    if (n < 8) throw std::invalid_argument("to_analytic: need at least 8 time samples");

    AnalyticChannelData out;
    out.t0 = data.t0;
    out.fs = data.fs;
    out.tx_angle = data.tx_angle;
    out.samples = Array2D<std::complex<double>>(n, data.n_elements());

    fft::ComplexFft1D plan(n);
    auto buf = plan.data();
    const std::size_t half = n / 2;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t e = 0; e < data.n_elements(); ++e) {
        for (std::size_t t = 0; t < n; ++t) buf[t] = data.samples(t, e);
        plan.forward();
        // Bins 1 .. ceil(n/2)-1 are doubled; the Nyquist bin (even n) and DC stay single.
        for (std::size_t k = 1; k < n; ++k) {
            if (k < half || (k == half && n % 2 == 1))
                buf[k] *= 2.0;
            else if (k > half)
                buf[k] = 0.0;
        }
        plan.backward();
        for (std::size_t t = 0; t < n; ++t) out.samples(t, e) = buf[t] * inv_n;
    }
    return out;
}

}  // namespace pwtrack
