#include "pwtrack/beamform.hpp"

#include <cmath>
#include <stdexcept>

#include "pwtrack/bspline.hpp"

namespace pwtrack {

namespace {

using cplx = std::complex<double>;

void check_consistent(const AnalyticChannelData& data, const ProbeConfig& probe) {
    if (data.n_elements() != static_cast<std::size_t>(probe.element_count))
        throw std::invalid_argument("das: channel count does not match the probe");
    if (std::abs(data.fs - probe.sampling_frequency) > 1e-6 * probe.sampling_frequency)
        throw std::invalid_argument("das: sampling frequency does not match the probe");
    if (data.n_time() < 4) throw std::invalid_argument("das: too few time samples");
}

}  // namespace

IQImage das_reconstruct(const AnalyticChannelData& data, const ProbeConfig& probe,
                        const ImageGrid& grid, const DasOptions& options) {
    probe.validate();
    grid.validate();
    check_consistent(data, probe);

    const std::size_t n_el = data.n_elements();
    const std::size_t n_t = data.n_time();

    // Spline coefficients, one contiguous row per element.
    Array2D<cplx> coeffs(n_el, n_t);
#pragma omp parallel for schedule(static)
    for (long e = 0; e < static_cast<long>(n_el); ++e) {
        auto row = coeffs.row(static_cast<std::size_t>(e));
        for (std::size_t t = 0; t < n_t; ++t) row[t] = data.samples(t, static_cast<std::size_t>(e));
        bspline::prefilter(row.data(), n_t);
    }

    std::vector<double> xe(n_el);
    for (std::size_t e = 0; e < n_el; ++e) xe[e] = probe.element_x(static_cast<int>(e));

    const double inv_c = 1.0 / probe.sound_speed;
    const double fs = data.fs;
    const double cb = std::cos(data.tx_angle), sb = std::sin(data.tx_angle);
    const double last = static_cast<double>(n_t - 1);
    const auto n_t_signed = static_cast<std::ptrdiff_t>(n_t);
    const bool gated = options.receive_f_number.has_value();
    const double half_over_f = gated ? 0.5 / *options.receive_f_number : 0.0;
    if (gated && !(*options.receive_f_number > 0))
        throw std::invalid_argument("das: receive F-number must be positive");

    IQImage out;
    out.grid = grid;
    out.pixels = Array2D<cplx>(grid.nz, grid.nx);

#pragma omp parallel
    {
        std::vector<double> pos(n_el);
#pragma omp for schedule(dynamic, 4)
        for (long iz = 0; iz < static_cast<long>(grid.nz); ++iz) {
            const double z = grid.z(static_cast<std::size_t>(iz));
            const double z2 = z * z;
            const double half_width = z * half_over_f;
            for (std::size_t ix = 0; ix < grid.nx; ++ix) {
                const double x = grid.x(ix);
                const double s_tx = ((z * cb + x * sb) * inv_c - data.t0) * fs;
                // Fractional sample index per element; kept branch-free so it vectorizes.
                for (std::size_t e = 0; e < n_el; ++e) {
                    const double dx = x - xe[e];
                    pos[e] = s_tx + std::sqrt(dx * dx + z2) * inv_c * fs;
                }
                cplx acc{};
                std::size_t count = 0;
                for (std::size_t e = 0; e < n_el; ++e) {
                    const double s = pos[e];
                    if (s < 0.0 || s > last) continue;
                    if (gated && std::abs(x - xe[e]) > half_width) continue;
                    ++count;
                    const double fl = std::floor(s);
                    const auto w = bspline::weights(s - fl);
                    const auto base = static_cast<std::ptrdiff_t>(fl) - 1;
                    const cplx* c = coeffs.data() + e * n_t;
                    if (base >= 0 && base + 3 < n_t_signed) {
                        const cplx* p = c + base;
                        acc += w[0] * p[0] + w[1] * p[1] + w[2] * p[2] + w[3] * p[3];
                    } else {
                        for (int i = 0; i < 4; ++i)
                            acc += w[i] * c[bspline::mirror(base + i, n_t_signed)];
                    }
                }
                out.pixels(static_cast<std::size_t>(iz), ix) =
                    count > 0 ? acc / static_cast<double>(count) : cplx{};
            }
        }
    }
    return out;
}

IQImage das_reconstruct(const ChannelData& data, const ProbeConfig& probe, const ImageGrid& grid,
                        const DasOptions& options) {
    return das_reconstruct(to_analytic(data), probe, grid, options);
}

IQImage compound(std::span<const IQImage> images) {
    if (images.empty()) throw std::invalid_argument("compound: no images");
    const ImageGrid& grid = images.front().grid;
    IQImage out;
    out.grid = grid;
    out.pixels = Array2D<cplx>(grid.nz, grid.nx);
    for (const auto& img : images) {
        if (!(img.grid == grid) || !img.pixels.same_shape(out.pixels))
            throw std::invalid_argument("compound: images do not share one grid");
        auto dst = out.pixels.data();
        const auto src = img.pixels.data();
        for (std::size_t i = 0; i < out.pixels.size(); ++i) dst[i] += src[i];
    }
    const double inv = 1.0 / static_cast<double>(images.size());
    for (auto& v : out.pixels) v *= inv;
    return out;
}

EnvelopeImage envelope(const IQImage& iq) {
    EnvelopeImage out;
    out.grid = iq.grid;
    out.pixels = Array2D<double>(iq.pixels.rows(), iq.pixels.cols());
    for (std::size_t i = 0; i < iq.pixels.size(); ++i) out.pixels.data()[i] = std::abs(iq.pixels.data()[i]);
    return out;
}

EnvelopeImage envelope_on_tracking_grid(const IQImage& iq) {
    const std::size_t nz = iq.pixels.rows();
    if (nz == 0) throw std::invalid_argument("envelope: empty image");
    const std::size_t rows = nz >= 2 ? nz / 2 : 1;
    EnvelopeImage out;
    out.grid = iq.grid;
    out.grid.dz = 2.0 * iq.grid.dz;
    out.grid.nz = rows;
    out.grid.z_max = out.grid.z_min + static_cast<double>(rows - 1) * out.grid.dz;
    out.pixels = Array2D<double>(rows, iq.pixels.cols());
    for (std::size_t r = 0; r < rows; ++r) {
        const auto src = iq.pixels.row(2 * r);
        auto dst = out.pixels.row(r);
        for (std::size_t c = 0; c < src.size(); ++c) dst[c] = std::abs(src[c]);
    }
    return out;
}

}  // namespace pwtrack
