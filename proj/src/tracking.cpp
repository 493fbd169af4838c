#include "pwtrack/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pwtrack/bspline.hpp"
#include "pwtrack/zncc.hpp"

namespace pwtrack {

namespace {

int nearest_odd(double n) {
    const long half = std::lround((n - 1.0) / 2.0);
    return static_cast<int>(2 * std::max(half, 0L) + 1);
}

std::vector<int> centers_along(std::size_t n, int window, int step) {
    const int h = (window - 1) / 2;
    const int span = static_cast<int>(n) - 1 - 2 * h;
    if (span < 0) return {};
    const int m = span / step + 1;
    const int offset = h + (span - (m - 1) * step) / 2;
    std::vector<int> out(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = offset + i * step;
    return out;
}

// Fractional position of v in ascending nodes, clamped to [0, n-1].
struct Bracket {
    std::size_t i0, i1;
    double t;
};

Bracket bracket(const std::vector<double>& nodes, double v) {
    const std::size_t n = nodes.size();
    if (n == 1 || v <= nodes.front()) return {0, 0, 0.0};
    if (v >= nodes.back()) return {n - 1, n - 1, 0.0};
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
    const auto i1 = static_cast<std::size_t>(it - nodes.begin());
    const std::size_t i0 = i1 - 1;
    return {i0, i1, (v - nodes[i0]) / (nodes[i1] - nodes[i0])};
}

double lerp2(const Array2D<double>& a, const Bracket& bz, const Bracket& bx) {
    const double top = (1 - bx.t) * a(bz.i0, bx.i0) + bx.t * a(bz.i0, bx.i1);
    const double bot = (1 - bx.t) * a(bz.i1, bx.i0) + bx.t * a(bz.i1, bx.i1);
    return (1 - bz.t) * top + bz.t * bot;
}

void check_field(const DisplacementField& f) {
    if (f.u_x.empty() || !f.u_x.same_shape(f.u_z) || f.centers_z.size() != f.u_x.rows() ||
        f.centers_x.size() != f.u_x.cols())
        throw std::invalid_argument("displacement field: inconsistent shapes");
}

}  // namespace

TrackingParams TrackingParams::standard() {
    TrackingParams p;
    p.window_sizes = {4e-3, 2.5e-3, 2e-3, 1.5e-3};
    p.overlap = 0.65;
    return p;
}

void TrackingParams::validate() const {
    if (window_sizes.empty()) throw std::invalid_argument("tracking: at least one pass is required");
    for (std::size_t k = 0; k < window_sizes.size(); ++k) {
        if (!(window_sizes[k] > 0)) throw std::invalid_argument("tracking: window sizes must be positive");
        if (k > 0 && !(window_sizes[k] < window_sizes[k - 1]))
            throw std::invalid_argument("tracking: window sizes must be strictly decreasing");
    }
    if (!(overlap >= 0 && overlap < 1)) throw std::invalid_argument("tracking: overlap must lie in [0, 1)");
    if (search_margin.size() > window_sizes.size())
        throw std::invalid_argument("tracking: more search margins than passes");
}

std::size_t DisplacementField::valid_count() const {
    return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(), [](auto v) { return v != 0; }));
}

PassLayout pass_layout(const TrackingParams& params, std::size_t pass, const ImageGrid& grid) {
    params.validate();
    if (pass >= params.passes()) throw std::out_of_range("tracking: pass index out of range");
    const double size = params.window_sizes[pass];
    PassLayout l;
    l.window_z = nearest_odd(size / grid.dz);
    l.window_x = nearest_odd(size / grid.dx);
    l.step_z = std::max(1, static_cast<int>(std::lround(size * (1 - params.overlap) / grid.dz)));
    l.step_x = std::max(1, static_cast<int>(std::lround(size * (1 - params.overlap) / grid.dx)));
    const int margin = pass < params.search_margin.size() ? params.search_margin[pass] : -1;
    if (margin >= 0) {
        l.lag_z = l.lag_x = margin;
    } else if (pass == 0) {
        l.lag_z = (l.window_z - 1) / 2;
        l.lag_x = (l.window_x - 1) / 2;
    } else {
        l.lag_z = static_cast<int>(std::lround(0.25 * l.window_z));
        l.lag_x = static_cast<int>(std::lround(0.25 * l.window_x));
    }
    l.center_rows = centers_along(grid.nz, l.window_z, l.step_z);
    l.center_cols = centers_along(grid.nx, l.window_x, l.step_x);
    return l;
}

std::pair<double, double> sample_field(const DisplacementField& field, double x, double z) {
    check_field(field);
    const auto bz = bracket(field.centers_z, z);
    const auto bx = bracket(field.centers_x, x);
    return {lerp2(field.u_x, bz, bx), lerp2(field.u_z, bz, bx)};
}

EnvelopeImage warp_image(const EnvelopeImage& img, const DisplacementField& field) {
    check_field(field);
    const ImageGrid& g = img.grid;
    const auto coeffs = bspline::prefilter_2d(img.pixels);
    std::vector<Bracket> bx(g.nx);
    for (std::size_t c = 0; c < g.nx; ++c) bx[c] = bracket(field.centers_x, g.x(c));

    EnvelopeImage out;
    out.grid = g;
    out.pixels = Array2D<double>(g.nz, g.nx);
#pragma omp parallel for schedule(static)
    for (long r = 0; r < static_cast<long>(g.nz); ++r) {
        const auto row = static_cast<std::size_t>(r);
        const auto bz = bracket(field.centers_z, g.z(row));
        for (std::size_t c = 0; c < g.nx; ++c) {
            const double ux = lerp2(field.u_x, bz, bx[c]);
            const double uz = lerp2(field.u_z, bz, bx[c]);
            out.pixels(row, c) = bspline::evaluate_2d(coeffs, static_cast<double>(row) + uz / g.dz,
                                                      static_cast<double>(c) + ux / g.dx);
        }
    }
    return out;
}

DisplacementField smooth_field(const DisplacementField& field, const SmoothOptions& options) {
    check_field(field);
    Array2D<double> weights(field.rows(), field.cols());
    for (std::size_t i = 0; i < weights.size(); ++i) weights.data()[i] = field.valid.data()[i] ? 1.0 : 0.0;
    DisplacementField out = field;
    std::array<Array2D<double>, 2> comps{field.u_x, field.u_z};
    smooth_components(comps, weights, options);
    out.u_x = std::move(comps[0]);
    out.u_z = std::move(comps[1]);
    return out;
}

std::vector<DisplacementField> track_passes(const EnvelopeImage& frame_a, const EnvelopeImage& frame_b,
                                            const TrackingParams& params) {
    params.validate();
    if (!(frame_a.grid == frame_b.grid) || !frame_a.pixels.same_shape(frame_b.pixels))
        throw std::invalid_argument("track: frames do not share one grid");
    const ImageGrid& g = frame_a.grid;
    if (frame_a.pixels.rows() != g.nz || frame_a.pixels.cols() != g.nx)
        throw std::invalid_argument("track: image does not match its grid");

    std::vector<DisplacementField> passes;
    for (std::size_t k = 0; k < params.passes(); ++k) {
        const PassLayout l = pass_layout(params, k, g);
        if (l.center_rows.empty() || l.center_cols.empty())
            throw std::invalid_argument("track: window larger than image");

        const EnvelopeImage warped = passes.empty() ? frame_b : warp_image(frame_b, passes.back());

        DisplacementField f;
        f.image_grid = g;
        f.window_sizes = params.window_sizes;
        f.overlap = params.overlap;
        for (int r : l.center_rows) f.centers_z.push_back(g.z(static_cast<std::size_t>(r)));
        for (int c : l.center_cols) f.centers_x.push_back(g.x(static_cast<std::size_t>(c)));
        const std::size_t nr = f.centers_z.size(), nc = f.centers_x.size();
        f.u_x = Array2D<double>(nr, nc);
        f.u_z = Array2D<double>(nr, nc);
        f.valid = Array2D<std::uint8_t>(nr, nc);
        if (!passes.empty()) {
            for (std::size_t i = 0; i < nr; ++i)
                for (std::size_t j = 0; j < nc; ++j) {
                    const auto [ux, uz] = sample_field(passes.back(), f.centers_x[j], f.centers_z[i]);
                    f.u_x(i, j) = ux;
                    f.u_z(i, j) = uz;
                }
        }

        const auto wz = static_cast<std::size_t>(l.window_z), wx = static_cast<std::size_t>(l.window_x);
        const int hz = (l.window_z - 1) / 2, hx = (l.window_x - 1) / 2;
#pragma omp parallel
        {
            ZnccEngine engine(wz, wx, {l.lag_z, l.lag_x});
            Array2D<double> wa(wz, wx), wb(wz, wx);
#pragma omp for schedule(dynamic)
            for (long idx = 0; idx < static_cast<long>(nr * nc); ++idx) {
                const std::size_t i = static_cast<std::size_t>(idx) / nc, j = static_cast<std::size_t>(idx) % nc;
                const auto r0 = static_cast<std::size_t>(l.center_rows[i] - hz);
                const auto c0 = static_cast<std::size_t>(l.center_cols[j] - hx);
                for (std::size_t r = 0; r < wz; ++r)
                    for (std::size_t c = 0; c < wx; ++c) {
                        wa(r, c) = frame_a.pixels(r0 + r, c0 + c);
                        wb(r, c) = warped.pixels(r0 + r, c0 + c);
                    }
                const auto surface = engine.compute(wa, wb);
                if (!surface.valid) continue;
                const auto peak = subpixel_peak(surface);
                if (peak.saturated) continue;
                f.u_x(i, j) += peak.x * g.dx;
                f.u_z(i, j) += peak.z * g.dz;
                f.valid(i, j) = 1;
            }
        }

        const bool last = k + 1 == params.passes();
        if ((params.smooth_every_pass || !last) && f.valid_count() > 0) f = smooth_field(f, params.smoothing);
        passes.push_back(std::move(f));
    }
    return passes;
}

DisplacementField track(const EnvelopeImage& frame_a, const EnvelopeImage& frame_b,
                        const TrackingParams& params) {
    return track_passes(frame_a, frame_b, params).back();
}

}  // namespace pwtrack
