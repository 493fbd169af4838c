#include "pwtrack/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace pwtrack {

std::optional<double> repe(Vec2 estimate, Vec2 truth) {
    const double n = std::hypot(truth.x, truth.z);
    if (!(n > 0)) return std::nullopt;
    return std::hypot(estimate.x - truth.x, estimate.z - truth.z) / n;
}

MrepeResult mrepe(std::span<const std::pair<Vec2, Vec2>> pairs) {
    MrepeResult r;
    double sum = 0;
    for (const auto& [est, truth] : pairs) {
        if (const auto v = repe(est, truth)) {
            sum += *v;
            ++r.used;
        } else {
            ++r.skipped;
        }
    }
    if (r.used == 0) throw std::invalid_argument("mrepe: no pair with non-zero truth");
    r.value = sum / static_cast<double>(r.used);
    return r;
}

double rve(const RepeMap& map, double threshold) {
    if (!map.values.same_shape(map.mask)) throw std::invalid_argument("rve: mask shape differs");
    std::size_t n = 0, ok = 0;
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        if (!map.mask.data()[i]) continue;
        ++n;
        if (map.values.data()[i] <= threshold) ++ok;
    }
    if (n == 0) throw std::invalid_argument("rve: empty mask");
    return static_cast<double>(ok) / static_cast<double>(n);
}

RepeMap repe_map(const DisplacementField& estimate, const DisplacementField& truth,
                 const Array2D<std::uint8_t>& mask) {
    if (!estimate.u_x.same_shape(truth.u_x) || !estimate.u_x.same_shape(mask))
        throw std::invalid_argument("repe_map: shapes differ");
    RepeMap m;
    m.values = Array2D<double>(mask.rows(), mask.cols(), 0.0);
    m.mask = Array2D<std::uint8_t>(mask.rows(), mask.cols(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask.data()[i]) continue;
        const auto v = repe({estimate.u_x.data()[i], estimate.u_z.data()[i]},
                            {truth.u_x.data()[i], truth.u_z.data()[i]});
        if (!v) continue;
        m.values.data()[i] = *v;
        m.mask.data()[i] = 1;
    }
    return m;
}

RepeMap average_repe_maps(std::span<const RepeMap> maps) {
    if (maps.empty()) throw std::invalid_argument("average_repe_maps: no maps");
    RepeMap out;
    const auto& first = maps.front();
    out.values = Array2D<double>(first.values.rows(), first.values.cols(), 0.0);
    out.mask = Array2D<std::uint8_t>(first.values.rows(), first.values.cols(), 1);
    for (const auto& m : maps) {
        if (!m.values.same_shape(first.values) || !m.mask.same_shape(first.values))
            throw std::invalid_argument("average_repe_maps: shapes differ");
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            out.values.data()[i] += m.values.data()[i];
            out.mask.data()[i] &= m.mask.data()[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(maps.size());
    for (auto& v : out.values) v *= inv;
    return out;
}

DisplacementField analytic_rotation_field(RotationCenter center, double angular_velocity,
                                          double frame_interval, const std::vector<double>& centers_x,
                                          const std::vector<double>& centers_z) {
    if (!std::isfinite(angular_velocity) || !std::isfinite(frame_interval))
        throw std::invalid_argument("analytic_rotation_field: non-finite rotation");
    const double phi = angular_velocity * frame_interval;
    DisplacementField f;
    f.centers_x = centers_x;
    f.centers_z = centers_z;
    f.u_x = Array2D<double>(centers_z.size(), centers_x.size());
    f.u_z = Array2D<double>(centers_z.size(), centers_x.size());
    f.valid = Array2D<std::uint8_t>(centers_z.size(), centers_x.size(), 1);
    for (std::size_t i = 0; i < centers_z.size(); ++i)
        for (std::size_t j = 0; j < centers_x.size(); ++j) {
            double x = centers_x[j], z = centers_z[i];
            rotate_about(center, phi, x, z);
            f.u_x(i, j) = x - centers_x[j];
            f.u_z(i, j) = z - centers_z[i];
        }
    return f;
}

Array2D<std::uint8_t> zone_mask(const std::vector<double>& centers_x, const std::vector<double>& centers_z,
                                const Cylinder& cylinder, double inner_margin, double outer_margin) {
    if (inner_margin < 0 || outer_margin < 0) throw std::invalid_argument("zone_mask: negative margin");
    const double outer = cylinder.radius - outer_margin;
    if (!(inner_margin < outer)) throw std::invalid_argument("zone_mask: empty zone");
    Array2D<std::uint8_t> m(centers_z.size(), centers_x.size(), 0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < centers_z.size(); ++i)
        for (std::size_t j = 0; j < centers_x.size(); ++j) {
            const double r = std::hypot(centers_x[j] - cylinder.center_x, centers_z[i] - cylinder.center_z);
            if (r >= inner_margin && r <= outer) {
                m(i, j) = 1;
                ++n;
            }
        }
    if (n == 0) throw std::invalid_argument("zone_mask: empty zone");
    return m;
}

}  // namespace pwtrack
