#include "pwtrack/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "pwtrack/config.hpp"
#include "pwtrack/fft.hpp"

namespace pwtrack {

namespace {

double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

// Missing cells take the value of the nearest (4-connected breadth-first) known cell.
void nearest_fill(Array2D<double>& z, const std::vector<char>& known) {
    const std::size_t rows = z.rows(), cols = z.cols();
    std::vector<char> done(known);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (done[i]) queue.push_back(i);
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        const std::size_t r = i / cols, c = i % cols;
        auto visit = [&](std::size_t j) {
            if (!done[j]) {
                done[j] = 1;
                z.data()[j] = z.data()[i];
                queue.push_back(j);
            }
        };
        if (r > 0) visit(i - cols);
        if (r + 1 < rows) visit(i + cols);
        if (c > 0) visit(i - 1);
        if (c + 1 < cols) visit(i + 1);
    }
}

}  // namespace

SmoothReport smooth_components(std::span<Array2D<double>> comps, const Array2D<double>& weights,
                               const SmoothOptions& options) {
    if (comps.empty()) throw std::invalid_argument("smooth: no components");
    const std::size_t rows = weights.rows(), cols = weights.cols();
    const std::size_t noe = weights.size();
    if (noe == 0) throw std::invalid_argument("smooth: empty field");
    for (const auto& c : comps)
        if (c.rows() != rows || c.cols() != cols) throw std::invalid_argument("smooth: shape mismatch");

    std::vector<char> finite(noe, 0);
    double wmax = 0;
    for (std::size_t i = 0; i < noe; ++i) {
        bool ok = weights.data()[i] > 0;
        for (const auto& c : comps) ok = ok && std::isfinite(c.data()[i]);
        finite[i] = ok;
        if (ok) wmax = std::max(wmax, weights.data()[i]);
    }
    const auto nof = static_cast<std::size_t>(std::count(finite.begin(), finite.end(), 1));
    if (nof == 0) throw std::invalid_argument("smooth: every cell is invalid");

    std::vector<double> w(noe, 0.0);
    bool weighted = false;
    for (std::size_t i = 0; i < noe; ++i) {
        if (finite[i]) w[i] = weights.data()[i] / wmax;
        if (w[i] < 1.0) weighted = true;
    }

    const int ndims = (rows > 1 ? 1 : 0) + (cols > 1 ? 1 : 0);
    const std::size_t ncomp = comps.size();
    std::vector<Array2D<double>> y(ncomp);
    for (std::size_t k = 0; k < ncomp; ++k) {
        y[k] = comps[k];
        for (std::size_t i = 0; i < noe; ++i)
            if (!finite[i]) y[k].data()[i] = 0.0;
    }

    if (ndims == 0) {
        // A single known cell is its own smooth estimate.
        return {0.0, 0};
    }

    std::vector<double> lambda2(noe);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double l = (-2.0 + 2.0 * std::cos(kPi * static_cast<double>(r) / static_cast<double>(rows))) +
                             (-2.0 + 2.0 * std::cos(kPi * static_cast<double>(c) / static_cast<double>(cols)));
            lambda2[r * cols + c] = l * l;
        }

    // Bounds on s from bounds on the average leverage h.
    auto s_for_h = [ndims](double h) {
        const double hp = std::pow(h, 2.0 / ndims);
        const double t = (1.0 + std::sqrt(1.0 + 8.0 * hp)) / 4.0 / hp;
        return (t * t - 1.0) / 16.0;
    };
    const double log_s_min = std::log10(s_for_h(0.99));
    const double log_s_max = std::log10(s_for_h(1e-6));

    fft::Dct2D dct(rows, cols);
    std::vector<double> buf(noe), buf2(noe);

    std::vector<Array2D<double>> z(ncomp, Array2D<double>(rows, cols, 0.0));
    if (weighted) {
        const std::size_t keep_r = (rows + 9) / 10, keep_c = (cols + 9) / 10;
        for (std::size_t k = 0; k < ncomp; ++k) {
            z[k] = y[k];
            nearest_fill(z[k], finite);
            dct.forward(z[k].storage(), buf);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c)
                    if (r >= keep_r || c >= keep_c) buf[r * cols + c] = 0.0;
            dct.inverse(buf, z[k].storage());
        }
    }

    const bool automatic = !options.smoothing.has_value();
    double s = automatic ? std::pow(10.0, 0.5 * (log_s_min + log_s_max)) : *options.smoothing;
    if (!(s >= 0)) throw std::invalid_argument("smooth: smoothing parameter must be non-negative");
    const double relax = weighted ? 1.75 : 1.0;

    std::vector<double> wtot = w;
    std::vector<std::vector<double>> dcty(ncomp, std::vector<double>(noe));
    std::vector<double> gamma(noe);
    auto set_gamma = [&](double sv) {
        for (std::size_t i = 0; i < noe; ++i) gamma[i] = 1.0 / (1.0 + sv * lambda2[i]);
    };

    auto gcv = [&](double log_s) {
        const double sv = std::pow(10.0, log_s);
        set_gamma(sv);
        double aow = 0;
        for (double v : wtot) aow += v;
        aow /= static_cast<double>(noe);
        double rss = 0;
        for (std::size_t k = 0; k < ncomp; ++k) {
            if (aow > 0.9) {
                for (std::size_t i = 0; i < noe; ++i) {
                    const double d = dcty[k][i] * (gamma[i] - 1.0);
                    rss += d * d;
                }
            } else {
                for (std::size_t i = 0; i < noe; ++i) buf[i] = gamma[i] * dcty[k][i];
                dct.inverse(buf, buf2);
                for (std::size_t i = 0; i < noe; ++i)
                    if (finite[i]) {
                        const double d = y[k].data()[i] - buf2[i];
                        rss += wtot[i] * d * d;
                    }
            }
        }
        double trace = 0;
        for (double g : gamma) trace += g;
        const double denom = 1.0 - trace / static_cast<double>(noe);
        return rss / static_cast<double>(nof) / (denom * denom);
    };

    const int robust_passes = options.robust ? 3 : 0;
    int robust_step = 0;
    bool is_weighted = weighted;
    for (;;) {
        double tol = 1.0;
        int nit = 0;
        while (tol > options.tolerance && nit < options.max_iterations) {
            ++nit;
            for (std::size_t k = 0; k < ncomp; ++k) {
                for (std::size_t i = 0; i < noe; ++i)
                    buf[i] = wtot[i] * (y[k].data()[i] - z[k].data()[i]) + z[k].data()[i];
                dct.forward(buf, dcty[k]);
            }
            if (automatic && (nit & (nit - 1)) == 0) {
                const auto best = boost::math::tools::brent_find_minima(gcv, log_s_min, log_s_max, 16);
                s = std::pow(10.0, best.first);
            }
            set_gamma(s);
            double diff = 0, norm = 0;
            for (std::size_t k = 0; k < ncomp; ++k) {
                for (std::size_t i = 0; i < noe; ++i) buf[i] = gamma[i] * dcty[k][i];
                dct.inverse(buf, buf2);
                for (std::size_t i = 0; i < noe; ++i) {
                    const double prev = z[k].data()[i];
                    const double next = relax * buf2[i] + (1.0 - relax) * prev;
                    diff += (next - prev) * (next - prev);
                    norm += next * next;
                    z[k].data()[i] = next;
                }
            }
            tol = is_weighted ? (norm > 0 ? std::sqrt(diff / norm) : 0.0) : 0.0;
        }

        if (robust_step >= robust_passes) break;
        ++robust_step;

        // Bisquare weights on the residual norm; h is the average leverage.
        double h = std::sqrt(1.0 + 16.0 * s);
        h = std::sqrt(1.0 + h) / std::sqrt(2.0) / h;
        h = std::pow(h, ndims);
        std::vector<double> res(noe, 0.0), known;
        known.reserve(nof);
        for (std::size_t i = 0; i < noe; ++i) {
            if (!finite[i]) continue;
            double r2 = 0;
            for (std::size_t k = 0; k < ncomp; ++k) {
                const double d = y[k].data()[i] - z[k].data()[i];
                r2 += d * d;
            }
            res[i] = std::sqrt(r2);
            known.push_back(res[i]);
        }
        const double med = median(known);
        for (auto& v : known) v = std::abs(v - med);
        const double mad = median(known);
        for (std::size_t i = 0; i < noe; ++i) {
            if (!finite[i]) {
                wtot[i] = 0.0;
                continue;
            }
            double u;
            if (mad > 0)
                u = std::abs(res[i] / (1.4826 * mad) / std::sqrt(1.0 - h));
            else
                u = res[i] > 0 ? std::numeric_limits<double>::infinity() : 0.0;
            const double t = u / 4.685;
            wtot[i] = w[i] * (t < 1.0 ? (1.0 - t * t) * (1.0 - t * t) : 0.0);
        }
        is_weighted = true;
    }

    for (std::size_t k = 0; k < ncomp; ++k) comps[k] = z[k];
    return {s, robust_step};
}

}  // namespace pwtrack
