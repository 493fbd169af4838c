#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "pwtrack/analytic.hpp"
#include "pwtrack/bspline.hpp"

using namespace pwtrack;

TEST_CASE("mirror indexing") {
    CHECK(bspline::mirror(-1, 5) == 1);
    CHECK(bspline::mirror(-4, 5) == 4);
    CHECK(bspline::mirror(5, 5) == 3);
    CHECK(bspline::mirror(8, 5) == 0);
    CHECK(bspline::mirror(3, 1) == 0);
    for (std::ptrdiff_t k = -50; k < 50; ++k) {
        const auto m = bspline::mirror(k, 7);
        CHECK(m >= 0);
        CHECK(m < 7);
    }
}

TEST_CASE("spline weights form a partition of unity") {
    for (double t : {0.0, 0.1, 0.5, 0.77, 0.999}) {
        const auto w = bspline::weights(t);
        CHECK(w[0] + w[1] + w[2] + w[3] == doctest::Approx(1.0).epsilon(1e-15));
        // First moment reproduces the position relative to floor(s) - 1.
        CHECK(w[1] + 2 * w[2] + 3 * w[3] == doctest::Approx(1.0 + t).epsilon(1e-14));
    }
}

TEST_CASE("interpolation passes through the samples") {
    for (std::size_t n : {2u, 5u, 29u, 31u, 200u}) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(0.37 * static_cast<double>(i * i)) + 0.1 * i;
        auto c = v;
        bspline::prefilter(c.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(bspline::evaluate<double>(c, static_cast<double>(i)) == doctest::Approx(v[i]).epsilon(1e-10));
    }
}

TEST_CASE("cubic polynomials are reproduced away from the boundary") {
    const std::size_t n = 120;
    auto poly = [](double s) { return 0.3 - 0.2 * s + 0.01 * s * s - 1e-4 * s * s * s; };
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = poly(static_cast<double>(i));
    bspline::prefilter(c.data(), n);
    // The mirror extension breaks the polynomial near the ends; the error decays as |z|^k.
    for (double s = 40.0; s < 80.0; s += 0.173)
        CHECK(bspline::evaluate<double>(c, s) == doctest::Approx(poly(s)).epsilon(1e-9));
}

TEST_CASE("2-D interpolation of a separable product") {
    Array2D<double> a(40, 50);
    for (std::size_t r = 0; r < 40; ++r)
        for (std::size_t c = 0; c < 50; ++c) a(r, c) = std::cos(0.2 * r) * std::sin(0.15 * c);
    const auto coeffs = bspline::prefilter_2d(a);
    for (std::size_t r = 0; r < 40; r += 3)
        for (std::size_t c = 0; c < 50; c += 7)
            CHECK(bspline::evaluate_2d(coeffs, double(r), double(c)) == doctest::Approx(a(r, c)).epsilon(1e-10));
    // Smooth signal, half-pixel positions: cubic interpolation error stays small.
    CHECK(bspline::evaluate_2d(coeffs, 20.5, 25.5) ==
          doctest::Approx(std::cos(0.2 * 20.5) * std::sin(0.15 * 25.5)).epsilon(1e-3));
}

TEST_CASE("analytic signal of a periodic cosine is the complex exponential") {
    ChannelData d;
    d.fs = 1.0;
    const std::size_t n = 64;
    d.samples = Array2D<double>(n, 2);
    for (std::size_t t = 0; t < n; ++t) {
        d.samples(t, 0) = std::cos(2 * kPi * 5 * t / n + 0.3);
        d.samples(t, 1) = 2.0 * std::sin(2 * kPi * 11 * t / n);
    }
    const auto a = to_analytic(d);
    for (std::size_t t = 0; t < n; ++t) {
        const auto e0 = std::polar(1.0, 2 * kPi * 5 * t / n + 0.3);
        const auto e1 = std::polar(2.0, 2 * kPi * 11 * t / n - kPi / 2);
        CHECK(std::abs(a.samples(t, 0) - e0) < 1e-12);
        CHECK(std::abs(a.samples(t, 1) - e1) < 1e-12);
    }
}

TEST_CASE("analytic signal keeps the real part and doubles the energy of a zero-mean signal") {
    ChannelData d;
    d.fs = 1.0;
    for (std::size_t n : {128u, 127u}) {
        d.samples = testutil::random_array(n, 3, n);
        for (std::size_t e = 0; e < 3; ++e) {
            double mean = 0;
            for (std::size_t t = 0; t < n; ++t) mean += d.samples(t, e);
            mean /= static_cast<double>(n);
            for (std::size_t t = 0; t < n; ++t) d.samples(t, e) -= mean;
        }
        const auto a = to_analytic(d);
        for (std::size_t e = 0; e < 3; ++e) {
            double ex = 0, ea = 0, nyquist = 0;
            for (std::size_t t = 0; t < n; ++t) {
                CHECK(a.samples(t, e).real() == doctest::Approx(d.samples(t, e)).epsilon(1e-12));
                ex += d.samples(t, e) * d.samples(t, e);
                ea += std::norm(a.samples(t, e));
                nyquist += d.samples(t, e) * ((t % 2) ? -1.0 : 1.0);
            }
            // Parseval: |X_N/2|^2 / N is counted once instead of twice for even n.
            const double expected = 2 * ex - (n % 2 == 0 ? nyquist * nyquist / static_cast<double>(n) : 0.0);
            CHECK(ea == doctest::Approx(expected).epsilon(1e-10));
        }
    }
    d.samples = Array2D<double>(7, 1);
    CHECK_THROWS_AS(to_analytic(d), std::invalid_argument);
}
