#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "pwtrack/zncc.hpp"

using namespace pwtrack;
using namespace testutil;

namespace {

Array2D<double> from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Array2D<double> a(rows.size(), rows.begin()->size());
    std::size_t r = 0;
    for (const auto& row : rows) {
        std::size_t c = 0;
        for (double v : row) a(r, c++) = v;
        ++r;
    }
    return a;
}

// b(p) = a(p - shift), i.e. the content of a moves by +shift in b.
Array2D<double> shifted_crop(const Array2D<double>& big, std::size_t r0, std::size_t c0, std::size_t n,
                             int sz = 0, int sx = 0) {
    Array2D<double> w(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            w(r, c) = big(static_cast<std::size_t>(static_cast<int>(r0 + r) - sz),
                          static_cast<std::size_t>(static_cast<int>(c0 + c) - sx));
    return w;
}

// Surface with c(lz, lx) = exp(-q(lz - z0, lx - x0)) for a positive definite quadratic q.
CorrelationSurface gaussian_surface(double z0, double x0, double sxx, double szz, double sxz, LagRange lag) {
    CorrelationSurface s;
    s.max_lag = lag;
    s.valid = true;
    s.values = Array2D<double>(2 * lag.z + 1, 2 * lag.x + 1);
    double best = -1;
    for (int lz = -lag.z; lz <= lag.z; ++lz)
        for (int lx = -lag.x; lx <= lag.x; ++lx) {
            const double dz = lz - z0, dx = lx - x0;
            const double v = std::exp(-(sxx * dx * dx + szz * dz * dz + sxz * dx * dz));
            s.values(lz + lag.z, lx + lag.x) = v;
            if (v > best) {
                best = v;
                s.peak_z = lz;
                s.peak_x = lx;
            }
        }
    return s;
}

}  // namespace

TEST_CASE("hand-computed 2x2 surface") {
    const auto a = from_rows({{1, 2}, {3, 4}});
    const auto b = from_rows({{5, 1}, {0, 7}});
    const auto s = zncc_surface(a, b, {1, 1});
    CHECK(s.valid);
    CHECK(s.at(0, 0) == doctest::Approx(2.5 / std::sqrt(5.0 * 32.75)));
    CHECK(s.at(0, 1) == doctest::Approx(1.0));   // {1, 3} against {1, 7}
    CHECK(s.at(1, 0) == doctest::Approx(1.0));   // {1, 2} against {0, 7}
    CHECK(s.at(-1, 0) == doctest::Approx(-1.0)); // {3, 4} against {5, 1}
    CHECK(s.at(1, 1) == 0.0);                    // single-sample overlap
    // Ties resolve to the lowest lag.
    CHECK(s.peak_z == 0);
    CHECK(s.peak_x == 1);
}

TEST_CASE("integer translation is found with correlation one") {
    const auto big = random_array(80, 80, 9);
    for (auto [sz, sx] : {std::pair{0, 0}, std::pair{2, -3}, std::pair{-4, 5}}) {
        const auto a = shifted_crop(big, 20, 20, 31);
        const auto b = shifted_crop(big, 20, 20, 31, sz, sx);
        const auto s = zncc_surface_fft(a, b, {6, 6});
        CHECK(s.peak_z == sz);
        CHECK(s.peak_x == sx);
        CHECK(s.peak_value() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("FFT surface matches the direct surface") {
    for (auto [rows, cols, lz, lx] : {std::tuple{17, 23, 5, 7}, std::tuple{33, 33, 16, 16}, std::tuple{8, 5, 2, 0}}) {
        const auto a = random_array(rows, cols, rows * 7 + cols);
        auto b = random_array(rows, cols, rows * 11 + cols);
        for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = 0.7 * a.data()[i] + 0.5 * b.data()[i] + 100.0;
        const auto d = zncc_surface(a, b, {lz, lx});
        const auto f = zncc_surface_fft(a, b, {lz, lx});
        REQUIRE(d.values.same_shape(f.values));
        for (std::size_t i = 0; i < d.values.size(); ++i)
            CHECK(f.values.data()[i] == doctest::Approx(d.values.data()[i]).epsilon(1e-9));
        CHECK(d.peak_z == f.peak_z);
        CHECK(d.peak_x == f.peak_x);
    }
}

TEST_CASE("an engine can be reused across windows") {
    ZnccEngine engine(21, 21, {5, 5});
    for (std::uint64_t seed = 1; seed < 5; ++seed) {
        const auto a = random_array(21, 21, seed), b = random_array(21, 21, seed + 100);
        const auto d = zncc_surface(a, b, {5, 5});
        const auto f = engine.compute(a, b);
        for (std::size_t i = 0; i < d.values.size(); ++i)
            CHECK(f.values.data()[i] == doctest::Approx(d.values.data()[i]).epsilon(1e-9));
    }
    CHECK_THROWS(engine.compute(random_array(20, 21, 1), random_array(20, 21, 2)));
}

TEST_CASE("affine intensity changes") {
    const auto a = random_array(25, 25, 3), b = random_array(25, 25, 4);
    const auto base = zncc_surface_fft(a, b, {4, 4});
    auto scaled = b, negated = b;
    for (auto& v : scaled) v = 3.7 * v - 12.0;
    for (auto& v : negated) v = -0.5 * v + 1.0;
    const auto s1 = zncc_surface_fft(a, scaled, {4, 4});
    const auto s2 = zncc_surface_fft(a, negated, {4, 4});
    for (std::size_t i = 0; i < base.values.size(); ++i) {
        CHECK(s1.values.data()[i] == doctest::Approx(base.values.data()[i]).epsilon(1e-9));
        CHECK(s2.values.data()[i] == doctest::Approx(-base.values.data()[i]).epsilon(1e-9));
    }
}

TEST_CASE("surface values lie in [-1, 1]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = zncc_surface_fft(random_array(15, 19, seed), random_array(15, 19, seed + 50), {7, 9});
        for (double v : s.values) {
            CHECK(v <= 1.0 + 1e-12);
            CHECK(v >= -1.0 - 1e-12);
        }
    }
}

TEST_CASE("constant windows give an invalid surface") {
    const Array2D<double> flat(9, 9, 2.0);
    const auto r = random_array(9, 9, 1);
    CHECK_FALSE(zncc_surface(flat, r, {2, 2}).valid);
    CHECK_FALSE(zncc_surface_fft(r, flat, {2, 2}).valid);
    for (double v : zncc_surface_fft(flat, r, {2, 2}).values) CHECK(v == 0.0);
}

TEST_CASE("window checks") {
    const auto a = random_array(9, 9, 1);
    CHECK_THROWS_AS(zncc_surface(a, random_array(9, 8, 1), {2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(zncc_surface(a, a, {9, 2}), std::invalid_argument);
    CHECK_THROWS_AS(zncc_surface_fft(a, a, {-1, 2}), std::invalid_argument);
}

TEST_CASE("subpixel fit recovers a sampled Gaussian exactly") {
    for (auto [z0, x0] : {std::pair{0.3, -0.2}, std::pair{-0.45, 0.49}, std::pair{2.1, -3.3}}) {
        const auto s = gaussian_surface(z0, x0, 0.4, 0.7, 0.0, {6, 6});
        const auto p = subpixel_peak(s);
        CHECK(p.method == SubpixelPeak::Method::gaussian_2d);
        CHECK_FALSE(p.saturated);
        CHECK(p.z == doctest::Approx(z0).epsilon(1e-10));
        CHECK(p.x == doctest::Approx(x0).epsilon(1e-10));
    }
    // Correlated axes need the cross term.
    const auto s = gaussian_surface(0.25, -0.35, 0.5, 0.6, 0.4, {4, 4});
    const auto p = subpixel_peak(s);
    CHECK(p.method == SubpixelPeak::Method::gaussian_2d);
    CHECK(p.z == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(p.x == doctest::Approx(-0.35).epsilon(1e-10));
}

TEST_CASE("subpixel fallbacks") {
    SUBCASE("a non-positive corner falls back to per-axis fits") {
        auto s = gaussian_surface(0.2, -0.3, 0.5, 0.5, 0.0, {3, 3});
        s.values(s.max_lag.z + 1, s.max_lag.x + 1) = -0.1;
        const auto p = subpixel_peak(s);
        CHECK(p.method == SubpixelPeak::Method::gaussian_1d);
        // Separable Gaussian: the three-point fit along each axis is exact.
        CHECK(p.z == doctest::Approx(0.2).epsilon(1e-10));
        CHECK(p.x == doctest::Approx(-0.3).epsilon(1e-10));
    }
    SUBCASE("non-positive axis neighbours leave the integer peak") {
        auto s = gaussian_surface(0.0, 0.0, 0.5, 0.5, 0.0, {3, 3});
        for (auto [dz, dx] : {std::pair{-1, 0}, std::pair{1, 0}, std::pair{0, -1}, std::pair{0, 1}})
            s.values(s.max_lag.z + dz, s.max_lag.x + dx) = 0.0;
        const auto p = subpixel_peak(s);
        CHECK(p.method == SubpixelPeak::Method::integer);
        CHECK(p.z == 0.0);
        CHECK(p.x == 0.0);
    }
    SUBCASE("a peak on the lag border is saturated") {
        const auto s = gaussian_surface(3.4, 0.0, 0.5, 0.5, 0.0, {3, 3});
        const auto p = subpixel_peak(s);
        CHECK(p.saturated);
        CHECK(p.z == 3.0);
        CHECK(p.method == SubpixelPeak::Method::integer);
    }
}

TEST_CASE("subpixel estimate of a smooth shifted pattern") {
    // Band-limited pattern sampled at a fractional offset.
    auto pattern = [](double r, double c) {
        return std::exp(-((r - 15) * (r - 15) + (c - 15) * (c - 15)) / 30.0) + 0.3 * std::cos(0.4 * r) * std::sin(0.5 * c);
    };
    Array2D<double> a(31, 31), b(31, 31);
    for (std::size_t r = 0; r < 31; ++r)
        for (std::size_t c = 0; c < 31; ++c) {
            a(r, c) = pattern(r, c);
            b(r, c) = pattern(r - 0.3, c + 0.2);
        }
    const auto p = subpixel_peak(zncc_surface_fft(a, b, {4, 4}));
    CHECK(std::abs(p.z - 0.3) < 0.1);
    CHECK(std::abs(p.x + 0.2) < 0.1);
}
