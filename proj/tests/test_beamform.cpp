#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "pwtrack/io.hpp"

using namespace pwtrack;
using namespace testutil;

namespace {

ProbeConfig small_probe() {
    ProbeConfig p;
    p.element_count = 65;
    p.aperture = 65 * p.pitch;
    return p;
}

ScattererPhantom point(double x, double z) {
    ScattererPhantom ph;
    ph.scatterers.push_back({x, 0.0, z, 1.0, -1});
    return ph;
}

ImageGrid patch(const ProbeConfig& p, double xc, double zc, double half_x, double half_z) {
    const double lambda = p.wavelength();
    return ImageGrid::from_extents(xc - half_x, xc + half_x, zc - half_z, zc + half_z, lambda / 4, lambda / 8);
}

std::pair<std::size_t, std::size_t> argmax(const Array2D<double>& a) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < a.size(); ++i)
        if (a.data()[i] > a.data()[best]) best = i;
    return {best / a.cols(), best % a.cols()};
}

// Lateral -6 dB width in pixels of the row through the peak.
double lateral_width(const EnvelopeImage& env) {
    const auto [r, c] = argmax(env.pixels);
    const double half = 0.5 * env.pixels(r, c);
    std::size_t lo = c, hi = c;
    while (lo > 0 && env.pixels(r, lo - 1) >= half) --lo;
    while (hi + 1 < env.pixels.cols() && env.pixels(r, hi + 1) >= half) ++hi;
    return static_cast<double>(hi - lo + 1);
}

}  // namespace

TEST_CASE("a point scatterer is imaged at its position") {
    const ProbeConfig p = small_probe();
    for (auto [x, z] : {std::pair{0.0, 15e-3}, std::pair{2.3e-3, 22e-3}, std::pair{-3.1e-3, 12.4e-3}}) {
        const auto data = simulate(point(x, z), p);
        const ImageGrid g = patch(p, x, z, 1.5e-3, 1.0e-3);
        const auto env = envelope(das_reconstruct(data, p, g));
        const auto [r, c] = argmax(env.pixels);
        CHECK(std::abs(g.x(c) - x) <= g.dx);
        CHECK(std::abs(g.z(r) - z) <= g.dz);
    }
}

TEST_CASE("steered transmits image the scatterer at the same position") {
    const ProbeConfig p = small_probe();
    const double x = 1e-3, z = 18e-3;
    const ImageGrid g = patch(p, x, z, 1.5e-3, 1.0e-3);
    for (double deg : {-2.66, 1.14}) {
        const double b = deg * kPi / 180;
        const auto env = envelope(das_reconstruct(simulate(point(x, z), p, b), p, g));
        const auto [r, c] = argmax(env.pixels);
        CHECK(std::abs(g.x(c) - x) <= g.dx);
        CHECK(std::abs(g.z(r) - z) <= g.dz);
    }
}

TEST_CASE("zero data gives a zero image") {
    const ProbeConfig p = small_probe();
    ChannelData d;
    d.fs = p.sampling_frequency;
    d.t0 = 10e-6;
    d.samples = Array2D<double>(400, 65);
    const auto img = das_reconstruct(d, p, patch(p, 0, 10e-3, 1e-3, 1e-3));
    for (const auto& v : img.pixels) CHECK(v == std::complex<double>{});
}

TEST_CASE("reconstruction is linear in the channel data") {
    const ProbeConfig p = small_probe();
    ChannelData a, b;
    a.fs = b.fs = p.sampling_frequency;
    a.t0 = b.t0 = 15e-6;
    a.samples = random_array(600, 65, 1);
    b.samples = random_array(600, 65, 2);
    ChannelData sum = a;
    for (std::size_t i = 0; i < sum.samples.size(); ++i)
        sum.samples.data()[i] = 2.0 * a.samples.data()[i] - 0.5 * b.samples.data()[i];
    const ImageGrid g = patch(p, 0.5e-3, 15e-3, 2e-3, 1e-3);
    const auto ia = das_reconstruct(a, p, g), ib = das_reconstruct(b, p, g), is = das_reconstruct(sum, p, g);
    for (std::size_t i = 0; i < is.pixels.size(); ++i)
        CHECK(std::abs(is.pixels.data()[i] - (2.0 * ia.pixels.data()[i] - 0.5 * ib.pixels.data()[i])) < 1e-10);
}

TEST_CASE("image equalization: a constant channel signal gives a constant image") {
    const ProbeConfig p = small_probe();
    ChannelData d;
    d.fs = p.sampling_frequency;
    d.t0 = 0;
    d.samples = Array2D<double>(2000, 65, 0.0);
    // Constant analytic signal: the constant maps onto the DC bin and stays real.
    for (auto& v : d.samples) v = 3.0;
    // Pixels near the window edge lose elements but keep the per-pixel mean.
    const auto img = das_reconstruct(d, p, patch(p, 0, 30e-3, 3e-3, 1e-3), DasOptions{1.5});
    for (const auto& v : img.pixels) CHECK(std::abs(v - 3.0) < 1e-9);
}

TEST_CASE("receive aperture gate") {
    const ProbeConfig p = small_probe();
    const auto data = simulate(point(0.0, 10e-3), p);
    const ImageGrid g = patch(p, 0.0, 10e-3, 1e-3, 0.5e-3);
    CHECK_THROWS_AS(das_reconstruct(data, p, g, DasOptions{0.0}), std::invalid_argument);
    const auto gated = envelope(das_reconstruct(data, p, g, DasOptions{1.0}));
    const auto [r, c] = argmax(gated.pixels);
    CHECK(std::abs(g.x(c)) <= g.dx);
    CHECK(std::abs(g.z(r) - 10e-3) <= g.dz);
}

TEST_CASE("mismatched inputs are rejected") {
    const ProbeConfig p = small_probe();
    ChannelData d;
    d.fs = p.sampling_frequency;
    d.samples = Array2D<double>(100, 64);
    CHECK_THROWS_AS(das_reconstruct(d, p, patch(p, 0, 10e-3, 1e-3, 1e-3)), std::invalid_argument);
    d.samples = Array2D<double>(100, 65);
    d.fs = 2 * p.sampling_frequency;
    CHECK_THROWS_AS(das_reconstruct(d, p, patch(p, 0, 10e-3, 1e-3, 1e-3)), std::invalid_argument);
}

TEST_CASE("compounding") {
    const ProbeConfig p = small_probe();
    const ImageGrid g = patch(p, 0, 10e-3, 0.5e-3, 0.5e-3);
    IQImage a{Array2D<std::complex<double>>(g.nz, g.nx), g};
    for (std::size_t i = 0; i < a.pixels.size(); ++i) a.pixels.data()[i] = {std::sin(i * 0.1), std::cos(i * 0.3)};

    SUBCASE("identical images compound to themselves") {
        const std::vector<IQImage> same{a, a, a};
        const auto c = compound(same);
        for (std::size_t i = 0; i < a.pixels.size(); ++i)
            CHECK(std::abs(c.pixels.data()[i] - a.pixels.data()[i]) < 1e-15);
    }
    SUBCASE("an image and its negation cancel") {
        IQImage neg = a;
        for (auto& v : neg.pixels) v = -v;
        const std::vector<IQImage> pair{a, neg};
        for (const auto& v : compound(pair).pixels) CHECK(std::abs(v) < 1e-15);
    }
    SUBCASE("grids must match") {
        IQImage other = a;
        other.grid.x_min += 1e-6;
        const std::vector<IQImage> bad{a, other};
        CHECK_THROWS_AS(compound(bad), std::invalid_argument);
        CHECK_THROWS_AS(compound(std::span<const IQImage>{}), std::invalid_argument);
    }
}

TEST_CASE("compounding nine angles narrows the lateral point spread") {
    const ProbeConfig p = small_probe();
    const double z = 25e-3;
    const auto ph = point(0.0, z);
    const ImageGrid g = patch(p, 0.0, z, 3e-3, 0.6e-3);
    const auto seq = plan_sequence(p, 9, 9e3);
    std::vector<IQImage> imgs;
    for (double b : seq.angles) imgs.push_back(das_reconstruct(simulate(ph, p, b), p, g));
    const double single = lateral_width(envelope(imgs.back()));
    const double nine = lateral_width(envelope(compound(imgs)));
    CHECK(nine <= single);
    // Compounding sums coherently at the true position only.
    const auto [r, c] = argmax(envelope(compound(imgs)).pixels);
    CHECK(std::abs(g.x(c)) <= g.dx);
}

TEST_CASE("envelope on the tracking grid") {
    for (std::size_t nz : {1u, 2u, 7u, 10u}) {
        const ImageGrid g = ImageGrid::from_extents(-1e-3, 1e-3, 5e-3, 5e-3 + (nz - 1) * 1e-4, 2.5e-4, 1e-4);
        IQImage iq{Array2D<std::complex<double>>(nz, g.nx), g};
        for (std::size_t r = 0; r < nz; ++r)
            for (std::size_t c = 0; c < g.nx; ++c) iq.pixels(r, c) = {3.0 * r, 4.0 * c};
        const auto env = envelope_on_tracking_grid(iq);
        const std::size_t expected_rows = nz >= 2 ? nz / 2 : 1;
        REQUIRE(env.pixels.rows() == expected_rows);
        CHECK(env.pixels.cols() == g.nx);
        CHECK(env.grid.nz == expected_rows);
        CHECK(env.grid.dz == doctest::Approx(2 * g.dz));
        CHECK(env.grid.z_min == g.z_min);
        for (std::size_t r = 0; r < expected_rows; ++r)
            for (std::size_t c = 0; c < g.nx; ++c) CHECK(env.pixels(r, c) == doctest::Approx(std::abs(iq.pixels(2 * r, c))));
    }
    const auto full = envelope(IQImage{Array2D<std::complex<double>>(3, 2, {3.0, -4.0}), {}});
    for (double v : full.pixels) CHECK(v == doctest::Approx(5.0));
}

TEST_CASE("enhancer hook") {
    const ProbeConfig p = small_probe();
    const ImageGrid g = patch(p, 0, 10e-3, 0.4e-3, 0.3e-3);
    IQImage img{Array2D<std::complex<double>>(g.nz, g.nx), g};
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels.data()[i] = {0.1 * i, -0.37 * i + 1.0 / 3.0};

    SUBCASE("identity returns the input unchanged") {
        const auto out = enhance(img, EnhancerHook::identity());
        CHECK(out.pixels == img.pixels);
        CHECK(out.grid == img.grid);
    }
    SUBCASE("a copying command returns the single-precision round trip") {
        const auto out = enhance(img, EnhancerHook::external("cp"));
        CHECK(out.grid == img.grid);
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            const auto v = img.pixels.data()[i];
            CHECK(out.pixels.data()[i].real() == static_cast<double>(static_cast<float>(v.real())));
            CHECK(out.pixels.data()[i].imag() == static_cast<double>(static_cast<float>(v.imag())));
        }
    }
    SUBCASE("a failing command throws") {
        CHECK_THROWS_WITH_AS(enhance(img, EnhancerHook::external("false")), doctest::Contains("enhancer command failed"),
                             std::runtime_error);
        CHECK_THROWS_WITH_AS(enhance(img, EnhancerHook::external("true")), doctest::Contains("enhancer command failed"),
                             std::runtime_error);
    }
    SUBCASE("an output on another grid throws") {
        const auto other_path = std::filesystem::temp_directory_path() / "pwtrack_test_other.iq";
        const ImageGrid og = patch(p, 0, 10e-3, 0.5e-3, 0.3e-3);
        io::write_iq_image(other_path, IQImage{Array2D<std::complex<double>>(og.nz, og.nx), og});
        const std::string cmd = "sh -c 'cp \"" + other_path.string() + "\" \"$2\"' copy";
        CHECK_THROWS_WITH_AS(enhance(img, EnhancerHook::external(cmd)), doctest::Contains("grid mismatch"),
                             std::runtime_error);
        std::filesystem::remove(other_path);
    }
}
