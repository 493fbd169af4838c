#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "pwtrack/io.hpp"

using namespace pwtrack;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name)
        : path(fs::temp_directory_path() / ("pwtrack_io_" + std::to_string(::getpid()) + "_" + name)) {}
    ~TempFile() {
        std::error_code ec;
        fs::remove(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

// Runs `read` and returns the FormatError field name, or "" if nothing was thrown.
template <typename F>
std::string error_field(F read) {
    try {
        read();
    } catch (const io::FormatError& e) {
        return e.field();
    }
    return "";
}

float f32(double v) { return static_cast<float>(v); }

DisplacementField sample_field_data() {
    DisplacementField f;
    f.u_x = testutil::random_array(3, 11, 1);
    f.u_z = testutil::random_array(3, 11, 2);
    f.valid = Array2D<std::uint8_t>(3, 11, 1);
    f.valid(0, 3) = f.valid(2, 10) = 0;
    for (int c = 0; c < 11; ++c) f.centers_x.push_back(-5e-3 + 1e-3 * c);
    for (int r = 0; r < 3; ++r) f.centers_z.push_back(10e-3 + 2e-3 * r);
    f.image_grid = ImageGrid::from_extents(-6e-3, 6e-3, 8e-3, 16e-3, 7.4e-5, 7.4e-5);
    f.window_sizes = {4e-3, 2.5e-3};
    f.overlap = 0.65;
    f.frame_a = "a.env";
    f.frame_b = "b.env";
    return f;
}

}  // namespace

TEST_CASE("channel data round trip and corruption") {
    TempFile tmp("cd.chd");
    ChannelData d;
    d.samples = testutil::random_array(40, 7, 3);
    d.fs = 20.833e6;
    d.t0 = 1.25e-5;
    d.tx_angle = -0.0132;
    io::write_channel_data(tmp.path, d);
    const auto back = io::read_channel_data(tmp.path);
    CHECK(back.fs == d.fs);
    CHECK(back.t0 == d.t0);
    CHECK(back.tx_angle == d.tx_angle);
    REQUIRE(back.samples.same_shape(d.samples));
    for (std::size_t i = 0; i < d.samples.size(); ++i) CHECK(back.samples.data()[i] == f32(d.samples.data()[i]));
    CHECK(fs::file_size(tmp.path) == 48 + 40 * 7 * 4);

    const std::string good = slurp(tmp.path);
    auto corrupt = [&](std::size_t offset, const void* bytes, std::size_t n) {
        std::string s = good;
        std::memcpy(s.data() + offset, bytes, n);
        spit(tmp.path, s);
        return error_field([&] { io::read_channel_data(tmp.path); });
    };
    CHECK(corrupt(0, "PWIM", 4) == "magic");
    const std::uint32_t v2 = 2;
    CHECK(corrupt(4, &v2, 4) == "version");
    const std::uint64_t zero = 0;
    CHECK(corrupt(8, &zero, 8) == "n_time");
    const double nan = std::nan("");
    CHECK(corrupt(24, &nan, 8) == "fs");
    CHECK(corrupt(40, &nan, 8) == "tx_angle");

    spit(tmp.path, good.substr(0, good.size() - 3));
    CHECK(error_field([&] { io::read_channel_data(tmp.path); }) == "samples");
    spit(tmp.path, good + "x");
    CHECK(error_field([&] { io::read_channel_data(tmp.path); }) == "payload");
    spit(tmp.path, good.substr(0, 20));
    CHECK(error_field([&] { io::read_channel_data(tmp.path); }) == "n_elements");
}

TEST_CASE("image round trips") {
    const ImageGrid g = ImageGrid::from_extents(-2e-3, 2e-3, 10e-3, 11e-3, 7.4e-5, 3.7e-5);
    IQImage iq{Array2D<std::complex<double>>(g.nz, g.nx), g};
    for (std::size_t i = 0; i < iq.pixels.size(); ++i) iq.pixels.data()[i] = {std::sin(0.1 * i), std::cos(0.7 * i)};
    TempFile a("img.iq"), b("img.env");
    io::write_iq_image(a.path, iq);
    const auto iq2 = io::read_iq_image(a.path);
    CHECK(iq2.grid.nx == g.nx);
    CHECK(iq2.grid.nz == g.nz);
    CHECK(iq2.grid.x_min == g.x_min);
    CHECK(iq2.grid.z_max == g.z_max);
    CHECK(iq2.grid.dx == doctest::Approx(g.dx).epsilon(1e-12));
    CHECK(iq2.grid.dz == doctest::Approx(g.dz).epsilon(1e-12));
    for (std::size_t i = 0; i < iq.pixels.size(); ++i) {
        CHECK(iq2.pixels.data()[i].real() == f32(iq.pixels.data()[i].real()));
        CHECK(iq2.pixels.data()[i].imag() == f32(iq.pixels.data()[i].imag()));
    }

    const auto env = envelope(iq);
    io::write_envelope_image(b.path, env);
    const auto env2 = io::read_envelope_image(b.path);
    for (std::size_t i = 0; i < env.pixels.size(); ++i) CHECK(env2.pixels.data()[i] == f32(env.pixels.data()[i]));

    // Each reader rejects the other dtype.
    CHECK(error_field([&] { io::read_envelope_image(a.path); }) == "dtype");
    CHECK(error_field([&] { io::read_iq_image(b.path); }) == "dtype");
}

TEST_CASE("displacement field round trip") {
    const auto f = sample_field_data();
    TempFile tmp("f.pwdf"), tsv("f.tsv");
    io::write_field(tmp.path, f);
    const auto g = io::read_field(tmp.path);
    REQUIRE(g.rows() == 3);
    REQUIRE(g.cols() == 11);
    for (std::size_t i = 0; i < f.u_x.size(); ++i) {
        CHECK(g.u_x.data()[i] == f32(f.u_x.data()[i]));
        CHECK(g.u_z.data()[i] == f32(f.u_z.data()[i]));
        CHECK(g.valid.data()[i] == f.valid.data()[i]);
    }
    for (std::size_t c = 0; c < 11; ++c) CHECK(g.centers_x[c] == doctest::Approx(f.centers_x[c]).epsilon(1e-7));
    CHECK(g.valid_count() == 31);
    CHECK(g.window_sizes == f.window_sizes);
    CHECK(g.overlap == f.overlap);
    CHECK(g.frame_a == "a.env");
    CHECK(g.image_grid.nx == f.image_grid.nx);

    io::write_field_tsv(tsv.path, f);
    const std::string text = slurp(tsv.path);
    CHECK(std::count(text.begin(), text.end(), '\n') >= 33);

    // Break the JSON header: a missing key is reported by name.
    std::string bytes = slurp(tmp.path);
    const auto pos = bytes.find("\"overlap\"");
    REQUIRE(pos != std::string::npos);
    bytes.replace(pos, 9, "\"overlaq\"");
    spit(tmp.path, bytes);
    CHECK(error_field([&] { io::read_field(tmp.path); }) == "overlap");
}

TEST_CASE("phantom round trip") {
    ScattererPhantom ph = testutil::speckle_block(-1e-3, 1e-3, 5e-3, 6e-3, 50, 9);
    ph.scatterers[3].group = 2;
    ph.motion.kind = MotionLaw::Kind::rigid_rotation;
    ph.motion.centers = {{0.0, 5.5e-3}, {1e-3, 7e-3}, {-1e-3, 8e-3}};
    ph.motion.angular_velocity = 83.0772;
    TempFile tmp("p.pwph");
    io::write_phantom(tmp.path, ph);
    const auto q = io::read_phantom(tmp.path);
    REQUIRE(q.scatterers.size() == 50);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(q.scatterers[i].x == ph.scatterers[i].x);
        CHECK(q.scatterers[i].z == ph.scatterers[i].z);
        CHECK(q.scatterers[i].amplitude == ph.scatterers[i].amplitude);
        CHECK(q.scatterers[i].group == ph.scatterers[i].group);
    }
    CHECK(q.motion.kind == MotionLaw::Kind::rigid_rotation);
    CHECK(q.motion.angular_velocity == ph.motion.angular_velocity);
    CHECK(q.motion.centers.size() == 3);

    const std::string good = slurp(tmp.path);
    spit(tmp.path, good.substr(0, good.size() - 10));
    CHECK(error_field([&] { io::read_phantom(tmp.path); }) == "scatterers");
}

TEST_CASE("missing files are not format errors") {
    CHECK_THROWS_AS(io::read_field("/nonexistent/field.pwdf"), std::runtime_error);
    CHECK(error_field([] {
              try {
                  io::read_field("/nonexistent/field.pwdf");
              } catch (const io::FormatError&) {
                  throw;
              } catch (...) {
              }
          }) == "");
}
