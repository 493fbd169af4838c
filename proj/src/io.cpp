#include "pwtrack/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace pwtrack::io {

static_assert(std::endian::native == std::endian::little, "containers are written in host order");

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class Writer {
public:
    explicit Writer(const fs::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    template <typename T>
    void put(T v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void magic(const char (&m)[5]) {
        bytes(m, 4);
        put<std::uint32_t>(kVersion);
    }
    void text(const std::string& s) {
        put<std::uint64_t>(s.size());
        bytes(s.data(), s.size());
    }
    void finish() {
        out_.flush();
        if (!out_) throw std::runtime_error("write failed: " + path_.string());
    }

private:
    fs::path path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const fs::path& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("cannot open " + path.string());
    }
    template <typename T>
    T get(const std::string& field) {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_) fail(field, "truncated");
        return v;
    }
    void bytes(void* p, std::size_t n, const std::string& field) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) fail(field, "truncated");
    }
    void magic(const char (&m)[5]) {
        char got[4];
        bytes(got, 4, "magic");
        if (std::memcmp(got, m, 4) != 0) fail("magic", std::string("expected ") + m);
        const auto v = get<std::uint32_t>("version");
        if (v != kVersion) fail("version", "unsupported version " + std::to_string(v));
    }
    std::string text(const std::string& field) {
        const auto n = get<std::uint64_t>(field + " length");
        if (n > (std::uint64_t{1} << 30)) fail(field + " length", "implausible length");
        std::string s(n, '\0');
        bytes(s.data(), n, field);
        return s;
    }
    std::uint64_t count(const std::string& field, std::uint64_t limit = std::uint64_t{1} << 34) {
        const auto v = get<std::uint64_t>(field);
        if (v == 0 || v > limit) fail(field, "out of range: " + std::to_string(v));
        return v;
    }
    double finite(const std::string& field) {
        const auto v = get<double>(field);
        if (!std::isfinite(v)) fail(field, "not finite");
        return v;
    }
    void expect_end() {
        if (in_.peek() != std::char_traits<char>::eof()) fail("payload", "trailing bytes");
    }
    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw FormatError(path_, field, what);
    }

private:
    fs::path path_;
    std::ifstream in_;
};

std::vector<float> to_f32(const double* p, std::size_t n) {
    std::vector<float> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(p[i]);
    return v;
}

json grid_json(const ImageGrid& g) {
    return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"z_min", g.z_min}, {"z_max", g.z_max},
            {"dx", g.dx},       {"dz", g.dz},       {"nx", g.nx},       {"nz", g.nz}};
}

ImageGrid grid_from_json(const json& j) {
    ImageGrid g;
    g.x_min = j.at("x_min").get<double>();
    g.x_max = j.at("x_max").get<double>();
    g.z_min = j.at("z_min").get<double>();
    g.z_max = j.at("z_max").get<double>();
    g.dx = j.at("dx").get<double>();
    g.dz = j.at("dz").get<double>();
    g.nx = j.at("nx").get<std::size_t>();
    g.nz = j.at("nz").get<std::size_t>();
    return g;
}

// Image header shared by both image flavours; returns the grid with spacings rebuilt from the
// extents.
ImageGrid read_image_header(Reader& r, std::uint32_t want_dtype) {
    r.magic("PWIM");
    ImageGrid g;
    g.nz = r.count("nz", std::uint64_t{1} << 24);
    g.nx = r.count("nx", std::uint64_t{1} << 24);
    g.x_min = r.finite("x_min");
    g.x_max = r.finite("x_max");
    g.z_min = r.finite("z_min");
    g.z_max = r.finite("z_max");
    if (g.x_max < g.x_min) r.fail("x_max", "smaller than x_min");
    if (g.z_max < g.z_min) r.fail("z_max", "smaller than z_min");
    const auto dtype = r.get<std::uint32_t>("dtype");
    if (dtype != want_dtype)
        r.fail("dtype", "expected " + std::to_string(want_dtype) + ", found " + std::to_string(dtype));
    g.dx = g.nx > 1 ? (g.x_max - g.x_min) / static_cast<double>(g.nx - 1) : 1.0;
    g.dz = g.nz > 1 ? (g.z_max - g.z_min) / static_cast<double>(g.nz - 1) : 1.0;
    return g;
}

void write_image_header(Writer& w, const ImageGrid& g, std::size_t nz, std::size_t nx, std::uint32_t dtype) {
    w.magic("PWIM");
    w.put<std::uint64_t>(nz);
    w.put<std::uint64_t>(nx);
    w.put(g.x_min);
    w.put(g.x_max);
    w.put(g.z_min);
    w.put(g.z_max);
    w.put(dtype);
}

}  // namespace

FormatError::FormatError(const fs::path& path, const std::string& field, const std::string& what)
    : std::runtime_error(path.string() + ": header field '" + field + "': " + what), field_(field) {}

void write_channel_data(const fs::path& path, const ChannelData& data) {
    Writer w(path);
    w.magic("PWCD");
    w.put<std::uint64_t>(data.n_time());
    w.put<std::uint64_t>(data.n_elements());
    w.put(data.fs);
    w.put(data.t0);
    w.put(data.tx_angle);
    const auto v = to_f32(data.samples.data(), data.samples.size());
    w.bytes(v.data(), v.size() * sizeof(float));
    w.finish();
}

ChannelData read_channel_data(const fs::path& path) {
    Reader r(path);
    r.magic("PWCD");
    const auto nt = r.count("n_time");
    const auto ne = r.count("n_elements", 1 << 16);
    ChannelData d;
    d.fs = r.finite("fs");
    if (!(d.fs > 0)) r.fail("fs", "must be positive");
    d.t0 = r.finite("t0");
    d.tx_angle = r.finite("tx_angle");
    std::vector<float> v(nt * ne);
    r.bytes(v.data(), v.size() * sizeof(float), "samples");
    r.expect_end();
    d.samples = Array2D<double>(nt, ne);
    for (std::size_t i = 0; i < v.size(); ++i) d.samples.data()[i] = v[i];
    return d;
}

void write_iq_image(const fs::path& path, const IQImage& img) {
    Writer w(path);
    write_image_header(w, img.grid, img.pixels.rows(), img.pixels.cols(), 1);
    std::vector<float> v(2 * img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        v[2 * i] = static_cast<float>(img.pixels.data()[i].real());
        v[2 * i + 1] = static_cast<float>(img.pixels.data()[i].imag());
    }
    w.bytes(v.data(), v.size() * sizeof(float));
    w.finish();
}

IQImage read_iq_image(const fs::path& path) {
    Reader r(path);
    IQImage img;
    img.grid = read_image_header(r, 1);
    std::vector<float> v(2 * img.grid.nz * img.grid.nx);
    r.bytes(v.data(), v.size() * sizeof(float), "pixels");
    r.expect_end();
    img.pixels = Array2D<std::complex<double>>(img.grid.nz, img.grid.nx);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels.data()[i] = {v[2 * i], v[2 * i + 1]};
    return img;
}

void write_envelope_image(const fs::path& path, const EnvelopeImage& img) {
    Writer w(path);
    write_image_header(w, img.grid, img.pixels.rows(), img.pixels.cols(), 2);
    const auto v = to_f32(img.pixels.data(), img.pixels.size());
    w.bytes(v.data(), v.size() * sizeof(float));
    w.finish();
}

EnvelopeImage read_envelope_image(const fs::path& path) {
    Reader r(path);
    EnvelopeImage img;
    img.grid = read_image_header(r, 2);
    std::vector<float> v(img.grid.nz * img.grid.nx);
    r.bytes(v.data(), v.size() * sizeof(float), "pixels");
    r.expect_end();
    img.pixels = Array2D<double>(img.grid.nz, img.grid.nx);
    for (std::size_t i = 0; i < v.size(); ++i) img.pixels.data()[i] = v[i];
    return img;
}

void write_field(const fs::path& path, const DisplacementField& f) {
    const std::size_t rows = f.rows(), cols = f.cols();
    json h = {{"rows", rows},
              {"cols", cols},
              {"grid", grid_json(f.image_grid)},
              {"window_sizes", f.window_sizes},
              {"overlap", f.overlap},
              {"frame_a", f.frame_a},
              {"frame_b", f.frame_b},
              {"centers_x", f.centers_x},
              {"centers_z", f.centers_z}};
    Writer w(path);
    w.magic("PWDF");
    w.text(h.dump());
    std::vector<float> plane(rows * cols);
    auto emit = [&](auto&& value) {
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) plane[i * cols + j] = static_cast<float>(value(i, j));
        w.bytes(plane.data(), plane.size() * sizeof(float));
    };
    emit([&](std::size_t i, std::size_t j) { return f.u_x(i, j); });
    emit([&](std::size_t i, std::size_t j) { return f.u_z(i, j); });
    emit([&](std::size_t, std::size_t j) { return f.centers_x[j]; });
    emit([&](std::size_t i, std::size_t) { return f.centers_z[i]; });
    std::vector<std::uint8_t> mask((rows * cols + 7) / 8, 0);
    for (std::size_t k = 0; k < rows * cols; ++k)
        if (f.valid.data()[k]) mask[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
    w.bytes(mask.data(), mask.size());
    w.finish();
}

DisplacementField read_field(const fs::path& path) {
    Reader r(path);
    r.magic("PWDF");
    json h;
    try {
        h = json::parse(r.text("header"));
    } catch (const json::parse_error& e) {
        r.fail("header", e.what());
    }
    DisplacementField f;
    std::size_t rows = 0, cols = 0;
    auto field = [&](const char* name) -> const json& {
        if (!h.contains(name)) r.fail(name, "missing");
        return h.at(name);
    };
    try {
        rows = field("rows").get<std::size_t>();
        cols = field("cols").get<std::size_t>();
        f.image_grid = grid_from_json(field("grid"));
        f.window_sizes = field("window_sizes").get<std::vector<double>>();
        f.overlap = field("overlap").get<double>();
        f.frame_a = field("frame_a").get<std::string>();
        f.frame_b = field("frame_b").get<std::string>();
        f.centers_x = field("centers_x").get<std::vector<double>>();
        f.centers_z = field("centers_z").get<std::vector<double>>();
    } catch (const json::exception& e) {
        r.fail("header", e.what());
    }
    if (rows == 0) r.fail("rows", "must be positive");
    if (cols == 0) r.fail("cols", "must be positive");
    if (f.centers_x.size() != cols) r.fail("centers_x", "length differs from cols");
    if (f.centers_z.size() != rows) r.fail("centers_z", "length differs from rows");
    std::vector<float> plane(rows * cols);
    f.u_x = Array2D<double>(rows, cols);
    f.u_z = Array2D<double>(rows, cols);
    r.bytes(plane.data(), plane.size() * sizeof(float), "u_x");
    for (std::size_t k = 0; k < plane.size(); ++k) f.u_x.data()[k] = plane[k];
    r.bytes(plane.data(), plane.size() * sizeof(float), "u_z");
    for (std::size_t k = 0; k < plane.size(); ++k) f.u_z.data()[k] = plane[k];
    r.bytes(plane.data(), plane.size() * sizeof(float), "centers_x");
    r.bytes(plane.data(), plane.size() * sizeof(float), "centers_z");
    std::vector<std::uint8_t> mask((rows * cols + 7) / 8);
    r.bytes(mask.data(), mask.size(), "valid");
    r.expect_end();
    f.valid = Array2D<std::uint8_t>(rows, cols);
    for (std::size_t k = 0; k < rows * cols; ++k) f.valid.data()[k] = (mask[k / 8] >> (k % 8)) & 1u;
    return f;
}

void write_field_tsv(const fs::path& path, const DisplacementField& f) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.precision(9);
    out << "x\tz\tu_x\tu_z\tvalid\n";
    for (std::size_t i = 0; i < f.rows(); ++i)
        for (std::size_t j = 0; j < f.cols(); ++j)
            out << f.centers_x[j] << '\t' << f.centers_z[i] << '\t' << f.u_x(i, j) << '\t' << f.u_z(i, j)
                << '\t' << int(f.valid(i, j)) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_phantom(const fs::path& path, const ScattererPhantom& ph) {
    json centers = json::array();
    for (const auto& c : ph.motion.centers) centers.push_back({c.x, c.z});
    json h = {{"count", ph.scatterers.size()},
              {"motion",
               {{"kind", ph.motion.kind == MotionLaw::Kind::rigid_rotation ? "rigid_rotation" : "static"},
                {"angular_velocity", ph.motion.angular_velocity},
                {"centers", centers}}}};
    Writer w(path);
    w.magic("PWPH");
    w.text(h.dump());
    for (const auto& s : ph.scatterers) {
        w.put(s.x);
        w.put(s.y);
        w.put(s.z);
        w.put(s.amplitude);
        w.put<std::int32_t>(s.group);
    }
    w.finish();
}

ScattererPhantom read_phantom(const fs::path& path) {
    Reader r(path);
    r.magic("PWPH");
    json h;
    try {
        h = json::parse(r.text("header"));
    } catch (const json::parse_error& e) {
        r.fail("header", e.what());
    }
    ScattererPhantom ph;
    std::size_t count = 0;
    try {
        if (!h.contains("count")) r.fail("count", "missing");
        if (!h.contains("motion")) r.fail("motion", "missing");
        count = h.at("count").get<std::size_t>();
        const auto& m = h.at("motion");
        const auto kind = m.at("kind").get<std::string>();
        if (kind == "rigid_rotation")
            ph.motion.kind = MotionLaw::Kind::rigid_rotation;
        else if (kind == "static")
            ph.motion.kind = MotionLaw::Kind::static_scene;
        else
            r.fail("motion.kind", "unknown kind '" + kind + "'");
        ph.motion.angular_velocity = m.at("angular_velocity").get<double>();
        for (const auto& c : m.at("centers")) ph.motion.centers.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    } catch (const json::exception& e) {
        r.fail("header", e.what());
    }
    ph.scatterers.resize(count);
    for (auto& s : ph.scatterers) {
        s.x = r.get<double>("scatterers");
        s.y = r.get<double>("scatterers");
        s.z = r.get<double>("scatterers");
        s.amplitude = r.get<double>("scatterers");
        s.group = r.get<std::int32_t>("scatterers");
        if (s.group >= static_cast<int>(ph.motion.centers.size()))
            r.fail("scatterers", "group index without a rotation center");
    }
    r.expect_end();
    return ph;
}

}  // namespace pwtrack::io
