#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>

#include <unistd.h>

#include "pwtrack/beamform.hpp"
#include "pwtrack/io.hpp"

namespace pwtrack {

namespace {

namespace fs = std::filesystem;

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        for (int attempt = 0; attempt < 16; ++attempt) {
            path_ = fs::temp_directory_path() /
                    ("pwtrack-enh-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
                     std::to_string(rd()));
            if (fs::create_directory(path_)) return;
        }
        throw std::runtime_error("enhancer: cannot create a temporary directory");
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

}  // namespace

IQImage enhance(const IQImage& img, const EnhancerHook& hook) {
    if (hook.kind == EnhancerHook::Kind::identity) return img;
    if (hook.command.empty()) throw std::invalid_argument("enhancer: empty command");

    TempDir dir;
    const fs::path in = dir.path() / "input.iq";
    const fs::path out = dir.path() / "output.iq";
    io::write_iq_image(in, img);
    const std::string cmd = hook.command + " " + shell_quote(in.string()) + " " + shell_quote(out.string());
    const int status = std::system(cmd.c_str());
    if (status != 0) throw std::runtime_error("enhancer command failed (status " + std::to_string(status) + ")");
    if (!fs::exists(out)) throw std::runtime_error("enhancer command failed (no output image)");

    IQImage result = io::read_iq_image(out);
    const ImageGrid& a = img.grid;
    const ImageGrid& b = result.grid;
    if (result.pixels.rows() != img.pixels.rows() || result.pixels.cols() != img.pixels.cols() ||
        a.x_min != b.x_min || a.x_max != b.x_max || a.z_min != b.z_min || a.z_max != b.z_max)
        throw std::runtime_error("enhancer: grid mismatch");
    result.grid = img.grid;
    return result;
}

}  // namespace pwtrack
