#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "pwtrack/beamform.hpp"
#include "pwtrack/phantom.hpp"
#include "pwtrack/simulate.hpp"
#include "pwtrack/tracking.hpp"

namespace pwtrack::io {

// Binary containers, all little-endian:
//   channel data  "PWCD" u32 version, u64 n_time, u64 n_elements, f64 fs, f64 t0, f64 tx_angle,
//                 f32 samples in time-major order
//   image         "PWIM" u32 version, u64 nz, u64 nx, f64 x_min, x_max, z_min, z_max,
//                 u32 dtype (1 = complex, 2 = real), f32 row-major data (re, im pairs for complex)
//   field         "PWDF" u32 version, u64 header length, JSON header, f32 planes u_x, u_z,
//                 center_x, center_z (rows x cols each), validity bitmask (LSB first)
//   phantom       "PWPH" u32 version, u64 header length, JSON header, then per scatterer
//                 f64 x, y, z, amplitude and i32 group

inline constexpr std::uint32_t kVersion = 1;

/// Malformed or truncated file; the message names the offending header field.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::filesystem::path& path, const std::string& field, const std::string& what);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

void write_channel_data(const std::filesystem::path& path, const ChannelData& data);
ChannelData read_channel_data(const std::filesystem::path& path);

void write_iq_image(const std::filesystem::path& path, const IQImage& img);
IQImage read_iq_image(const std::filesystem::path& path);
void write_envelope_image(const std::filesystem::path& path, const EnvelopeImage& img);
EnvelopeImage read_envelope_image(const std::filesystem::path& path);

void write_field(const std::filesystem::path& path, const DisplacementField& field);
DisplacementField read_field(const std::filesystem::path& path);
/// Tab-separated x, z, u_x, u_z, valid; one line per window center.
void write_field_tsv(const std::filesystem::path& path, const DisplacementField& field);

void write_phantom(const std::filesystem::path& path, const ScattererPhantom& phantom);
ScattererPhantom read_phantom(const std::filesystem::path& path);

}  // namespace pwtrack::io
