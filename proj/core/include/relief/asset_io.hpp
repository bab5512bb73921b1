#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "relief/depth_field.hpp"

namespace relief {

enum class GridFormat { kAuto, kCsv, kBinary };

/// Binary grid (.mhdf) layout, all little-endian:
///   0  char[4] "MHDF"      4  u32 version
///   8  u32 width          12  u32 height
///  16  f64 spacing        24  f64 z_max (meaningful when flag bit 0 set)
///  32  u32 flags          36  reserved, zero, up to byte 64
/// then width*height samples (f32, or f64 when flag bit 1 is set), then the
/// hole bitmap, ceil(width*height / 8) bytes, LSB-first.
inline constexpr char kMhdfMagic[4] = {'M', 'H', 'D', 'F'};
inline constexpr std::uint32_t kMhdfVersion = 1;
inline constexpr std::size_t kMhdfHeaderSize = 64;
inline constexpr std::uint32_t kMhdfHasZMax = 1u << 0;
inline constexpr std::uint32_t kMhdfFloat64 = 1u << 1;

/// Reads .mhdf or CSV (`# spacing=<mm>` header, optional `# z_max=<mm>`, one
/// comma-separated row per grid row). Empty, `nan` or non-finite cells become
/// holes. kAuto picks by extension, `.mhdf` meaning binary.
DepthField load_depth_grid(const std::filesystem::path& path, GridFormat format = GridFormat::kAuto);
void save_depth_grid(const std::filesystem::path& path, const DepthField& field,
                     GridFormat format = GridFormat::kAuto);

DepthField read_csv_grid(std::istream& in);
void write_csv_grid(std::ostream& out, const DepthField& field);

/// Samples are stored as f32 when every value survives the narrowing exactly,
/// otherwise as f64, so a save/load round trip is always bit-identical.
DepthField read_binary_grid(std::istream& in);
void write_binary_grid(std::ostream& out, const DepthField& field);
std::string encode_binary_grid(const DepthField& field);

struct PointCloudSample {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Whitespace- or comma-separated `x y z` lines; `#` starts a comment.
std::vector<PointCloudSample> load_point_cloud(const std::filesystem::path& path);

/// Bins points onto the grid (a point belongs to its nearest node) and keeps the
/// highest z per node. Nodes without points become holes. Throws
/// ValidationError on an empty input or bad dimensions, DomainError when no
/// point lands on the grid.
DepthField rasterize_point_cloud(std::span<const PointCloudSample> points, std::size_t width,
                                 std::size_t height, double spacing);

/// Writes z_max into every hole. z_max defaults to the highest non-hole sample.
/// Idempotent. Throws DomainError when every cell is a hole and z_max is unset.
DepthField fill_holes(const DepthField& field);

struct TraceSample {
  std::int64_t t_ms = 0;
  Vec3 hip = Vec3::Zero();
  Vec3 proxy = Vec3::Zero();
  Vec3 force = Vec3::Zero();
  bool in_contact = false;
  double tick_us = 0.0;

  friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

struct ForceTrace {
  std::vector<TraceSample> samples;

  friend bool operator==(const ForceTrace&, const ForceTrace&) = default;
};

/// Throws ValidationError unless timestamps advance by exactly 1 ms.
void validate_trace(const ForceTrace& trace);

/// CSV columns: t_ms,hip_x,hip_y,hip_z,proxy_x,proxy_y,proxy_z,fx,fy,fz,in_contact,tick_us.
/// Doubles use the shortest round-trip representation.
void write_force_trace(std::ostream& out, const ForceTrace& trace);
void write_force_trace(const ForceTrace& trace, const std::filesystem::path& path);
ForceTrace read_force_trace(std::istream& in);
ForceTrace read_force_trace(const std::filesystem::path& path);

struct TrajectorySample {
  std::int64_t t_ms = 0;
  Vec3 position = Vec3::Zero();  ///< workspace mm
};
using Trajectory = std::vector<TrajectorySample>;

/// CSV columns t_ms,x_mm,y_mm,z_mm with integer, strictly increasing t_ms.
Trajectory read_trajectory(std::istream& in);
Trajectory read_trajectory(const std::filesystem::path& path);
void write_trajectory(std::ostream& out, const Trajectory& trajectory);
void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace relief
