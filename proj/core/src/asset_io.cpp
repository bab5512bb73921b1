#include "relief/asset_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string_view>

#include "relief/errors.hpp"

namespace relief {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

bool is_nan_token(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "nan" || lower == "-nan";
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

GridFormat resolve_format(const std::filesystem::path& path, GridFormat format) {
  if (format != GridFormat::kAuto) return format;
  return path.extension() == ".mhdf" ? GridFormat::kBinary : GridFormat::kCsv;
}

// Little-endian byte packing.
void put_u32(std::string& buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}
void put_u64(std::string& buf, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}
std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

bool narrows_exactly(double v) {
  if (std::isnan(v)) return true;
  const auto f = static_cast<float>(v);
  return static_cast<double>(f) == v;
}

void read_exact(std::istream& in, unsigned char* dst, std::size_t n, std::size_t offset,
                const char* what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw ParseError(std::string("truncated .mhdf ") + what, offset + static_cast<std::size_t>(in.gcount()));
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Depth grids

DepthField read_csv_grid(std::istream& in) {
  std::optional<double> spacing;
  std::optional<double> z_max;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const std::string_view body = trim(text.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = trim(body.substr(0, eq));
      const std::string_view val = trim(body.substr(eq + 1));
      double parsed = 0.0;
      if (key == "spacing" || key == "z_max") {
        if (!parse_double(val, parsed) || !std::isfinite(parsed)) {
          throw ParseError("invalid " + std::string(key) + " value '" + std::string(val) +
                               "' at line " + std::to_string(line_no),
                           line_no);
        }
        (key == "spacing" ? spacing : z_max) = parsed;
      }
      continue;
    }

    const auto cells = split(text, ',');
    if (rows == 0) {
      width = cells.size();
    } else if (cells.size() != width) {
      throw ParseError("row at line " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(width),
                       line_no);
    }
    for (const auto cell : cells) {
      double v = 0.0;
      if (cell.empty() || is_nan_token(cell)) {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        mask.push_back(1);
      } else if (parse_double(cell, v)) {
        values.push_back(v);
        mask.push_back(std::isfinite(v) ? 0 : 1);
      } else {
        throw ParseError("unparseable cell '" + std::string(cell) + "' at line " +
                             std::to_string(line_no),
                         line_no);
      }
    }
    ++rows;
  }
  if (!spacing) throw ParseError("missing '# spacing=<mm>' header", 1);
  if (rows < 2 || width < 2) {
    throw ParseError("grid must be at least 2x2, got " + std::to_string(width) + "x" +
                         std::to_string(rows),
                     line_no);
  }
  if (!(*spacing > 0.0)) throw ParseError("spacing must be positive", 1);
  return DepthField(width, rows, *spacing, std::move(values), std::move(mask), z_max);
}

void write_csv_grid(std::ostream& out, const DepthField& field) {
  out << "# spacing=" << format_double(field.spacing()) << '\n';
  if (field.z_max()) out << "# z_max=" << format_double(*field.z_max()) << '\n';
  for (std::size_t j = 0; j < field.height(); ++j) {
    for (std::size_t i = 0; i < field.width(); ++i) {
      if (i > 0) out << ',';
      if (!field.is_hole(i, j)) out << format_double(field.at(i, j));
    }
    out << '\n';
  }
}

std::string encode_binary_grid(const DepthField& field) {
  const auto values = field.values();
  const bool narrow = std::all_of(values.begin(), values.end(), narrows_exactly);

  std::uint32_t flags = 0;
  if (field.z_max()) flags |= kMhdfHasZMax;
  if (!narrow) flags |= kMhdfFloat64;

  std::string buf;
  buf.reserve(kMhdfHeaderSize + values.size() * (narrow ? 4 : 8) + values.size() / 8 + 1);
  buf.append(kMhdfMagic, 4);
  put_u32(buf, kMhdfVersion);
  put_u32(buf, static_cast<std::uint32_t>(field.width()));
  put_u32(buf, static_cast<std::uint32_t>(field.height()));
  put_u64(buf, std::bit_cast<std::uint64_t>(field.spacing()));
  put_u64(buf, std::bit_cast<std::uint64_t>(field.z_max().value_or(0.0)));
  put_u32(buf, flags);
  buf.resize(kMhdfHeaderSize, '\0');

  for (const double v : values) {
    if (narrow) {
      put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      put_u64(buf, std::bit_cast<std::uint64_t>(v));
    }
  }
  const auto mask = field.hole_mask();
  std::string bitmap((mask.size() + 7) / 8, '\0');
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] != 0) bitmap[k / 8] = static_cast<char>(bitmap[k / 8] | (1 << (k % 8)));
  }
  buf += bitmap;
  return buf;
}

void write_binary_grid(std::ostream& out, const DepthField& field) {
  const std::string buf = encode_binary_grid(field);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

DepthField read_binary_grid(std::istream& in) {
  unsigned char header[kMhdfHeaderSize];
  read_exact(in, header, kMhdfHeaderSize, 0, "header");
  if (!std::equal(header, header + 4, reinterpret_cast<const unsigned char*>(kMhdfMagic))) {
    throw ParseError("bad .mhdf magic", 0);
  }
  const std::uint32_t version = get_u32(header + 4);
  if (version != kMhdfVersion) {
    throw ParseError("unsupported .mhdf version " + std::to_string(version), 4);
  }
  const std::size_t width = get_u32(header + 8);
  const std::size_t height = get_u32(header + 12);
  const double spacing = std::bit_cast<double>(get_u64(header + 16));
  const double z_max_raw = std::bit_cast<double>(get_u64(header + 24));
  const std::uint32_t flags = get_u32(header + 32);
  if (width < 2 || height < 2) throw ParseError("grid dimensions below 2x2", 8);
  if (width * height > (std::size_t{1} << 32)) throw ParseError("grid dimensions too large", 8);
  if (!std::isfinite(spacing) || !(spacing > 0.0)) throw ParseError("non-finite or non-positive spacing", 16);
  if ((flags & ~(kMhdfHasZMax | kMhdfFloat64)) != 0) throw ParseError("unknown .mhdf flags", 32);

  const std::size_t n = width * height;
  const std::size_t sample_size = (flags & kMhdfFloat64) ? 8 : 4;
  std::vector<unsigned char> raw(n * sample_size);
  read_exact(in, raw.data(), raw.size(), kMhdfHeaderSize, "sample block");
  std::vector<unsigned char> bitmap((n + 7) / 8);
  read_exact(in, bitmap.data(), bitmap.size(), kMhdfHeaderSize + raw.size(), "hole bitmap");

  std::vector<double> values(n);
  std::vector<std::uint8_t> mask(n);
  for (std::size_t k = 0; k < n; ++k) {
    values[k] = sample_size == 8
                    ? std::bit_cast<double>(get_u64(raw.data() + 8 * k))
                    : static_cast<double>(std::bit_cast<float>(get_u32(raw.data() + 4 * k)));
    mask[k] = (bitmap[k / 8] >> (k % 8)) & 1u;
    if (mask[k] == 0 && !std::isfinite(values[k])) {
      throw ParseError("non-finite sample without hole flag", kMhdfHeaderSize + k * sample_size);
    }
  }
  std::optional<double> z_max;
  if (flags & kMhdfHasZMax) z_max = z_max_raw;
  return DepthField(width, height, spacing, std::move(values), std::move(mask), z_max);
}

DepthField load_depth_grid(const std::filesystem::path& path, GridFormat format) {
  if (resolve_format(path, format) == GridFormat::kBinary) {
    auto in = open_in(path, std::ios::binary);
    return read_binary_grid(in);
  }
  auto in = open_in(path);
  return read_csv_grid(in);
}

void save_depth_grid(const std::filesystem::path& path, const DepthField& field,
                     GridFormat format) {
  if (resolve_format(path, format) == GridFormat::kBinary) {
    auto out = open_out(path, std::ios::binary);
    write_binary_grid(out, field);
  } else {
    auto out = open_out(path);
    write_csv_grid(out, field);
  }
}

// ---------------------------------------------------------------------------
// Point clouds and holes

std::vector<PointCloudSample> load_point_cloud(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<PointCloudSample> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    std::string body = line.substr(0, hash);
    std::replace(body.begin(), body.end(), ',', ' ');
    std::istringstream fields(body);
    std::string a, b, c, extra;
    if (!(fields >> a)) continue;
    PointCloudSample p;
    if (!(fields >> b >> c) || !parse_double(a, p.x) || !parse_double(b, p.y) ||
        !parse_double(c, p.z) || !std::isfinite(p.x) || !std::isfinite(p.y) ||
        !std::isfinite(p.z)) {
      throw ParseError("expected three finite coordinates at line " + std::to_string(line_no),
                       line_no);
    }
    points.push_back(p);
  }
  return points;
}

DepthField rasterize_point_cloud(std::span<const PointCloudSample> points, std::size_t width,
                                 std::size_t height, double spacing) {
  if (points.empty()) throw ValidationError("point cloud is empty");
  if (width < 2 || height < 2 || !(spacing > 0.0)) {
    throw ValidationError("raster needs at least 2x2 nodes and positive spacing");
  }
  const std::size_t n = width * height;
  std::vector<double> values(n, -std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> mask(n, 1);
  std::size_t landed = 0;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw ValidationError("point cloud contains a non-finite coordinate");
    }
    const double u = std::floor(p.x / spacing + 0.5);
    const double v = std::floor(p.y / spacing + 0.5);
    if (u < 0.0 || v < 0.0 || u >= static_cast<double>(width) || v >= static_cast<double>(height)) {
      continue;
    }
    const std::size_t k = static_cast<std::size_t>(v) * width + static_cast<std::size_t>(u);
    values[k] = std::max(values[k], p.z);
    mask[k] = 0;
    ++landed;
  }
  if (landed == 0) throw DomainError("no point of the cloud falls inside the raster extent");
  for (std::size_t k = 0; k < n; ++k) {
    if (mask[k] != 0) values[k] = std::numeric_limits<double>::quiet_NaN();
  }
  return DepthField(width, height, spacing, std::move(values), std::move(mask));
}

DepthField fill_holes(const DepthField& field) {
  std::optional<double> z_max = field.z_max();
  if (!z_max) z_max = field.max_sample();
  if (!z_max) throw DomainError("every cell is a hole and no z_max is set");
  std::vector<double> values(field.values().begin(), field.values().end());
  const auto mask = field.hole_mask();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (mask[k] != 0) values[k] = *z_max;
  }
  return DepthField(field.width(), field.height(), field.spacing(), std::move(values),
                    std::vector<std::uint8_t>(mask.begin(), mask.end()), z_max);
}

// ---------------------------------------------------------------------------
// Traces and trajectories

namespace {

constexpr std::string_view kTraceHeader =
    "t_ms,hip_x,hip_y,hip_z,proxy_x,proxy_y,proxy_z,fx,fy,fz,in_contact,tick_us";
constexpr std::string_view kTrajectoryHeader = "t_ms,x_mm,y_mm,z_mm";

double cell_double(const std::vector<std::string_view>& cells, std::size_t idx,
                   std::size_t line_no) {
  double v = 0.0;
  if (!parse_double(cells[idx], v)) {
    throw ParseError("bad number '" + std::string(cells[idx]) + "' at line " +
                         std::to_string(line_no),
                     line_no);
  }
  return v;
}

std::int64_t cell_int(const std::vector<std::string_view>& cells, std::size_t idx,
                      std::size_t line_no) {
  std::int64_t v = 0;
  if (!parse_int(cells[idx], v)) {
    throw ParseError("bad integer '" + std::string(cells[idx]) + "' at line " +
                         std::to_string(line_no),
                     line_no);
  }
  return v;
}

}  // namespace

void validate_trace(const ForceTrace& trace) {
  for (std::size_t k = 1; k < trace.samples.size(); ++k) {
    if (trace.samples[k].t_ms != trace.samples[k - 1].t_ms + 1) {
      throw ValidationError("trace timestamps must advance by 1 ms (sample " +
                            std::to_string(k) + ")");
    }
  }
}

void write_force_trace(std::ostream& out, const ForceTrace& trace) {
  validate_trace(trace);
  out << kTraceHeader << '\n';
  for (const auto& s : trace.samples) {
    out << s.t_ms;
    for (const Vec3* v : {&s.hip, &s.proxy, &s.force}) {
      for (int a = 0; a < 3; ++a) out << ',' << format_double((*v)[a]);
    }
    out << ',' << (s.in_contact ? 1 : 0) << ',' << format_double(s.tick_us) << '\n';
  }
}

void write_force_trace(const ForceTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_force_trace(out, trace);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ForceTrace read_force_trace(std::istream& in) {
  ForceTrace trace;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || trim(line) != kTraceHeader) {
    throw ParseError("force trace header mismatch", 1);
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != 12) {
      throw ParseError("expected 12 columns at line " + std::to_string(line_no), line_no);
    }
    TraceSample s;
    s.t_ms = cell_int(cells, 0, line_no);
    for (int a = 0; a < 3; ++a) {
      s.hip[a] = cell_double(cells, 1 + a, line_no);
      s.proxy[a] = cell_double(cells, 4 + a, line_no);
      s.force[a] = cell_double(cells, 7 + a, line_no);
    }
    if (cells[10] != "0" && cells[10] != "1") {
      throw ParseError("in_contact must be 0 or 1 at line " + std::to_string(line_no), line_no);
    }
    s.in_contact = cells[10] == "1";
    s.tick_us = cell_double(cells, 11, line_no);
    if (!trace.samples.empty() && s.t_ms != trace.samples.back().t_ms + 1) {
      throw ParseError("t_ms must advance by 1 at line " + std::to_string(line_no), line_no);
    }
    trace.samples.push_back(s);
  }
  return trace;
}

ForceTrace read_force_trace(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_force_trace(in);
}

Trajectory read_trajectory(std::istream& in) {
  Trajectory out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (out.empty() && line_no == 1 && text == kTrajectoryHeader) continue;
    const auto cells = split(text, ',');
    if (cells.size() != 4) {
      throw ParseError("expected 4 columns at line " + std::to_string(line_no), line_no);
    }
    TrajectorySample s;
    s.t_ms = cell_int(cells, 0, line_no);
    for (int a = 0; a < 3; ++a) {
      s.position[a] = cell_double(cells, 1 + a, line_no);
      if (!std::isfinite(s.position[a])) {
        throw ParseError("non-finite coordinate at line " + std::to_string(line_no), line_no);
      }
    }
    if (!out.empty() && s.t_ms <= out.back().t_ms) {
      throw ParseError("t_ms must be strictly increasing at line " + std::to_string(line_no),
                       line_no);
    }
    out.push_back(s);
  }
  return out;
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_trajectory(in);
}

void write_trajectory(std::ostream& out, const Trajectory& trajectory) {
  out << kTrajectoryHeader << '\n';
  for (const auto& s : trajectory) {
    out << s.t_ms << ',' << format_double(s.position.x()) << ',' << format_double(s.position.y())
        << ',' << format_double(s.position.z()) << '\n';
  }
}

void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_trajectory(out, trajectory);
}

}  // namespace relief
