#include "hvr/location.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hvr {

double LocationDistribution::sum() const {
  double s = 0.0;
  for (double v : probs) s += v;
  return s;
}

std::size_t LocationDistribution::argmax() const {
  return static_cast<std::size_t>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
}

LocationDistribution LocationDistribution::uniform(std::size_t w,
                                                   std::size_t d,
                                                   std::size_t h) {
  LocationDistribution out{w, d, h, {}};
  out.probs.assign(w * d * h, 1.0 / static_cast<double>(w * d * h));
  return out;
}

void LocationDistribution::validate(double tol) const {
  if (probs.size() != cells())
    throw std::invalid_argument("LocationDistribution: storage/dims mismatch");
  for (double v : probs)
    if (!(v >= 0.0))
      throw std::invalid_argument("LocationDistribution: negative entry");
  if (std::abs(sum() - 1.0) > tol)
    throw std::invalid_argument("LocationDistribution: sum != 1");
}

void CameraTrack::validate() const {
  for (std::size_t i = 0; i < key_frames.size(); ++i) {
    const auto& k = key_frames[i];
    if (!std::isfinite(k.position.x) || !std::isfinite(k.position.y) ||
        !std::isfinite(k.position.z))
      throw std::invalid_argument("track: non-finite key-frame position");
    if (i > 0 && key_frames[i - 1].frame >= k.frame)
      throw std::invalid_argument("track: frame indices must increase");
  }
}

LocationDistribution make_prior(const CameraTrack& track, const GridSpec& grid,
                                double sigma, std::size_t* out_skipped,
                                bool* out_uniform_fallback) {
  grid.validate();
  track.validate();
  if (!(sigma > 0.0)) throw std::invalid_argument("make_prior: sigma > 0");

  const std::size_t W = static_cast<std::size_t>(grid.nx);
  const std::size_t D = static_cast<std::size_t>(grid.ny);
  const std::size_t H = static_cast<std::size_t>(grid.nz);
  if (out_skipped) *out_skipped = 0;
  if (out_uniform_fallback) *out_uniform_fallback = false;

  // Average of one-hot parent-voxel maps over usable key frames.
  LocationDistribution base{W, D, H, std::vector<double>(W * D * H, 0.0)};
  std::size_t used = 0, skipped = 0;
  for (const KeyFrame& k : track.key_frames) {
    auto cell = grid.parent_cell(k.position);
    if (!cell) {
      ++skipped;
      continue;
    }
    base.probs[base.index((*cell)[0], (*cell)[1], (*cell)[2])] += 1.0;
    ++used;
  }
  if (out_skipped) *out_skipped = skipped;
  if (used == 0) {
    if (out_uniform_fallback) *out_uniform_fallback = !track.key_frames.empty();
    return LocationDistribution::uniform(W, D, H);
  }
  for (double& v : base.probs) v /= static_cast<double>(used);

  // Truncated Gaussian kernel, zero-padded borders, one global renorm.
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int i = -radius; i <= radius; ++i)
    kernel[static_cast<std::size_t>(i + radius)] =
        std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));

  auto convolve_axis = [&](const std::vector<double>& src, std::size_t sx,
                           std::size_t sy, std::size_t sz, int axis) {
    std::vector<double> dst(src.size(), 0.0);
    const std::array<int, 3> dims{static_cast<int>(sx), static_cast<int>(sy),
                                  static_cast<int>(sz)};
    for (int x = 0; x < dims[0]; ++x)
      for (int y = 0; y < dims[1]; ++y)
        for (int z = 0; z < dims[2]; ++z) {
          double acc = 0.0;
          for (int o = -radius; o <= radius; ++o) {
            std::array<int, 3> q{x, y, z};
            q[static_cast<std::size_t>(axis)] += o;
            if (q[0] < 0 || q[0] >= dims[0] || q[1] < 0 || q[1] >= dims[1] ||
                q[2] < 0 || q[2] >= dims[2])
              continue;
            acc += kernel[static_cast<std::size_t>(o + radius)] *
                   src[(static_cast<std::size_t>(q[0]) * sy + q[1]) * sz +
                       q[2]];
          }
          dst[(static_cast<std::size_t>(x) * sy + y) * sz + z] = acc;
        }
    return dst;
  };

  std::vector<double> smoothed = convolve_axis(base.probs, W, D, H, 0);
  smoothed = convolve_axis(smoothed, W, D, H, 1);
  smoothed = convolve_axis(smoothed, W, D, H, 2);

  double total = 0.0;
  for (double v : smoothed) total += v;
  for (double& v : smoothed) v /= total;
  return LocationDistribution{W, D, H, std::move(smoothed)};
}

LocationDistribution downsample_distribution(const LocationDistribution& dist,
                                             int fx, int fy, int fz) {
  if (fx < 1 || fy < 1 || fz < 1)
    throw std::invalid_argument("downsample: factors must be >= 1");
  if (dist.w % fx != 0 || dist.d % fy != 0 || dist.h % fz != 0)
    throw std::invalid_argument("downsample: factors must divide dims");
  LocationDistribution out{dist.w / fx, dist.d / fy, dist.h / fz, {}};
  out.probs.assign(out.cells(), 0.0);
  for (std::size_t x = 0; x < dist.w; ++x)
    for (std::size_t y = 0; y < dist.d; ++y)
      for (std::size_t z = 0; z < dist.h; ++z)
        out.probs[out.index(x / fx, y / fy, z / fz)] +=
            dist.probs[dist.index(x, y, z)];
  return out;
}

CameraTrack parse_track(std::istream& in) {
  CameraTrack track;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    if (!have_header) {
      std::string word;
      ls >> word;
      if (word != "track")
        throw std::runtime_error("track parse error at line " +
                                 std::to_string(line_no) +
                                 ": expected header 'track'");
      have_header = true;
      continue;
    }
    std::string tag;
    ls >> tag;
    if (tag != "k")
      throw std::runtime_error("track parse error at line " +
                               std::to_string(line_no) +
                               ": unknown record '" + tag + "'");
    KeyFrame k;
    if (!(ls >> k.frame >> k.position.x >> k.position.y >> k.position.z))
      throw std::runtime_error("track parse error at line " +
                               std::to_string(line_no) +
                               ": malformed key frame");
    track.key_frames.push_back(k);
  }
  if (!have_header)
    throw std::runtime_error("track parse error: missing 'track' header");
  track.validate();
  return track;
}

void write_track(std::ostream& out, const CameraTrack& track) {
  out << "track\n";
  out.precision(17);
  for (const KeyFrame& k : track.key_frames)
    out << "k " << k.frame << " " << k.position.x << " " << k.position.y
        << " " << k.position.z << "\n";
}

CameraTrack load_track(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open track file: " + path);
  return parse_track(in);
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("unexpected end of binary stream");
  return v;
}

void write_f64s(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_f64s(std::istream& in, std::vector<double>& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw std::runtime_error("unexpected end of binary stream");
}

}  // namespace

void write_locd(std::ostream& out, const LocationDistribution& dist) {
  out.write("LOCD", 4);
  write_u32(out, static_cast<std::uint32_t>(dist.w));
  write_u32(out, static_cast<std::uint32_t>(dist.d));
  write_u32(out, static_cast<std::uint32_t>(dist.h));
  write_f64s(out, dist.probs);
}

LocationDistribution read_locd(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LOCD", 4) != 0)
    throw std::runtime_error("not a LOCD file");
  LocationDistribution d;
  d.w = read_u32(in);
  d.d = read_u32(in);
  d.h = read_u32(in);
  d.probs.resize(d.cells());
  read_f64s(in, d.probs);
  return d;
}

void save_locd(const std::string& path, const LocationDistribution& dist) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write LOCD file: " + path);
  write_locd(out, dist);
}

LocationDistribution load_locd(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open LOCD file: " + path);
  return read_locd(in);
}

}  // namespace hvr
