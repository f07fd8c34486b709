#include "hvr/episode.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hvr {

std::size_t EpisodeClip::obs_size() const {
  std::size_t n = 1;
  for (std::size_t d : obs_dims) n *= d;
  return n;
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("episode: unexpected end of stream");
  return v;
}

std::string next_content_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }
  throw std::runtime_error("episode: unexpected end of stream");
}

}  // namespace

void write_episode(std::ostream& out, const EpisodeClip& clip,
                   int num_actions) {
  out << "episode N=" << num_actions << "\n";
  out << "a " << clip.label << "\n";
  out.precision(17);
  if (clip.true_position)
    out << "p " << clip.true_position->x << " " << clip.true_position->y
        << " " << clip.true_position->z << "\n";
  for (const KeyFrame& k : clip.track.key_frames)
    out << "k " << k.frame << " " << k.position.x << " " << k.position.y
        << " " << k.position.z << "\n";
  out << "obs\n";
  out.write("OBS0", 4);
  write_u32(out, static_cast<std::uint32_t>(clip.obs_dims.size()));
  for (std::size_t d : clip.obs_dims)
    write_u32(out, static_cast<std::uint32_t>(d));
  out.write(reinterpret_cast<const char*>(clip.obs.data()),
            static_cast<std::streamsize>(clip.obs.size() * sizeof(double)));
  out << "\n";
}

EpisodeClip read_episode(std::istream& in, int* out_num_actions) {
  EpisodeClip clip;

  std::string line = next_content_line(in);
  int n_actions = 0;
  if (sscanf(line.c_str(), "episode N=%d", &n_actions) != 1 || n_actions < 1)
    throw std::runtime_error("episode: bad header '" + line + "'");
  if (out_num_actions) *out_num_actions = n_actions;

  bool have_label = false;
  while (true) {
    line = next_content_line(in);
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "a") {
      if (!(ls >> clip.label) || clip.label < 0 || clip.label >= n_actions)
        throw std::runtime_error("episode: bad label line '" + line + "'");
      have_label = true;
    } else if (tag == "p") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z))
        throw std::runtime_error("episode: bad position line");
      clip.true_position = p;
    } else if (tag == "k") {
      KeyFrame k;
      if (!(ls >> k.frame >> k.position.x >> k.position.y >> k.position.z))
        throw std::runtime_error("episode: bad key-frame line");
      clip.track.key_frames.push_back(k);
    } else if (tag == "obs") {
      break;
    } else {
      throw std::runtime_error("episode: unknown record '" + tag + "'");
    }
  }
  if (!have_label) throw std::runtime_error("episode: missing label line");

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "OBS0", 4) != 0)
    throw std::runtime_error("episode: missing observation block");
  const std::uint32_t rank = read_u32(in);
  if (rank == 0 || rank > 8)
    throw std::runtime_error("episode: implausible observation rank");
  std::size_t total = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    clip.obs_dims.push_back(read_u32(in));
    total *= clip.obs_dims.back();
  }
  clip.obs.resize(total);
  in.read(reinterpret_cast<char*>(clip.obs.data()),
          static_cast<std::streamsize>(total * sizeof(double)));
  if (!in) throw std::runtime_error("episode: truncated observation block");
  in.get();  // trailing newline
  clip.track.validate();
  return clip;
}

void save_episodes(const std::string& path,
                   const std::vector<EpisodeClip>& episodes, int num_actions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write episode file: " + path);
  out << "episodes " << episodes.size() << "\n";
  for (const EpisodeClip& e : episodes) write_episode(out, e, num_actions);
}

std::vector<EpisodeClip> load_episodes(const std::string& path,
                                       const GridSpec& grid, double sigma,
                                       int* out_num_actions) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open episode file: " + path);
  std::string line = next_content_line(in);
  std::size_t count = 0;
  if (sscanf(line.c_str(), "episodes %zu", &count) != 1)
    throw std::runtime_error("episode file: bad container header");
  std::vector<EpisodeClip> episodes;
  episodes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    int n = 0;
    EpisodeClip clip = read_episode(in, &n);
    if (out_num_actions) *out_num_actions = n;
    clip.prior = make_prior(clip.track, grid, sigma);
    episodes.push_back(std::move(clip));
  }
  return episodes;
}

}  // namespace hvr
