#include "hvr/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace hvr {

void render_topdown_pgm(std::ostream& out, const LocationDistribution& dist) {
  if (dist.probs.empty()) throw std::invalid_argument("pgm: empty heatmap");
  std::vector<double> top(dist.w * dist.d, 0.0);
  for (std::size_t x = 0; x < dist.w; ++x)
    for (std::size_t y = 0; y < dist.d; ++y) {
      double mx = 0.0;
      for (std::size_t z = 0; z < dist.h; ++z)
        mx = std::max(mx, dist.probs[dist.index(x, y, z)]);
      top[y * dist.w + x] = mx;
    }
  const double peak = *std::max_element(top.begin(), top.end());
  out << "P2\n" << dist.w << " " << dist.d << "\n255\n";
  for (std::size_t y = 0; y < dist.d; ++y) {
    for (std::size_t x = 0; x < dist.w; ++x) {
      const int v = peak > 0.0
                        ? static_cast<int>(std::lround(
                              255.0 * top[y * dist.w + x] / peak))
                        : 0;
      out << v << (x + 1 < dist.w ? " " : "\n");
    }
  }
}

void save_topdown_pgm(const std::string& path,
                      const LocationDistribution& dist) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write PGM file: " + path);
  render_topdown_pgm(out, dist);
}

}  // namespace hvr
