#pragma once

#include <iosfwd>
#include <string>

#include "hvr/location.hpp"

namespace hvr {

// Top-down maximum projection of a 3D heatmap as a plain-text PGM (P2) image:
// one pixel per (x,y) column, value = max over z, scaled so the global peak
// maps to 255. Rows run along y, columns along x.
void render_topdown_pgm(std::ostream& out, const LocationDistribution& dist);
void save_topdown_pgm(const std::string& path,
                      const LocationDistribution& dist);

}  // namespace hvr
