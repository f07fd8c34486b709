#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "hvr/grid.hpp"

namespace hvr {

// Labeled vertex cloud. Label 0 is reserved for empty space and never appears
// on a vertex; valid labels are 1..num_classes-1.
struct SemanticMesh {
  struct Vertex {
    double x = 0.0, y = 0.0, z = 0.0;
    int label = 1;
  };

  std::vector<Vertex> vertices;
  std::vector<std::array<int, 3>> faces;  // parsed but unused by voxelization
  int num_classes = 2;

  void validate() const;
};

// Line format: header "mesh C=<int>", then "v <x> <y> <z> <label>" records,
// optional "f <i> <j> <k>" faces (0-based) and "#" comments.
SemanticMesh parse_mesh(std::istream& in);
void write_mesh(std::ostream& out, const SemanticMesh& mesh);

SemanticMesh load_mesh(const std::string& path);
void save_mesh(const std::string& path, const SemanticMesh& mesh);

}  // namespace hvr
