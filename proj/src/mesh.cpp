#include "hvr/mesh.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hvr {

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("mesh parse error at line " +
                           std::to_string(line_no) + ": " + what);
}

}  // namespace

void SemanticMesh::validate() const {
  if (vertices.empty()) throw std::invalid_argument("mesh: zero vertices");
  if (num_classes < 2)
    throw std::invalid_argument("mesh: needs at least one non-empty class");
  for (const Vertex& v : vertices) {
    if (v.label < 1 || v.label >= num_classes)
      throw std::invalid_argument("mesh: vertex label " +
                                  std::to_string(v.label) +
                                  " outside [1," +
                                  std::to_string(num_classes) + ")");
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
      throw std::invalid_argument("mesh: non-finite vertex coordinate");
  }
  for (const auto& f : faces)
    for (int idx : f)
      if (idx < 0 || static_cast<std::size_t>(idx) >= vertices.size())
        throw std::invalid_argument("mesh: face index out of range");
}

SemanticMesh parse_mesh(std::istream& in) {
  SemanticMesh mesh;
  mesh.num_classes = 0;
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
      int c = 0;
      if (word != "mesh" || !(ls >> word) || sscanf(word.c_str(), "C=%d", &c) != 1)
        parse_fail(line_no, "expected header 'mesh C=<int>'");
      if (c < 2) parse_fail(line_no, "class count must be >= 2");
      mesh.num_classes = c;
      have_header = true;
      continue;
    }

    std::string tag;
    ls >> tag;
    if (tag == "v") {
      SemanticMesh::Vertex v;
      if (!(ls >> v.x >> v.y >> v.z >> v.label))
        parse_fail(line_no, "malformed vertex record");
      if (v.label == 0)
        parse_fail(line_no, "label 0 is reserved for empty space");
      if (v.label < 0 || v.label >= mesh.num_classes)
        parse_fail(line_no, "label " + std::to_string(v.label) +
                                " outside [1," +
                                std::to_string(mesh.num_classes) + ")");
      if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
        parse_fail(line_no, "non-finite coordinate");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      if (!(ls >> f[0] >> f[1] >> f[2]))
        parse_fail(line_no, "malformed face record");
      mesh.faces.push_back(f);
    } else {
      parse_fail(line_no, "unknown record type '" + tag + "'");
    }
  }

  if (!have_header) throw std::runtime_error("mesh parse error: empty stream");
  if (mesh.vertices.empty())
    throw std::runtime_error("mesh parse error: zero vertices");
  mesh.validate();
  return mesh;
}

void write_mesh(std::ostream& out, const SemanticMesh& mesh) {
  out << "mesh C=" << mesh.num_classes << "\n";
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices)
    out << "v " << v.x << " " << v.y << " " << v.z << " " << v.label << "\n";
  for (const auto& f : mesh.faces)
    out << "f " << f[0] << " " << f[1] << " " << f[2] << "\n";
}

SemanticMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  return parse_mesh(in);
}

void save_mesh(const std::string& path, const SemanticMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  write_mesh(out, mesh);
}

}  // namespace hvr
