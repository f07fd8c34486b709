#include "hvr/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hvr {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("checkpoint: unexpected end of stream");
  return v;
}

}  // namespace

void write_checkpoint(
    std::ostream& out,
    const std::vector<std::pair<std::string, Tensor>>& named) {
  out.write("HVRP", 4);
  write_u32(out, kCheckpointVersion);
  write_u32(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, tensor] : named) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(tensor.dims().size()));
    for (std::size_t d : tensor.dims())
      write_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(tensor.values().data()),
              static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  }
}

std::vector<std::pair<std::string, Tensor>> read_checkpoint(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HVRP", 4) != 0)
    throw std::runtime_error("not an HVRP checkpoint");
  const std::uint32_t version = read_u32(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  const std::uint32_t count = read_u32(in);
  std::vector<std::pair<std::string, Tensor>> named;
  named.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const std::uint32_t rank = read_u32(in);
    if (rank > 8) throw std::runtime_error("checkpoint: implausible rank");
    Shape dims;
    std::size_t total = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      dims.push_back(read_u32(in));
      total *= dims.back();
    }
    std::vector<double> values(total);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(total * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor block");
    named.emplace_back(std::move(name),
                       Tensor::from_values(std::move(dims), std::move(values)));
  }
  return named;
}

void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, Tensor>>& named) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  write_checkpoint(out, named);
}

std::vector<std::pair<std::string, Tensor>> load_checkpoint(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return read_checkpoint(in);
}

}  // namespace hvr
