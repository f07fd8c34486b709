#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hvr/tensor.hpp"

namespace hvr {

// Parameter checkpoint: magic "HVRP", version u32, count u32, then per tensor
// a length-prefixed name, u32 rank, u32 dims..., f64 values.
constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out,
                      const std::vector<std::pair<std::string, Tensor>>& named);
std::vector<std::pair<std::string, Tensor>> read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor>>& named);
std::vector<std::pair<std::string, Tensor>> load_checkpoint(
    const std::string& path);

}  // namespace hvr
