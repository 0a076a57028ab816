#ifndef MULTIKE_CHECKPOINT_HPP
#define MULTIKE_CHECKPOINT_HPP

#include <map>
#include <string>

#include "multike/common.hpp"
#include "multike/tensor.hpp"

namespace multike {

// Binary snapshot of named tensors. Layout, all little-endian:
//   "MKEC" | u32 version | u32 dim | u32 count
//   per tensor: u32 name_len | name | u32 rows | u32 cols | rows*cols f32
// Values are stored as 32-bit floats; loading widens back to double.
struct Checkpoint {
    std::uint32_t dim = 0;
    std::map<std::string, Tensor> tensors;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace multike

#endif
