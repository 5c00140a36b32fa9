#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgnet/model.hpp"

namespace sgnet {

// SGNR checkpoint layout (all scalars little-endian):
//   "SGNR" | u32 version |
//   config: u32 channels, sdb_count, scale, res_blocks, attention_ratio | u64 seed |
//           f64 lambda1, lambda2, gamma1, gamma2 |
//   per parameter, in lexicographic name order:
//           u32 name_len | name bytes | u32 rank | u32 extents[rank] | f64 values[prod(extents)]
inline constexpr uint32_t kCheckpointVersion = 1;
inline constexpr size_t kCheckpointConfigBytes = 5 * 4 + 8 + 4 * 8;

struct Checkpoint {
    ParamStore params;
    ModelConfig config;
};

std::vector<unsigned char> encode_checkpoint(const ParamStore& store, const ModelConfig& config);
Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const ParamStore& store, const ModelConfig& config, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Builds a model from the stored config and copies the stored weights into it.
Sgnet load_model(const std::string& path);

}  // namespace sgnet
