#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fourierfed/tensor.hpp"

namespace fourierfed {

// Checkpoint layout (little-endian):
//   u32 version (= 1)
//   u32 spec_id_len, char spec_id[spec_id_len]
//   u32 tensor_count
//   per tensor, in name order:
//     u32 name_len, char name[name_len], u32 rank, u64 dims[rank], f64 values[prod(dims)]
//   u64 checksum   FNV-1a 64 over every preceding byte
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    std::string spec_id;
    NamedTensorMap params;
};

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n);

std::vector<std::uint8_t> encode_checkpoint(const NamedTensorMap& params, const std::string& spec_id);

/// Throws kCorruptCheckpoint on truncation, trailing bytes, or checksum mismatch and
/// kUnsupportedVersion for any version other than kCheckpointVersion.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const NamedTensorMap& params, const std::string& path, const std::string& spec_id = "mlp");
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fourierfed
