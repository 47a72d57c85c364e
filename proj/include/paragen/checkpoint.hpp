#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "paragen/model.hpp"

namespace paragen {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CorruptCheckpointError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CheckpointWidthError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::uint64_t vocab_fingerprint = 0;
};

// Layout, all little-endian:
//   "CPFG" | u16 version | u64 vocab, embedding, hidden, state, attention |
//   u64 vocab fingerprint | f64 payload of every tensor in declared order
std::string serialize_checkpoint(const ModelParams& params, std::uint64_t vocab_fingerprint);
Checkpoint parse_checkpoint(std::string_view bytes, const std::optional<ModelDims>& expected = {});

void save_checkpoint(const ModelParams& params, std::uint64_t vocab_fingerprint,
                     const std::filesystem::path& path);
// With `expected` set, differing widths raise CheckpointWidthError naming both.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelDims>& expected = {});

} // namespace paragen
