#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "sdml/embedder.hpp"
#include "sdml/trainer.hpp"

namespace sdml {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout (little-endian):
///   "SDMLCKPT" | u32 version
///   u32 length + architecture text ("key=value" lines)
///   u32 length + trainer state text
///   u32 tensor count, then per tensor:
///     u32 name length + name | u8 dtype (1 = f64) | u32 rank | u64 dims[rank]
///     | row-major f64 payload
///   "SDMLEND!"
struct Checkpoint {
  EmbedderModel model;
  TrainerState state;
};

std::string serialize_checkpoint(const EmbedderModel& model, const TrainerState& state);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const EmbedderModel& model, const TrainerState& state,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sdml
