#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "eventcube/sae/model.hpp"
#include "eventcube/sae/train.hpp"

namespace eventcube::sae {

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  SaeModel model;
  std::optional<AdamState<float>> optimizer;
  std::optional<TrainConfig> train_config;
};

/// `SAEC` magic, u16 version, u32 JSON header length, JSON descriptor
/// (architecture, seed, blob sizes, training config), float32 parameters in
/// declaration order, float32 running statistics, then the optional Adam
/// moments. All little-endian.
std::vector<std::uint8_t> encode_checkpoint(const SaeModel& model, const AdamState<float>* optimizer = nullptr,
                                            const TrainConfig* train_config = nullptr);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const SaeModel& model, const AdamState<float>* optimizer, const TrainConfig* train_config,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace eventcube::sae
