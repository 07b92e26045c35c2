#pragma once

#include <string>

#include "aston/model.hpp"

namespace aston {

/// Checkpoint container: magic "ASTON1", a u32 format version, a u64-length
/// JSON header (config, vocabularies, time stats, max trace length, tensor
/// manifest) and the named parameter tensors as little-endian 32-bit floats
/// in manifest order. Round-trips preserve every parameter bit.
struct CheckpointMeta {
  double best_val_loss = 0.0;
  int best_epoch = 0;
};

void save_checkpoint(AstonModel& model, const std::string& path, const CheckpointMeta& meta = {});

AstonModel load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr);

}  // namespace aston
