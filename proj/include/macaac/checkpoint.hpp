#pragma once

// Parameter checkpoints: a JSON document
//
//   {"format": "macaac-checkpoint", "version": 1, "meta": {...},
//    "tensors": [{"name": "...", "shape": [r, c], "data": [...]}, ...]}
//
// Values are written with 17 significant digits, so a save/load round trip
// restores every float64 bit-for-bit.

#include <filesystem>

#include "json.hpp"
#include "macaac/nn.hpp"

namespace macaac {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  nn::NamedTensors tensors;

  // Throws SchemaError when the name is not present.
  const ad::Tensor& find(const std::string& name) const;
};

nlohmann::json checkpoint_to_json(const nn::NamedTensors& tensors, const nlohmann::json& meta);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const nn::NamedTensors& tensors,
                     const nlohmann::json& meta = nlohmann::json::object());
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies values into dst by name; every dst entry must be present with the
// same shape.
void restore(const Checkpoint& ckpt, const nn::NamedTensors& dst);

}  // namespace macaac
