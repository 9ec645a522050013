#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "dialweight/params.hpp"

namespace dialweight {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary container for a trained model; byte layout in docs/checkpoint_format.md.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t vocab_fingerprint = 0;
  nlohmann::json metadata = nlohmann::json::object();  // model kind + architecture
  ParamSet params;                                      // gradients are not stored
  std::map<std::string, Tensor> optimizer_state;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Hash of the serialized bytes; identifies the model that produced a weight.
std::uint64_t checkpoint_fingerprint(const Checkpoint& ckpt);

std::string hex64(std::uint64_t v);

}  // namespace dialweight
