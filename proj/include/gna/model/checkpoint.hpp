#pragma once

#include <filesystem>
#include <string>

#include "gna/model/transformer.hpp"
#include "gna/random.hpp"

namespace gna::model {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  Transformer model;
  Rng rng;
};

// Structured-text (JSON) dump of the config, every parameter tensor and the RNG state.
// Doubles are written in shortest round-trip form, so save/load is bit-exact.
std::string checkpoint_to_string(const Transformer& model, const Rng& rng);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Transformer& model, const Rng& rng);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gna::model
