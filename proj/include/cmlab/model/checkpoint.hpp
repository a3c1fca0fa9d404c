#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cmlab/model/transformer.hpp"
#include "cmlab/nn/optim.hpp"

namespace cmlab::model {

inline constexpr const char* kCheckpointFormat = "cmlab-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct TrainingState {
  nn::AdamState optimizer;
  std::string rng_state;
  std::uint64_t step = 0;
};

struct LoadedCheckpoint {
  std::unique_ptr<Transformer> model;
  std::optional<TrainingState> training;
  nlohmann::ordered_json extras;  // task data such as vocabularies
};

/// Self-describing document: format tag, version, model spec, parameter
/// blocks (name, shape, row-major values), optional optimizer and RNG state,
/// and caller-supplied extras.
nlohmann::ordered_json checkpoint_to_json(const Transformer& model, const TrainingState* training,
                                          const nlohmann::ordered_json& extras);
/// Throws DataError on a wrong format tag, unsupported version, or
/// parameter blocks that do not match the spec.
LoadedCheckpoint checkpoint_from_json(const nlohmann::ordered_json& j);

void save_checkpoint(const std::string& path, const Transformer& model, const TrainingState* training,
                     const nlohmann::ordered_json& extras);
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace cmlab::model
