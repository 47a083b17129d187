#ifndef VULNSCREEN_MODEL_IO_HPP
#define VULNSCREEN_MODEL_IO_HPP

#include <string>

#include "vulnscreen/classifier.hpp"

namespace vulnscreen {

// Versioned model file (model_version: 1, format in docs/formats.md). Doubles
// are serialized with a round-tripping representation, so save -> load ->
// predict is bit-identical. Training diagnostics are not persisted.
std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(const std::string& text);

void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace vulnscreen

#endif  // VULNSCREEN_MODEL_IO_HPP
