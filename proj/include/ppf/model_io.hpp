#pragma once

#include <string>

#include "ppf/forest.hpp"

namespace ppf {

// Versioned JSON model format (schema_version 1): config, standardization
// statistics, class/variable names, per-tree seeds and node arrays with
// sparse alpha maps. Loading a saved model reproduces predictions
// bit-for-bit. OOB masks are not stored; regenerate_bootstraps replays
// the per-tree seeds against the training data instead.
void save_model(const PPforestModel& model, const std::string& path);
PPforestModel load_model(const std::string& path);

std::string model_to_json(const PPforestModel& model);
PPforestModel model_from_json(const std::string& text);

// Rebuilds randomness[k].bootstrap for a loaded model from the stored
// tree seeds; d must be the standardized training dataset (hash-checked).
void regenerate_bootstraps(PPforestModel& model, const Dataset& d);

}  // namespace ppf
