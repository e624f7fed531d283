#pragma once

#include <string>

#include "somefs/ensemble.hpp"
#include "somefs/rulemine.hpp"

namespace somefs {

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON model document. Doubles round-trip exactly, so a
/// loaded model predicts identically to the saved one.
std::string model_to_json(const EnsembleModel& model);
EnsembleModel model_from_json(const std::string& json_text);

/// Write/read through the filesystem; writes go to a temp file first and
/// are renamed into place.
void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(const std::string& path);

/// One JSON object per stable rule: items, class, support, firing_strength.
std::string stable_rules_to_json(const std::vector<StableRule>& rules,
                                 const std::vector<std::string>& feature_names,
                                 const std::vector<std::string>& class_names);

/// Temp-file-then-rename text write.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace somefs
