#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mql/learn.hpp"

namespace mql {

inline constexpr int kModelFormatVersion = 1;

struct ModelSummary {
  std::string name;
  MlType ml_type = MlType::Pred;
  std::string algorithm;
  std::string created_at;
  std::optional<double> score;  // normalized score of the reference metrics
};

// Writes <store>/<name>/manifest.json and params.json through a temporary
// directory renamed into place. Throws NameCollision unless `replace`.
std::filesystem::path save_model(const Model& m, const std::filesystem::path& store,
                                 bool replace = false);

// Throws UnknownModel or CorruptManifest.
Model load_model(std::string_view name, const std::filesystem::path& store);

bool model_exists(std::string_view name, const std::filesystem::path& store);

// Sorted by name; a missing store directory lists as empty.
std::vector<ModelSummary> list_models(const std::filesystem::path& store);

// Throws UnknownModel.
void delete_model(std::string_view name, const std::filesystem::path& store);

// Letters, digits, `_`, `-` and `.`; not starting with a dot.
bool valid_model_name(std::string_view name);

// JSON documents as written to disk.
std::string manifest_json(const Model& m);
std::string params_json(const Model& m);
Model model_from_json(std::string_view manifest, std::string_view params);

}  // namespace mql
