#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sysrev/entrez.hpp"

namespace sysrev {

/// Service and CLI configuration. Loaded from a JSON file, then overridden
/// by SYSREV_* environment variables. Relative paths in the file resolve
/// against the file's directory.
struct Config {
  std::filesystem::path graph_path;
  std::filesystem::path data_dir = "sysrev-data";
  std::optional<std::filesystem::path> corpus_path;  // default LOCAL backend corpus
  std::optional<std::string> ner_url;
  std::optional<std::string> mlm_url;
  std::optional<std::string> embedding_url;
  EntrezConfig entrez;
  double threshold = 0.5;
  std::size_t max_mask_terms = 3;
  std::size_t n_min = 20;
  std::size_t k = 5;
  std::size_t retmax = 100;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> static_dir;  // optional web client bundle
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Process environment.
std::optional<std::string> getenv_lookup(const std::string& name);

/// Throws ValidationError for wrongly typed fields.
Config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);
void apply_env_overrides(Config& config, const EnvLookup& env = getenv_lookup);

nlohmann::json to_json(const Config& config);

}  // namespace sysrev
