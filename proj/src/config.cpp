#include "sysrev/config.hpp"

#include <cstdlib>
#include <fstream>

#include "sysrev/error.hpp"

namespace sysrev {
namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j[key].is_null()) return;
  try {
    out = j[key].get<T>();
  } catch (const json::exception&) {
    throw ValidationError(key, "has the wrong type");
  }
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key) || j[key].is_null()) return;
  T value{};
  read(j, key, value);
  out = value;
}

std::size_t parse_size(const std::string& name, const std::string& v) {
  try {
    std::size_t used = 0;
    auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ValidationError(name, "not a non-negative integer: " + v);
  }
}

double parse_double(const std::string& name, const std::string& v) {
  try {
    std::size_t used = 0;
    auto d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError(name, "not a number: " + v);
  }
}

}  // namespace

std::optional<std::string> getenv_lookup(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

Config config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config", "must be a JSON object");
  Config c;
  std::string s;
  if (j.contains("graph")) {
    read(j, "graph", s);
    c.graph_path = resolve(base_dir, s);
  }
  if (j.contains("data_dir")) {
    read(j, "data_dir", s);
    c.data_dir = resolve(base_dir, s);
  }
  if (j.contains("corpus") && !j["corpus"].is_null()) {
    read(j, "corpus", s);
    c.corpus_path = resolve(base_dir, s);
  }
  if (j.contains("static_dir") && !j["static_dir"].is_null()) {
    read(j, "static_dir", s);
    c.static_dir = resolve(base_dir, s);
  }
  if (j.contains("providers")) {
    const auto& p = j["providers"];
    read_optional(p, "ner", c.ner_url);
    read_optional(p, "mlm", c.mlm_url);
    read_optional(p, "embedding", c.embedding_url);
  }
  if (j.contains("entrez")) {
    const auto& e = j["entrez"];
    read(e, "base_url", c.entrez.base_url);
    read_optional(e, "api_key", c.entrez.api_key);
    read_optional(e, "email", c.entrez.email);
    read(e, "tool", c.entrez.tool);
    read(e, "requests_per_second", c.entrez.requests_per_second);
    read(e, "max_retries", c.entrez.max_retries);
    long long ms = c.entrez.timeout.count();
    read(e, "timeout_ms", ms);
    c.entrez.timeout = std::chrono::milliseconds(ms);
    ms = c.entrez.backoff.count();
    read(e, "backoff_ms", ms);
    c.entrez.backoff = std::chrono::milliseconds(ms);
  }
  read(j, "threshold", c.threshold);
  read(j, "max_mask_terms", c.max_mask_terms);
  read(j, "n_min", c.n_min);
  read(j, "k", c.k);
  read(j, "retmax", c.retmax);
  read(j, "host", c.host);
  read(j, "port", c.port);
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open config " + path.string());
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ValidationError("config", "not valid JSON: " + path.string());
  return config_from_json(j, path.parent_path());
}

void apply_env_overrides(Config& c, const EnvLookup& env) {
  if (auto v = env("SYSREV_GRAPH")) c.graph_path = *v;
  if (auto v = env("SYSREV_DATA_DIR")) c.data_dir = *v;
  if (auto v = env("SYSREV_CORPUS")) c.corpus_path = *v;
  if (auto v = env("SYSREV_NER_URL")) c.ner_url = *v;
  if (auto v = env("SYSREV_MLM_URL")) c.mlm_url = *v;
  if (auto v = env("SYSREV_EMBEDDING_URL")) c.embedding_url = *v;
  if (auto v = env("SYSREV_ENTREZ_BASE")) c.entrez.base_url = *v;
  if (auto v = env("SYSREV_ENTREZ_API_KEY")) c.entrez.api_key = *v;
  if (auto v = env("SYSREV_RATE_LIMIT")) c.entrez.requests_per_second = parse_double("SYSREV_RATE_LIMIT", *v);
  if (auto v = env("SYSREV_THRESHOLD")) c.threshold = parse_double("SYSREV_THRESHOLD", *v);
  if (auto v = env("SYSREV_N_MIN")) c.n_min = parse_size("SYSREV_N_MIN", *v);
  if (auto v = env("SYSREV_K")) c.k = parse_size("SYSREV_K", *v);
  if (auto v = env("SYSREV_RETMAX")) c.retmax = parse_size("SYSREV_RETMAX", *v);
  if (auto v = env("SYSREV_HOST")) c.host = *v;
  if (auto v = env("SYSREV_PORT")) c.port = static_cast<int>(parse_size("SYSREV_PORT", *v));
}

json to_json(const Config& c) {
  auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
  return json{{"graph", c.graph_path.string()},
              {"data_dir", c.data_dir.string()},
              {"corpus", c.corpus_path ? json(c.corpus_path->string()) : json(nullptr)},
              {"providers", {{"ner", opt(c.ner_url)}, {"mlm", opt(c.mlm_url)}, {"embedding", opt(c.embedding_url)}}},
              {"entrez",
               {{"base_url", c.entrez.base_url},
                {"requests_per_second", c.entrez.requests_per_second},
                {"max_retries", c.entrez.max_retries}}},
              {"threshold", c.threshold},
              {"max_mask_terms", c.max_mask_terms},
              {"n_min", c.n_min},
              {"k", c.k},
              {"retmax", c.retmax}};
}

}  // namespace sysrev
