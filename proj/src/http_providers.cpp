#include "sysrev/http_providers.hpp"

#include <cmath>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sysrev/error.hpp"

namespace sysrev {
namespace {

using nlohmann::json;

json post_json(const std::string& base_url, const std::string& route, const json& body,
               std::chrono::milliseconds timeout) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url, m, url_re)) throw ProviderUnavailable("bad provider URL " + base_url);
  std::string prefix = m[2].matched ? m[2].str() : "";
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client cli(m[1].str());
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  auto res = cli.Post(prefix + route, body.dump(), "application/json");
  if (!res) throw ProviderUnavailable(base_url + route + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw ProviderUnavailable(base_url + route + ": status " + std::to_string(res->status));
  auto doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ProviderUnavailable(base_url + route + ": response is not a JSON object");
  return doc;
}

}  // namespace

std::vector<NerSpan> HttpNerProvider::find(std::string_view text) {
  auto doc = post_json(base_url_, "/ner", json{{"text", text}}, timeout_);
  if (!doc.contains("entities") || !doc["entities"].is_array()) throw ProviderUnavailable("ner response lacks 'entities'");
  std::vector<NerSpan> out;
  try {
    for (const auto& e : doc["entities"])
      out.push_back(NerSpan{e.at("surface").get<std::string>(), e.at("start").get<std::size_t>(),
                            e.at("end").get<std::size_t>()});
  } catch (const json::exception& e) {
    throw ProviderUnavailable(std::string("malformed ner entity: ") + e.what());
  }
  return out;
}

std::vector<std::string> HttpMaskProvider::fill(std::string_view text, std::size_t mask_start, std::size_t mask_end,
                                                std::size_t top_k) {
  auto doc = post_json(base_url_, "/fill", json{{"text", text}, {"mask_span", {mask_start, mask_end}}, {"top_k", top_k}},
                       timeout_);
  if (!doc.contains("terms") || !doc["terms"].is_array()) throw ProviderUnavailable("fill response lacks 'terms'");
  std::vector<std::string> out;
  for (const auto& t : doc["terms"])
    if (t.is_string()) out.push_back(t.get<std::string>());
  return out;
}

Vector HttpEmbedder::embed(std::string_view text) {
  std::string s(text);
  return embed_batch(std::span<const std::string>(&s, 1)).front();
}

std::vector<Vector> HttpEmbedder::embed_batch(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  auto doc = post_json(base_url_, "/embed", json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}}, timeout_);
  if (!doc.contains("vectors") || !doc["vectors"].is_array() || doc["vectors"].size() != texts.size())
    throw ProviderUnavailable("embed response lacks one vector per text");

  std::vector<Vector> out;
  try {
    for (const auto& v : doc["vectors"]) {
      Vector vec{v.get<std::vector<double>>()};
      for (double x : vec.components)
        if (!std::isfinite(x)) throw ProviderUnavailable("embedding has non-finite component");
      out.push_back(std::move(vec));
    }
  } catch (const json::exception& e) {
    throw ProviderUnavailable(std::string("malformed embedding: ") + e.what());
  }

  std::lock_guard lock(mu_);
  for (const auto& v : out) {
    if (!dimension_) dimension_ = v.dim();
    if (v.dim() != *dimension_) throw DimensionMismatch(*dimension_, v.dim());
  }
  return out;
}

std::optional<std::size_t> HttpEmbedder::dimension() const {
  std::lock_guard lock(mu_);
  return dimension_;
}

}  // namespace sysrev
