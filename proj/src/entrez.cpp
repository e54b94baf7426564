#include "sysrev/entrez.hpp"

#include <algorithm>
#include <regex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sysrev/error.hpp"
#include "sysrev/text.hpp"

namespace sysrev {
namespace {

namespace pt = boost::property_tree;

std::string excerpt(const std::string& body) { return body.size() <= 200 ? body : body.substr(0, 200); }

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string collapse(const std::string& s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

RateLimiter::RateLimiter(double per_second, double burst)
    : rate_(per_second), capacity_(std::max(1.0, burst)), tokens_(std::max(1.0, burst)), last_(Clock::now()) {
  if (!(per_second > 0.0)) throw ValidationError("requests_per_second", "must be positive");
}

void RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  auto now = Clock::now();
  tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
  last_ = now;
  if (tokens_ < 1.0) {
    auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    std::this_thread::sleep_for(wait);
    tokens_ = 1.0;
    last_ = Clock::now();
  }
  tokens_ -= 1.0;
}

EntrezClient::EntrezClient(EntrezConfig config, std::shared_ptr<RateLimiter> limiter)
    : config_(std::move(config)), limiter_(std::move(limiter)) {
  if (!limiter_) limiter_ = std::make_shared<RateLimiter>(config_.requests_per_second);
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.base_url, m, url_re)) throw ValidationError("base_url", "not an http(s) URL: " + config_.base_url);
  scheme_host_port_ = m[1].str();
  path_prefix_ = m[2].matched ? m[2].str() : "";
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string EntrezClient::get(const std::string& endpoint,
                              const std::vector<std::pair<std::string, std::string>>& params) {
  httplib::Params query;
  for (const auto& [k, v] : params) query.emplace(k, v);
  query.emplace("tool", config_.tool);
  if (config_.email) query.emplace("email", *config_.email);
  if (config_.api_key) query.emplace("api_key", *config_.api_key);

  int last_status = 0;
  std::string last_body = "no response";
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 1)));
    limiter_->acquire();

    httplib::Client cli(scheme_host_port_);
    cli.set_connection_timeout(config_.timeout);
    cli.set_read_timeout(config_.timeout);
    auto res = cli.Get(path_prefix_ + "/" + endpoint, query, httplib::Headers{});
    if (!res) {
      last_status = 0;
      last_body = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_status = res->status;
    last_body = excerpt(res->body);
    if (res->status != 429 && res->status < 500) throw BackendError(res->status, last_body);
  }
  if (last_status == 429) throw RateLimited(last_status, last_body);
  throw BackendError(last_status, last_body);
}

SearchHits EntrezClient::remote_search(const std::string& rendered_query, std::size_t retmax) {
  if (retmax < 1) throw ValidationError("retmax", "must be at least 1");
  auto body = get("esearch.fcgi", {{"db", "pubmed"},
                                   {"term", rendered_query},
                                   {"retmax", std::to_string(retmax)},
                                   {"retmode", "json"}});
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("esearchresult")) throw BackendError(200, "unexpected esearch body: " + excerpt(body));
  const auto& r = doc["esearchresult"];
  if (r.contains("ERROR")) throw BackendError(200, r["ERROR"].dump());

  SearchHits hits;
  if (r.contains("count")) {
    const auto& c = r["count"];
    hits.count = c.is_string() ? std::stoull(c.get<std::string>()) : c.get<std::size_t>();
  }
  if (r.contains("idlist"))
    for (const auto& id : r["idlist"]) {
      if (hits.ids.size() == retmax) break;
      hits.ids.push_back(id.is_string() ? id.get<std::string>() : id.dump());
    }
  hits.count = std::max(hits.count, hits.ids.size());
  return hits;
}

FetchResult EntrezClient::remote_fetch(const std::vector<std::string>& ids) {
  if (ids.empty()) throw ValidationError("ids", "must be non-empty");
  std::unordered_map<std::string, Article> by_id;
  const std::size_t chunk = std::max<std::size_t>(1, config_.fetch_chunk);
  for (std::size_t i = 0; i < ids.size(); i += chunk) {
    std::vector<std::string> batch(ids.begin() + static_cast<std::ptrdiff_t>(i),
                                   ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), i + chunk)));
    auto body = get("efetch.fcgi", {{"db", "pubmed"}, {"id", join(batch, ",")}, {"rettype", "abstract"}, {"retmode", "xml"}});
    std::vector<Article> parsed;
    try {
      parsed = parse_pubmed_xml(body);
    } catch (const pt::xml_parser_error& e) {
      throw BackendError(200, std::string("unparseable efetch body: ") + e.what());
    }
    for (auto& a : parsed) by_id.emplace(a.external_id, std::move(a));
  }
  FetchResult out;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      out.missing.push_back(id);
    } else {
      out.articles.push_back(it->second);
    }
  }
  return out;
}

std::vector<Article> parse_pubmed_xml(std::string_view xml) {
  // Inline markup (<i>, <sup>, ...) would split AbstractText into children.
  static const std::regex doctype(R"(<!DOCTYPE[^>]*>)");
  static const std::regex inline_tags(R"(</?(i|b|u|sup|sub|em|strong|mml:[A-Za-z]+)(\s[^>]*)?>)");
  std::string cleaned = std::regex_replace(std::string(xml), doctype, "");
  cleaned = std::regex_replace(cleaned, inline_tags, "");

  std::istringstream in(cleaned);
  pt::ptree tree;
  pt::read_xml(in, tree);

  std::vector<Article> out;
  auto set = tree.get_child_optional("PubmedArticleSet");
  if (!set) return out;
  for (const auto& [name, node] : *set) {
    if (name != "PubmedArticle") continue;
    const auto& citation = node.get_child("MedlineCitation", pt::ptree{});
    Article a;
    a.external_id = collapse(citation.get<std::string>("PMID", ""));
    a.title = collapse(citation.get<std::string>("Article.ArticleTitle", ""));
    std::vector<std::string> paragraphs;
    if (auto abs = citation.get_child_optional("Article.Abstract"))
      for (const auto& [tag, text] : *abs)
        if (tag == "AbstractText") {
          auto label = text.get<std::string>("<xmlattr>.Label", "");
          auto body = collapse(text.get_value<std::string>());
          paragraphs.push_back(label.empty() ? body : label + ": " + body);
        }
    a.abstract = join(paragraphs, " ");
    if (auto journal = citation.get_optional<std::string>("Article.Journal.Title")) a.journal = collapse(*journal);
    if (auto mesh = citation.get_child_optional("MeshHeadingList"))
      for (const auto& [tag, heading] : *mesh)
        if (tag == "MeshHeading") a.mesh_terms.push_back(collapse(heading.get<std::string>("DescriptorName", "")));
    if (a.external_id.empty() || normalize_label(a.title).empty()) continue;
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace sysrev
