#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sysrev/retrieval.hpp"

namespace sysrev {

/// Blocking token bucket shared by every client that talks to one host.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second, double burst = 1.0);
  void acquire();
  double rate() const { return rate_; }

 private:
  using Clock = std::chrono::steady_clock;
  std::mutex mu_;
  double rate_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
};

struct EntrezConfig {
  std::string base_url = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils";
  std::optional<std::string> api_key;
  std::string tool = "sysrev";
  std::optional<std::string> email;
  double requests_per_second = 3.0;
  int max_retries = 2;
  std::chrono::milliseconds backoff{500};  // doubled after every failed attempt
  std::chrono::milliseconds timeout{10000};
  std::size_t fetch_chunk = 200;
};

/// E-utilities client (esearch + efetch). Safe for concurrent use; all
/// requests go through one shared rate limiter.
class EntrezClient {
 public:
  explicit EntrezClient(EntrezConfig config, std::shared_ptr<RateLimiter> limiter = nullptr);

  /// Throws BackendError, or RateLimited when 429s outlast the retries.
  SearchHits remote_search(const std::string& rendered_query, std::size_t retmax);

  /// Ids are requested in chunks of `fetch_chunk`; unresolvable ids come
  /// back in `missing`.
  FetchResult remote_fetch(const std::vector<std::string>& ids);

  const EntrezConfig& config() const { return config_; }

 private:
  std::string get(const std::string& endpoint, const std::vector<std::pair<std::string, std::string>>& params);

  EntrezConfig config_;
  std::shared_ptr<RateLimiter> limiter_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

/// PubmedArticleSet XML -> articles, document order.
std::vector<Article> parse_pubmed_xml(std::string_view xml);

class RemoteBackend final : public SearchBackend {
 public:
  explicit RemoteBackend(std::shared_ptr<EntrezClient> client) : client_(std::move(client)) {}

  SearchHits search(const BooleanQuery& query, std::size_t retmax) override {
    return client_->remote_search(render(query), retmax);
  }
  FetchResult fetch(const std::vector<std::string>& ids) override { return client_->remote_fetch(ids); }
  std::string name() const override { return "remote"; }

 private:
  std::shared_ptr<EntrezClient> client_;
};

}  // namespace sysrev
