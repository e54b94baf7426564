#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sysrev/entity.hpp"

namespace sysrev {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

Timestamp now_utc();
std::string format_timestamp(Timestamp t);  // 2024-05-01T12:00:00.000Z
Timestamp parse_timestamp(std::string_view s);

inline constexpr std::size_t kCategoryCount = 10;
inline constexpr std::array<std::string_view, kCategoryCount> kFeedbackCategories = {
    "Patient/Population/Problem",
    "Intervention/Exposure",
    "Comparison",
    "Outcome",
    "Study Design/Research Type",
    "Setting/Location",
    "Phenomenon of Interest",
    "Evaluation",
    "Captured All Relevant Concepts",
    "Other",
};

/// A librarian's judgment of one retrieved article.
struct FeedbackRecord {
  std::string query_id;
  std::string article_id;
  std::array<bool, kCategoryCount> categories{};  // indexed like kFeedbackCategories
  bool relevant = false;
  std::string missing_concepts;
  Timestamp timestamp{};

  bool operator==(const FeedbackRecord&) const = default;
};

/// Everything needed to show and replay one search.
struct QuerySession {
  std::string query_id;
  std::string query_text;
  std::vector<SentinelArticle> sentinels;
  std::string rendered_query;
  std::vector<std::string> ranked_article_ids;
  Timestamp created{};
  nlohmann::json replay = nlohmann::json::object();   // request, config and graph version
  nlohmann::json results = nlohmann::json::array();   // ranked articles as served
};

nlohmann::json to_json(const FeedbackRecord& r);
/// Throws ValidationError (unknown category, missing ids, bad timestamp).
FeedbackRecord feedback_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QuerySession& s);
QuerySession session_from_json(const nlohmann::json& j);

struct QueryRatio {
  std::string query_id;
  std::size_t relevant = 0;
  std::size_t judged = 0;
  std::size_t retrieved = 0;
  double ratio = 0.0;  // percent
};

struct MetricsReport {
  double relevance_percentage = 0.0;  // unweighted mean of per-query ratios
  bool empty = true;                  // nothing judged in scope
  std::vector<QueryRatio> per_query;  // judged queries only, id order
  std::size_t judged_total = 0;
  std::size_t retrieved_total = 0;
  std::vector<std::string> unjudged_queries;
};

nlohmann::json to_json(const MetricsReport& m);

/// Relevance% over latest-wins records. `retrieved` maps query id to the
/// number of articles shown for it (coverage only; the denominator is the
/// judged count). With `scope`, only that query is reported.
MetricsReport compute_relevance(const std::vector<FeedbackRecord>& records,
                                const std::map<std::string, std::size_t>& retrieved,
                                const std::optional<std::string>& scope = std::nullopt);

/// Append-only JSONL file. A torn or unparseable line found at open time is
/// copied to `<file>.quarantine` and skipped; the file itself is only ever
/// appended to.
class AppendLog {
 public:
  explicit AppendLog(std::filesystem::path path);
  ~AppendLog();
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  /// Valid records present at open time.
  const std::vector<nlohmann::json>& recovered() const { return recovered_; }
  std::size_t quarantined() const { return quarantined_; }

  void append(const nlohmann::json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::mutex mu_;
  std::vector<nlohmann::json> recovered_;
  std::size_t quarantined_ = 0;
};

/// Sessions and feedback under one directory (sessions.jsonl,
/// feedback.jsonl). Writes are serialized; readers see whole records only.
class FeedbackStore {
 public:
  explicit FeedbackStore(const std::filesystem::path& dir);

  void record_session(const QuerySession& session);
  std::optional<QuerySession> session(const std::string& query_id) const;
  std::vector<std::string> session_ids() const;

  /// Throws ValidationError, UnknownSession, or StorageError.
  void record_feedback(const FeedbackRecord& record);

  /// Latest judgment per article for a query, in article-id order.
  std::vector<FeedbackRecord> feedback_for(const std::string& query_id) const;

  /// Throws UnknownSession for an unknown scope.
  MetricsReport relevance(const std::optional<std::string>& scope = std::nullopt) const;

  std::size_t quarantined() const { return sessions_log_.quarantined() + feedback_log_.quarantined(); }

 private:
  void index_feedback(const FeedbackRecord& r);

  mutable std::shared_mutex mu_;
  AppendLog sessions_log_;
  AppendLog feedback_log_;
  std::map<std::string, QuerySession> sessions_;
  std::map<std::pair<std::string, std::string>, FeedbackRecord> latest_;
};

inline MetricsReport relevance_percentage(const FeedbackStore& store,
                                          const std::optional<std::string>& scope = std::nullopt) {
  return store.relevance(scope);
}

}  // namespace sysrev
