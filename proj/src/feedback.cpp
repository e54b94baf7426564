#include "sysrev/feedback.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sysrev/error.hpp"
#include "sysrev/json_io.hpp"

namespace sysrev {
namespace {

using nlohmann::json;
using namespace std::chrono;

std::string required_id(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty())
    throw ValidationError(key, "must be a non-empty string");
  return j[key].get<std::string>();
}

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    auto n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageError(std::string("write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace

Timestamp now_utc() { return floor<milliseconds>(system_clock::now()); }

std::string format_timestamp(Timestamp t) {
  auto day = floor<days>(t);
  year_month_day ymd{day};
  auto ms = (t - day).count();
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(ms / 3600000), static_cast<long long>(ms / 60000 % 60),
                static_cast<long long>(ms / 1000 % 60), static_cast<long long>(ms % 1000));
  return buf;
}

Timestamp parse_timestamp(std::string_view s) {
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  int consumed = 0;
  std::string str(s);
  if (std::sscanf(str.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%n", &y, &mo, &d, &h, &mi, &sec, &consumed) != 6)
    throw ValidationError("ts", "not an ISO-8601 UTC timestamp: " + str);
  long long millis = 0;
  std::size_t pos = static_cast<std::size_t>(consumed);
  if (pos < str.size() && str[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < str.size() && std::isdigit(static_cast<unsigned char>(str[pos]))) {
      if (digits < 3) millis = millis * 10 + (str[pos] - '0');
      ++digits;
      ++pos;
    }
    for (; digits < 3; ++digits) millis *= 10;
  }
  if (pos >= str.size() || (str[pos] != 'Z' && str[pos] != 'z') || pos + 1 != str.size())
    throw ValidationError("ts", "timestamp must be UTC ('Z'): " + str);
  year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw ValidationError("ts", "timestamp out of range: " + str);
  return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{sec} + milliseconds{millis};
}

json to_json(const FeedbackRecord& r) {
  json cats = json::object();
  for (std::size_t i = 0; i < kCategoryCount; ++i) cats[std::string(kFeedbackCategories[i])] = r.categories[i];
  return json{{"query_id", r.query_id},
              {"article_id", r.article_id},
              {"relevant", r.relevant},
              {"categories", cats},
              {"missing_concepts", r.missing_concepts},
              {"ts", format_timestamp(r.timestamp)}};
}

FeedbackRecord feedback_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("feedback", "must be a JSON object");
  FeedbackRecord r;
  r.query_id = required_id(j, "query_id");
  r.article_id = required_id(j, "article_id");
  if (!j.contains("relevant") || !j["relevant"].is_boolean()) throw ValidationError("relevant", "must be a boolean");
  r.relevant = j["relevant"].get<bool>();
  if (j.contains("categories")) {
    const auto& cats = j["categories"];
    if (!cats.is_object()) throw ValidationError("categories", "must be an object");
    for (const auto& [key, value] : cats.items()) {
      auto it = std::find(kFeedbackCategories.begin(), kFeedbackCategories.end(), key);
      if (it == kFeedbackCategories.end()) throw ValidationError("categories", "unknown category '" + key + "'");
      if (!value.is_boolean()) throw ValidationError("categories", "'" + key + "' must be a boolean");
      r.categories[static_cast<std::size_t>(it - kFeedbackCategories.begin())] = value.get<bool>();
    }
  }
  if (j.contains("missing_concepts")) {
    if (!j["missing_concepts"].is_string()) throw ValidationError("missing_concepts", "must be a string");
    r.missing_concepts = j["missing_concepts"].get<std::string>();
  }
  if (j.contains("ts")) {
    if (!j["ts"].is_string()) throw ValidationError("ts", "must be a string");
    r.timestamp = parse_timestamp(j["ts"].get<std::string>());
  }
  return r;
}

json to_json(const QuerySession& s) {
  json sentinels = json::array();
  for (const auto& a : s.sentinels) sentinels.push_back(to_json(a));
  return json{{"query_id", s.query_id},
              {"query", s.query_text},
              {"sentinels", sentinels},
              {"rendered_query", s.rendered_query},
              {"ranked_article_ids", s.ranked_article_ids},
              {"created", format_timestamp(s.created)},
              {"replay", s.replay},
              {"results", s.results}};
}

QuerySession session_from_json(const json& j) {
  QuerySession s;
  s.query_id = required_id(j, "query_id");
  s.query_text = j.value("query", "");
  if (j.contains("sentinels"))
    for (const auto& a : j["sentinels"]) s.sentinels.push_back(sentinel_from_json(a));
  s.rendered_query = j.value("rendered_query", "");
  s.ranked_article_ids = j.value("ranked_article_ids", std::vector<std::string>{});
  if (j.contains("created")) s.created = parse_timestamp(j["created"].get<std::string>());
  s.replay = j.value("replay", json::object());
  s.results = j.value("results", json::array());
  return s;
}

json to_json(const MetricsReport& m) {
  json per_query = json::array();
  for (const auto& q : m.per_query)
    per_query.push_back({{"query_id", q.query_id},
                         {"relevant", q.relevant},
                         {"judged", q.judged},
                         {"retrieved", q.retrieved},
                         {"relevance_percentage", q.ratio}});
  double coverage = m.retrieved_total == 0 ? 0.0 : static_cast<double>(m.judged_total) / m.retrieved_total;
  return json{{"relevance_percentage", m.relevance_percentage},
              {"empty", m.empty},
              {"per_query", per_query},
              {"coverage", {{"judged", m.judged_total}, {"retrieved", m.retrieved_total}, {"ratio", coverage}}},
              {"unjudged_queries", m.unjudged_queries}};
}

MetricsReport compute_relevance(const std::vector<FeedbackRecord>& records,
                                const std::map<std::string, std::size_t>& retrieved,
                                const std::optional<std::string>& scope) {
  std::map<std::string, QueryRatio> by_query;
  for (const auto& r : records) {
    if (scope && r.query_id != *scope) continue;
    auto& q = by_query[r.query_id];
    q.query_id = r.query_id;
    ++q.judged;
    if (r.relevant) ++q.relevant;
  }

  MetricsReport report;
  for (const auto& [id, count] : retrieved) {
    if (scope && id != *scope) continue;
    report.retrieved_total += count;
    if (!by_query.contains(id)) report.unjudged_queries.push_back(id);
  }
  double sum = 0.0;
  for (auto& [id, q] : by_query) {
    if (auto it = retrieved.find(id); it != retrieved.end()) q.retrieved = it->second;
    q.ratio = 100.0 * static_cast<double>(q.relevant) / static_cast<double>(q.judged);
    sum += q.ratio;
    report.judged_total += q.judged;
    report.per_query.push_back(q);
  }
  report.empty = report.per_query.empty();
  report.relevance_percentage = report.empty ? 0.0 : sum / static_cast<double>(report.per_query.size());
  return report;
}

AppendLog::AppendLog(std::filesystem::path path) : path_(std::move(path)) {
  std::string contents;
  {
    std::ifstream in(path_, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      contents = ss.str();
    }
  }

  std::vector<std::string> bad;
  std::size_t start = 0;
  while (start < contents.size()) {
    auto nl = contents.find('\n', start);
    bool torn = nl == std::string::npos;
    auto line = contents.substr(start, torn ? std::string::npos : nl - start);
    start = torn ? contents.size() : nl + 1;
    if (line.empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      bad.push_back(line);
    } else {
      recovered_.push_back(std::move(j));
    }
  }
  quarantined_ = bad.size();

  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw StorageError("cannot open " + path_.string() + ": " + std::strerror(errno));

  if (!bad.empty()) {
    std::ofstream q(path_.string() + ".quarantine", std::ios::app | std::ios::binary);
    for (const auto& line : bad) q << line << '\n';
  }
  // Terminate a torn tail so the next record starts on its own line.
  if (!contents.empty() && contents.back() != '\n') write_all(fd_, "\n");
}

AppendLog::~AppendLog() {
  if (fd_ >= 0) ::close(fd_);
}

void AppendLog::append(const json& record) {
  auto line = record.dump() + "\n";
  std::lock_guard lock(mu_);
  write_all(fd_, line);
  if (::fsync(fd_) != 0) throw StorageError(std::string("fsync failed: ") + std::strerror(errno));
}

FeedbackStore::FeedbackStore(const std::filesystem::path& dir)
    : sessions_log_((std::filesystem::create_directories(dir), dir / "sessions.jsonl")),
      feedback_log_(dir / "feedback.jsonl") {
  for (const auto& j : sessions_log_.recovered()) {
    try {
      auto s = session_from_json(j);
      sessions_.insert_or_assign(s.query_id, std::move(s));
    } catch (const std::exception&) {
    }
  }
  for (const auto& j : feedback_log_.recovered()) {
    try {
      index_feedback(feedback_from_json(j));
    } catch (const std::exception&) {
    }
  }
}

void FeedbackStore::index_feedback(const FeedbackRecord& r) {
  latest_.insert_or_assign(std::pair{r.query_id, r.article_id}, r);
}

void FeedbackStore::record_session(const QuerySession& session) {
  if (session.query_id.empty()) throw ValidationError("query_id", "must be non-empty");
  std::vector<std::string> ids = session.ranked_article_ids;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw ValidationError("ranked_article_ids", "must be distinct");
  std::unique_lock lock(mu_);
  sessions_log_.append(to_json(session));
  sessions_.insert_or_assign(session.query_id, session);
}

std::optional<QuerySession> FeedbackStore::session(const std::string& query_id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(query_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> FeedbackStore::session_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

void FeedbackStore::record_feedback(const FeedbackRecord& record) {
  if (record.query_id.empty()) throw ValidationError("query_id", "must be non-empty");
  if (record.article_id.empty()) throw ValidationError("article_id", "must be non-empty");
  std::unique_lock lock(mu_);
  if (!sessions_.contains(record.query_id)) throw UnknownSession(record.query_id);
  feedback_log_.append(to_json(record));
  index_feedback(record);
}

std::vector<FeedbackRecord> FeedbackStore::feedback_for(const std::string& query_id) const {
  std::shared_lock lock(mu_);
  std::vector<FeedbackRecord> out;
  for (auto it = latest_.lower_bound({query_id, ""}); it != latest_.end() && it->first.first == query_id; ++it)
    out.push_back(it->second);
  return out;
}

MetricsReport FeedbackStore::relevance(const std::optional<std::string>& scope) const {
  std::shared_lock lock(mu_);
  if (scope && !sessions_.contains(*scope)) throw UnknownSession(*scope);
  std::vector<FeedbackRecord> records;
  for (const auto& [key, r] : latest_) records.push_back(r);
  std::map<std::string, std::size_t> retrieved;
  for (const auto& [id, s] : sessions_) retrieved[id] = s.ranked_article_ids.size();
  return compute_relevance(records, retrieved, scope);
}

}  // namespace sysrev
