#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string>

#include "sysrev/embedding.hpp"
#include "sysrev/entity.hpp"
#include "sysrev/expansion.hpp"

namespace sysrev {

inline constexpr std::chrono::milliseconds kProviderTimeout{2000};

/// POST {base}/ner {"text"} -> {"entities": [{"surface", "start", "end"}]}
class HttpNerProvider final : public NerProvider {
 public:
  explicit HttpNerProvider(std::string base_url, std::chrono::milliseconds timeout = kProviderTimeout)
      : base_url_(std::move(base_url)), timeout_(timeout) {}
  std::vector<NerSpan> find(std::string_view text) override;
  std::string name() const override { return "http:" + base_url_; }

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

/// POST {base}/fill {"text", "mask_span": [start, end], "top_k"} -> {"terms": [...]}
class HttpMaskProvider final : public MaskedTermProvider {
 public:
  explicit HttpMaskProvider(std::string base_url, std::chrono::milliseconds timeout = kProviderTimeout)
      : base_url_(std::move(base_url)), timeout_(timeout) {}
  std::vector<std::string> fill(std::string_view text, std::size_t mask_start, std::size_t mask_end,
                                std::size_t top_k) override;
  std::string name() const override { return "http:" + base_url_; }

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

/// POST {base}/embed {"texts": [...]} -> {"vectors": [[...]]}. The dimension
/// seen on the first successful call is pinned; later mismatches are errors.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(std::string base_url, std::chrono::milliseconds timeout = kProviderTimeout)
      : base_url_(std::move(base_url)), timeout_(timeout) {}
  Vector embed(std::string_view text) override;
  std::vector<Vector> embed_batch(std::span<const std::string> texts) override;
  std::string name() const override { return "http:" + base_url_; }
  std::optional<std::size_t> dimension() const;

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mu_;
  std::optional<std::size_t> dimension_;
};

}  // namespace sysrev
