#pragma once

#include <cstddef>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sysrev {

struct Vector {
  std::vector<double> components;

  std::size_t dim() const { return components.size(); }
  double norm() const;
  bool is_zero() const;
  bool operator==(const Vector&) const = default;
};

/// Standard cosine similarity; 0.0 when either side is the zero vector.
/// Throws DimensionMismatch.
double cosine(const Vector& a, const Vector& b);

/// Mean of the inputs, L2-normalized. Zero vector if the mean is zero.
/// Throws DimensionMismatch; empty input throws std::invalid_argument.
Vector normalized_mean(std::span<const Vector> vectors);

/// Text embedding model. Implementations must be deterministic for a fixed
/// text and keep one dimension for their lifetime.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Vector embed(std::string_view text) = 0;
  virtual std::vector<Vector> embed_batch(std::span<const std::string> texts);
  virtual std::string name() const = 0;
  virtual bool is_fallback() const { return false; }
};

/// Hashed bag-of-words: each token is hashed (FNV-1a 64) into one of
/// `dimension` buckets, counts are L2-normalized. Empty text embeds to zero.
class HashedBagEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit HashedBagEmbedder(std::size_t dimension = kDefaultDimension) : dimension_(dimension) {}

  Vector embed(std::string_view text) override;
  std::string name() const override { return "hashed-bag-" + std::to_string(dimension_); }
  bool is_fallback() const override { return true; }

  std::size_t bucket(std::string_view token) const;

 private:
  std::size_t dimension_;
};

/// In-memory id -> vector store. Concurrent readers, exclusive batch writers.
class VectorStore {
 public:
  void insert_batch(std::span<const std::pair<std::string, Vector>> items);
  std::optional<Vector> get(const std::string& id) const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Vector> vectors_;
  std::optional<std::size_t> dimension_;
};

}  // namespace sysrev
