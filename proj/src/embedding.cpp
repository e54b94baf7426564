#include "sysrev/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "sysrev/error.hpp"
#include "sysrev/text.hpp"

namespace sysrev {

double Vector::norm() const {
  double sum = 0.0;
  for (double x : components) sum += x * x;
  return std::sqrt(sum);
}

bool Vector::is_zero() const {
  for (double x : components)
    if (x != 0.0) return false;
  return true;
}

double cosine(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a.components[i] * b.components[i];
    na += a.components[i] * a.components[i];
    nb += b.components[i] * b.components[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

Vector normalized_mean(std::span<const Vector> vectors) {
  if (vectors.empty()) throw std::invalid_argument("normalized_mean of no vectors");
  Vector mean{std::vector<double>(vectors.front().dim(), 0.0)};
  for (const auto& v : vectors) {
    if (v.dim() != mean.dim()) throw DimensionMismatch(mean.dim(), v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) mean.components[i] += v.components[i];
  }
  double n = mean.norm();
  if (n == 0.0) return mean;
  for (auto& x : mean.components) x /= n;
  return mean;
}

std::vector<Vector> Embedder::embed_batch(std::span<const std::string> texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::size_t HashedBagEmbedder::bucket(std::string_view token) const { return fnv1a64(token) % dimension_; }

Vector HashedBagEmbedder::embed(std::string_view text) {
  Vector v{std::vector<double>(dimension_, 0.0)};
  for (const auto& tok : tokenize(text)) v.components[bucket(tok.text)] += 1.0;
  double n = v.norm();
  if (n > 0.0)
    for (auto& x : v.components) x /= n;
  return v;
}

void VectorStore::insert_batch(std::span<const std::pair<std::string, Vector>> items) {
  std::unique_lock lock(mu_);
  auto dim = dimension_;
  for (const auto& item : items) {
    if (dim && *dim != item.second.dim()) throw DimensionMismatch(*dim, item.second.dim());
    dim = item.second.dim();
  }
  dimension_ = dim;
  for (const auto& [id, vec] : items) vectors_.insert_or_assign(id, vec);
}

std::optional<Vector> VectorStore::get(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = vectors_.find(id);
  if (it == vectors_.end()) return std::nullopt;
  return it->second;
}

std::size_t VectorStore::size() const {
  std::shared_lock lock(mu_);
  return vectors_.size();
}

}  // namespace sysrev
