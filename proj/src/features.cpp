#include "encyclink/features.hpp"

#include <cmath>
#include <map>

#include "encyclink/error.hpp"
#include "encyclink/hash.hpp"
#include "encyclink/utf8.hpp"

namespace encyclink {

double SparseVector::dot(const std::vector<double>& dense) const {
  double s = 0.0;
  for (const auto& [i, v] : entries) s += v * dense[i];
  return s;
}

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.second * e.second;
  return std::sqrt(s);
}

std::uint32_t ngram_bucket(std::string_view gram, const NgramConfig& config) {
  return static_cast<std::uint32_t>(stable_hash(gram, config.seed) % config.dims);
}

SparseVector ngram_featurize(std::string_view text, const NgramConfig& config) {
  const auto cps = utf8::decode(text);
  if (cps.empty()) throw Error(Errc::EmptyText, "cannot featurize empty text");

  SparseVector out;
  for (std::size_t block = 0; block < config.orders.size(); ++block) {
    const auto n = static_cast<std::size_t>(config.orders[block]);
    if (n == 0 || n > cps.size()) continue;
    std::map<std::uint32_t, double> counts;
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      const auto gram = utf8::encode(std::u32string_view(cps).substr(i, n));
      counts[ngram_bucket(gram, config)] += 1.0;
    }
    double sq = 0.0;
    for (const auto& c : counts) sq += c.second * c.second;
    const double inv = 1.0 / std::sqrt(sq);
    const auto offset = static_cast<std::uint32_t>(block) * config.dims;
    for (const auto& [bucket, count] : counts) out.entries.emplace_back(offset + bucket, count * inv);
  }
  return out;
}

}  // namespace encyclink
