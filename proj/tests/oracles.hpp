#pragma once

// Brute-force reference implementations used as test oracles. They share no
// code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "encyclink/embedder.hpp"
#include "encyclink/matcher.hpp"

namespace encyclink::testing {

inline double plain_dot(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

// All-pairs similarities, then for each edition-1 row in order: rank every
// edition-2 column, keep the k best, and take the first unclaimed one at or
// above the threshold.
inline MatchResult oracle_greedy_match(const std::vector<std::string>& e1_ids,
                                       const std::vector<EmbeddingVector>& e1,
                                       const std::vector<std::string>& e2_ids,
                                       const std::vector<EmbeddingVector>& e2, double threshold,
                                       std::size_t k) {
  std::vector<std::vector<double>> sim(e1.size(), std::vector<double>(e2.size()));
  for (std::size_t i = 0; i < e1.size(); ++i)
    for (std::size_t j = 0; j < e2.size(); ++j) sim[i][j] = plain_dot(e1[i].values, e2[j].values);

  MatchResult r;
  r.threshold = threshold;
  std::vector<bool> taken(e2.size(), false);
  for (std::size_t i = 0; i < e1.size(); ++i) {
    std::vector<std::size_t> order(e2.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sim[i][a] > sim[i][b]; });
    if (order.size() > k) order.resize(k);
    bool paired = false;
    for (std::size_t j : order) {
      if (sim[i][j] < threshold) break;
      if (taken[j]) continue;
      taken[j] = true;
      r.pairs.push_back({e1_ids[i], e2_ids[j], sim[i][j]});
      paired = true;
      break;
    }
    if (!paired) r.removed.push_back(e1_ids[i]);
  }
  for (std::size_t j = 0; j < e2.size(); ++j)
    if (!taken[j]) r.added.push_back(e2_ids[j]);
  return r;
}

// Partition and injectivity checks; returns an empty string when all hold.
inline std::string match_invariant_violation(const MatchResult& r,
                                             const std::vector<std::string>& e1_ids,
                                             const std::vector<std::string>& e2_ids) {
  std::vector<std::string> left, right;
  for (const auto& p : r.pairs) {
    if (p.similarity < r.threshold) return "pair below threshold";
    left.push_back(p.e1_id);
    right.push_back(p.e2_id);
  }
  left.insert(left.end(), r.removed.begin(), r.removed.end());
  right.insert(right.end(), r.added.begin(), r.added.end());
  auto a = e1_ids, b = e2_ids;
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (left != a) return "edition-1 partition broken";
  if (right != b) return "edition-2 partition broken";
  return "";
}

// Great-circle distance by the spherical law of cosines.
inline double law_of_cosines_km(double lat1, double lon1, double lat2, double lon2) {
  const double d = M_PI / 180.0;
  const double c = std::sin(lat1 * d) * std::sin(lat2 * d) +
                   std::cos(lat1 * d) * std::cos(lat2 * d) * std::cos((lon2 - lon1) * d);
  return 6371.0 * std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace encyclink::testing
