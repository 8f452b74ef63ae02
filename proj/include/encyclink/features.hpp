#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace encyclink {

// Sorted (index, value) pairs; indices are unique.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double dot(const std::vector<double>& dense) const;
  double norm() const;
  bool operator==(const SparseVector&) const = default;
};

struct NgramConfig {
  std::vector<int> orders{1, 2, 3};
  std::uint32_t dims = 1u << 16;  // buckets per order
  std::uint64_t seed = 0x6e6772616d;

  // Length of the concatenated vector: one block of `dims` per order.
  std::uint32_t total_dims() const { return dims * static_cast<std::uint32_t>(orders.size()); }
};

// Hashed character n-gram counts, one block per order, each block
// L2-normalized independently. Blocks for orders longer than the text stay
// empty. Throws EmptyText on an empty input.
SparseVector ngram_featurize(std::string_view text, const NgramConfig& config = {});

// Bucket of a single n-gram (UTF-8) inside its order block.
std::uint32_t ngram_bucket(std::string_view gram, const NgramConfig& config);

}  // namespace encyclink
