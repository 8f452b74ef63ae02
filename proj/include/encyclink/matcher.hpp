#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "encyclink/embedder.hpp"
#include "encyclink/metrics.hpp"
#include "encyclink/segmenter.hpp"

namespace encyclink {

inline constexpr double kMatchThreshold = 0.9;
inline constexpr std::size_t kMatchCandidates = 10;

enum class IndexMode { Exact, Hnsw };

std::string_view index_mode_name(IndexMode m) noexcept;
IndexMode parse_index_mode(std::string_view s);

struct HnswParams {
  std::size_t m = 16;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 64;
  std::uint64_t seed = 42;
};

struct SearchHit {
  std::size_t index = 0;  // insertion position
  double similarity = 0.0;
  bool operator==(const SearchHit&) const = default;
};

// k-nearest-neighbor index over cosine similarity. Vectors are normalized
// on insertion. Results are ordered by descending similarity, then by
// ascending insertion position. search_exact is always brute force; search
// uses the HNSW graph when the index was built in Hnsw mode.
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dim, IndexMode mode = IndexMode::Exact, HnswParams params = {});
  ~VectorIndex();
  VectorIndex(VectorIndex&&) noexcept;
  VectorIndex& operator=(VectorIndex&&) noexcept;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  IndexMode mode() const { return mode_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const EmbeddingVector& vector(std::size_t i) const { return vectors_[i]; }

  // Throws DimMismatch or ZeroVector.
  void add(std::string id, EmbeddingVector v);

  std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k) const;
  std::vector<SearchHit> search_exact(const EmbeddingVector& query, std::size_t k) const;

 private:
  struct Graph;
  double similarity(const EmbeddingVector& q, std::size_t i) const;

  std::size_t dim_;
  IndexMode mode_;
  HnswParams params_;
  std::vector<std::string> ids_;
  std::vector<EmbeddingVector> vectors_;
  std::unique_ptr<Graph> graph_;
};

// Embeds truncated_text of every entry and inserts in order.
VectorIndex build_index(const std::vector<Entry>& entries, const Embedder& embedder,
                        IndexMode mode = IndexMode::Exact, HnswParams params = {});

struct MatchPair {
  std::string e1_id;
  std::string e2_id;
  double similarity = 0.0;
  bool operator==(const MatchPair&) const = default;
};

// pairs and removed follow edition-1 order, added follows edition-2 order.
struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<std::string> removed;
  std::vector<std::string> added;
  double threshold = kMatchThreshold;
  bool operator==(const MatchResult&) const = default;
};

enum class MatchStrategy { Greedy, Global };

struct MatchOptions {
  double threshold = kMatchThreshold;
  std::size_t k = kMatchCandidates;
  MatchStrategy strategy = MatchStrategy::Greedy;
};

// Greedy: for each edition-1 entry in order, take its k ranked candidates
// and claim the first one that is unclaimed and at or above the threshold.
// Global: maximum total similarity assignment over the same candidate
// edges (Hungarian algorithm); optional, for comparison.
MatchResult match_editions(const std::vector<std::string>& e1_ids,
                           const std::vector<EmbeddingVector>& e1_vectors,
                           const VectorIndex& e2_index, const MatchOptions& options = {});

MatchResult match_editions(const std::vector<Entry>& e1_locations, const VectorIndex& e2_index,
                           const Embedder& embedder, const MatchOptions& options = {});

// Pairs exactly equal headwords; the first unmatched edition-2 entry wins.
MatchResult baseline_headword_match(const std::vector<Entry>& e1_locations,
                                    const std::vector<Entry>& e2_locations);

using MatchGold = std::vector<std::pair<std::string, std::optional<std::string>>>;

// Only predictions whose e1_id is in the gold sample count. Throws
// GoldIdUnknown for gold ids the prediction never saw.
Prf evaluate_matching(const MatchResult& predicted, const MatchGold& gold);

// One record per edition-1 entry: {e1_id, e2_id, similarity, status}.
std::vector<OrderedJson> match_records(const MatchResult& r);
// One record per added edition-2 entry: {e2_id, status: "added"}.
std::vector<OrderedJson> added_records(const MatchResult& r);
MatchResult match_result_from_records(const std::vector<Json>& matches,
                                      const std::vector<Json>& added, double threshold);

MatchGold read_match_gold(const std::vector<Json>& records);

}  // namespace encyclink
