#include "encyclink/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <unordered_map>

#include "encyclink/error.hpp"
#include "encyclink/parallel.hpp"

namespace encyclink {

namespace {

bool better(const SearchHit& a, const SearchHit& b) {
  return a.similarity > b.similarity || (a.similarity == b.similarity && a.index < b.index);
}

struct BestFirst {
  bool operator()(const SearchHit& a, const SearchHit& b) const { return better(b, a); }
};
struct WorstFirst {
  bool operator()(const SearchHit& a, const SearchHit& b) const { return better(a, b); }
};

// Leaves vectors that are already unit length untouched so that callers
// holding the same embeddings see identical similarities.
EmbeddingVector unit(EmbeddingVector v) {
  const double n = v.norm();
  if (n == 0.0) throw Error(Errc::ZeroVector, "cannot index a zero vector");
  if (std::abs(n - 1.0) <= 1e-6) return v;
  for (auto& x : v.values) x = static_cast<float>(static_cast<double>(x) / n);
  return v;
}

}  // namespace

std::string_view index_mode_name(IndexMode m) noexcept {
  return m == IndexMode::Exact ? "exact" : "hnsw";
}

IndexMode parse_index_mode(std::string_view s) {
  if (s == "exact") return IndexMode::Exact;
  if (s == "hnsw") return IndexMode::Hnsw;
  throw Error(Errc::ConfigError, "unknown index mode '" + std::string(s) + "'");
}

// Hierarchical navigable small world graph with the neighbor-selection
// heuristic; level draws come from a seeded generator so builds repeat.
struct VectorIndex::Graph {
  std::mt19937_64 rng;
  double level_mult;
  std::vector<std::vector<std::vector<std::uint32_t>>> links;  // node -> layer -> neighbors
  std::int64_t entry = -1;
  int max_level = -1;

  explicit Graph(const HnswParams& p)
      : rng(p.seed), level_mult(1.0 / std::log(static_cast<double>(std::max<std::size_t>(p.m, 2)))) {}

  int draw_level() {
    // uniform in (0, 1]
    const double u = (static_cast<double>(rng() >> 11) + 1.0) * (1.0 / 9007199254740992.0);
    return static_cast<int>(std::floor(-std::log(u) * level_mult));
  }
};

VectorIndex::VectorIndex(std::size_t dim, IndexMode mode, HnswParams params)
    : dim_(dim), mode_(mode), params_(params) {
  if (mode_ == IndexMode::Hnsw) graph_ = std::make_unique<Graph>(params_);
}

VectorIndex::~VectorIndex() = default;
VectorIndex::VectorIndex(VectorIndex&&) noexcept = default;
VectorIndex& VectorIndex::operator=(VectorIndex&&) noexcept = default;

double VectorIndex::similarity(const EmbeddingVector& q, std::size_t i) const {
  return dot(q, vectors_[i]);
}

std::vector<SearchHit> VectorIndex::search_exact(const EmbeddingVector& query, std::size_t k) const {
  if (query.dim() != dim_) throw Error(Errc::DimMismatch, "query dimension differs from index");
  if (k == 0 || vectors_.empty()) return {};
  const auto q = unit(query);
  std::vector<SearchHit> hits(vectors_.size());
  for (std::size_t i = 0; i < vectors_.size(); ++i) hits[i] = {i, similarity(q, i)};
  k = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), better);
  hits.resize(k);
  return hits;
}

namespace {

using Candidates = std::priority_queue<SearchHit, std::vector<SearchHit>, BestFirst>;
using Results = std::priority_queue<SearchHit, std::vector<SearchHit>, WorstFirst>;

template <typename SimFn>
std::vector<SearchHit> search_layer(const std::vector<std::vector<std::vector<std::uint32_t>>>& links,
                                    const std::vector<SearchHit>& entry_points, std::size_t ef,
                                    int layer, SimFn&& sim, std::vector<char>& visited) {
  std::fill(visited.begin(), visited.end(), 0);
  Candidates candidates;
  Results results;
  for (const auto& ep : entry_points) {
    visited[ep.index] = 1;
    candidates.push(ep);
    results.push(ep);
    if (results.size() > ef) results.pop();
  }
  while (!candidates.empty()) {
    const SearchHit c = candidates.top();
    if (results.size() >= ef && better(results.top(), c)) break;
    candidates.pop();
    for (std::uint32_t n : links[c.index][static_cast<std::size_t>(layer)]) {
      if (visited[n]) continue;
      visited[n] = 1;
      const SearchHit h{n, sim(n)};
      if (results.size() < ef || better(h, results.top())) {
        candidates.push(h);
        results.push(h);
        if (results.size() > ef) results.pop();
      }
    }
  }
  std::vector<SearchHit> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

void VectorIndex::add(std::string id, EmbeddingVector v) {
  if (v.dim() != dim_) {
    throw Error(Errc::DimMismatch, "index has dim " + std::to_string(dim_) + ", vector has " +
                                       std::to_string(v.dim()));
  }
  ids_.push_back(std::move(id));
  vectors_.push_back(unit(std::move(v)));
  if (!graph_) return;

  auto& g = *graph_;
  const auto node = static_cast<std::uint32_t>(vectors_.size() - 1);
  const EmbeddingVector& q = vectors_[node];
  const int level = g.draw_level();
  g.links.emplace_back(static_cast<std::size_t>(level) + 1);
  if (g.entry < 0) {
    g.entry = node;
    g.max_level = level;
    return;
  }
  auto sim_q = [&](std::size_t i) { return similarity(q, i); };
  std::vector<char> visited(vectors_.size(), 0);
  std::vector<SearchHit> ep = {{static_cast<std::size_t>(g.entry), sim_q(static_cast<std::size_t>(g.entry))}};
  for (int layer = g.max_level; layer > level; --layer) {
    ep = search_layer(g.links, ep, 1, layer, sim_q, visited);
  }

  // Heuristic selection: keep a candidate only if it is closer to the base
  // than to every neighbor already kept; top up with pruned ones.
  auto select = [&](std::vector<SearchHit> cands, std::size_t m) {
    std::sort(cands.begin(), cands.end(), better);
    std::vector<SearchHit> kept, pruned;
    for (const auto& c : cands) {
      if (kept.size() >= m) break;
      bool good = true;
      for (const auto& r : kept) {
        if (dot(vectors_[c.index], vectors_[r.index]) > c.similarity) {
          good = false;
          break;
        }
      }
      (good ? kept : pruned).push_back(c);
    }
    for (std::size_t i = 0; kept.size() < m && i < pruned.size(); ++i) kept.push_back(pruned[i]);
    return kept;
  };

  const std::size_t m = params_.m;
  for (int layer = std::min(level, g.max_level); layer >= 0; --layer) {
    const auto found =
        search_layer(g.links, ep, std::max(params_.ef_construction, m), layer, sim_q, visited);
    const auto neighbors = select(found, m);
    auto& mine = g.links[node][static_cast<std::size_t>(layer)];
    for (const auto& n : neighbors) mine.push_back(static_cast<std::uint32_t>(n.index));
    const std::size_t cap = layer == 0 ? 2 * m : m;
    for (const auto& n : neighbors) {
      auto& theirs = g.links[n.index][static_cast<std::size_t>(layer)];
      theirs.push_back(node);
      if (theirs.size() <= cap) continue;
      const EmbeddingVector& base = vectors_[n.index];
      std::vector<SearchHit> cands;
      cands.reserve(theirs.size());
      for (auto t : theirs) cands.push_back({t, dot(base, vectors_[t])});
      const auto keep = select(std::move(cands), cap);
      theirs.clear();
      for (const auto& k : keep) theirs.push_back(static_cast<std::uint32_t>(k.index));
    }
    ep = found;
  }
  if (level > g.max_level) {
    g.max_level = level;
    g.entry = node;
  }
}

std::vector<SearchHit> VectorIndex::search(const EmbeddingVector& query, std::size_t k) const {
  if (!graph_) return search_exact(query, k);
  if (query.dim() != dim_) throw Error(Errc::DimMismatch, "query dimension differs from index");
  if (k == 0 || vectors_.empty()) return {};
  const auto q = unit(query);
  const auto& g = *graph_;
  auto sim_q = [&](std::size_t i) { return similarity(q, i); };
  std::vector<char> visited(vectors_.size(), 0);
  std::vector<SearchHit> ep = {{static_cast<std::size_t>(g.entry), sim_q(static_cast<std::size_t>(g.entry))}};
  for (int layer = g.max_level; layer > 0; --layer) {
    ep = search_layer(g.links, ep, 1, layer, sim_q, visited);
  }
  auto found = search_layer(g.links, ep, std::max(params_.ef_search, k), 0, sim_q, visited);
  if (found.size() > k) found.resize(k);
  return found;
}

VectorIndex build_index(const std::vector<Entry>& entries, const Embedder& embedder,
                        IndexMode mode, HnswParams params) {
  VectorIndex index(embedder.dim(), mode, params);
  std::vector<std::string> texts;
  texts.reserve(entries.size());
  for (const auto& e : entries) texts.push_back(e.truncated_text);
  auto vectors = embedder.embed(texts);
  for (std::size_t i = 0; i < entries.size(); ++i) index.add(entries[i].id, std::move(vectors[i]));
  return index;
}

namespace {

// Minimum-cost assignment on a square matrix (potentials method).
// Returns the column assigned to each row.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

MatchResult match_editions(const std::vector<std::string>& e1_ids,
                           const std::vector<EmbeddingVector>& e1_vectors,
                           const VectorIndex& e2_index, const MatchOptions& options) {
  if (e1_ids.size() != e1_vectors.size()) {
    throw Error(Errc::DimMismatch, "edition-1 ids and vectors differ in length");
  }
  std::vector<std::vector<SearchHit>> candidates(e1_ids.size());
  parallel_for(e1_ids.size(), [&](std::size_t i) {
    if (e1_vectors[i].norm() == 0.0) return;  // nothing to compare; ends up removed
    candidates[i] = e2_index.search(e1_vectors[i], options.k);
  });

  MatchResult r;
  r.threshold = options.threshold;
  std::vector<std::optional<std::pair<std::size_t, double>>> chosen(e1_ids.size());
  std::vector<char> claimed(e2_index.size(), 0);

  if (options.strategy == MatchStrategy::Greedy) {
    for (std::size_t i = 0; i < e1_ids.size(); ++i) {
      for (const auto& h : candidates[i]) {
        if (h.similarity < options.threshold) break;
        if (claimed[h.index]) continue;
        claimed[h.index] = 1;
        chosen[i] = {h.index, h.similarity};
        break;
      }
    }
  } else {
    const std::size_t n = std::max(e1_ids.size(), e2_index.size());
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    std::map<std::pair<std::size_t, std::size_t>, double> edges;
    for (std::size_t i = 0; i < e1_ids.size(); ++i) {
      for (const auto& h : candidates[i]) {
        if (h.similarity < options.threshold) continue;
        cost[i][h.index] = -h.similarity;
        edges[{i, h.index}] = h.similarity;
      }
    }
    if (n > 0) {
      const auto assign = hungarian(cost);
      for (std::size_t i = 0; i < e1_ids.size(); ++i) {
        auto it = edges.find({i, assign[i]});
        if (it == edges.end()) continue;
        claimed[assign[i]] = 1;
        chosen[i] = {assign[i], it->second};
      }
    }
  }

  for (std::size_t i = 0; i < e1_ids.size(); ++i) {
    if (chosen[i]) {
      r.pairs.push_back({e1_ids[i], e2_index.id(chosen[i]->first), chosen[i]->second});
    } else {
      r.removed.push_back(e1_ids[i]);
    }
  }
  for (std::size_t j = 0; j < e2_index.size(); ++j) {
    if (!claimed[j]) r.added.push_back(e2_index.id(j));
  }
  return r;
}

MatchResult match_editions(const std::vector<Entry>& e1_locations, const VectorIndex& e2_index,
                           const Embedder& embedder, const MatchOptions& options) {
  std::vector<std::string> ids, texts;
  for (const auto& e : e1_locations) {
    ids.push_back(e.id);
    texts.push_back(e.truncated_text);
  }
  return match_editions(ids, embedder.embed(texts), e2_index, options);
}

MatchResult baseline_headword_match(const std::vector<Entry>& e1_locations,
                                    const std::vector<Entry>& e2_locations) {
  std::unordered_map<std::string, std::vector<std::size_t>> by_headword;
  for (std::size_t j = 0; j < e2_locations.size(); ++j) {
    by_headword[e2_locations[j].headword].push_back(j);
  }
  std::unordered_map<std::string, std::size_t> next_free;
  std::vector<char> claimed(e2_locations.size(), 0);
  MatchResult r;
  r.threshold = 1.0;
  for (const auto& e : e1_locations) {
    auto it = by_headword.find(e.headword);
    auto& pos = next_free[e.headword];
    if (it == by_headword.end() || pos >= it->second.size()) {
      r.removed.push_back(e.id);
      continue;
    }
    const std::size_t j = it->second[pos++];
    claimed[j] = 1;
    r.pairs.push_back({e.id, e2_locations[j].id, 1.0});
  }
  for (std::size_t j = 0; j < e2_locations.size(); ++j) {
    if (!claimed[j]) r.added.push_back(e2_locations[j].id);
  }
  return r;
}

Prf evaluate_matching(const MatchResult& predicted, const MatchGold& gold) {
  std::unordered_map<std::string, std::optional<std::string>> predicted_by_e1;
  for (const auto& p : predicted.pairs) predicted_by_e1[p.e1_id] = p.e2_id;
  for (const auto& id : predicted.removed) predicted_by_e1[id] = std::nullopt;

  Prf m;
  for (const auto& [e1, e2] : gold) {
    auto it = predicted_by_e1.find(e1);
    if (it == predicted_by_e1.end()) {
      throw Error(Errc::GoldIdUnknown, "gold entry '" + e1 + "' is not among the matched entries");
    }
    if (e2) ++m.gold;
    if (it->second) {
      ++m.predicted;
      if (e2 && *e2 == *it->second) ++m.correct;
    }
  }
  return m;
}

std::vector<OrderedJson> match_records(const MatchResult& r) {
  // paired records first, then removed, each in edition-1 order
  std::vector<OrderedJson> out;
  out.reserve(r.pairs.size() + r.removed.size());
  for (const auto& p : r.pairs) {
    out.push_back({{"e1_id", p.e1_id}, {"e2_id", p.e2_id}, {"similarity", p.similarity},
                   {"status", "paired"}});
  }
  for (const auto& id : r.removed) {
    out.push_back({{"e1_id", id}, {"e2_id", nullptr}, {"similarity", nullptr}, {"status", "removed"}});
  }
  return out;
}

std::vector<OrderedJson> added_records(const MatchResult& r) {
  std::vector<OrderedJson> out;
  out.reserve(r.added.size());
  for (const auto& id : r.added) out.push_back({{"e2_id", id}, {"status", "added"}});
  return out;
}

MatchResult match_result_from_records(const std::vector<Json>& matches,
                                      const std::vector<Json>& added, double threshold) {
  MatchResult r;
  r.threshold = threshold;
  try {
    for (const auto& j : matches) {
      const auto status = j.at("status").get<std::string>();
      if (status == "paired") {
        r.pairs.push_back({j.at("e1_id").get<std::string>(), j.at("e2_id").get<std::string>(),
                           j.at("similarity").get<double>()});
      } else if (status == "removed") {
        r.removed.push_back(j.at("e1_id").get<std::string>());
      } else {
        throw Error(Errc::SchemaMismatch, "unknown match status '" + status + "'");
      }
    }
    for (const auto& j : added) r.added.push_back(j.at("e2_id").get<std::string>());
  } catch (const Json::exception& e) {
    throw Error(Errc::SchemaMismatch, std::string("match record: ") + e.what());
  }
  return r;
}

MatchGold read_match_gold(const std::vector<Json>& records) {
  if (records.empty()) throw Error(Errc::SchemaMismatch, "match gold is empty");
  MatchGold gold;
  try {
    for (const auto& j : records) {
      const auto& e2 = j.at("e2_id");
      gold.emplace_back(j.at("e1_id").get<std::string>(),
                        e2.is_null() ? std::nullopt : std::optional<std::string>(e2.get<std::string>()));
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::SchemaMismatch, std::string("match gold: ") + e.what());
  }
  return gold;
}

}  // namespace encyclink
