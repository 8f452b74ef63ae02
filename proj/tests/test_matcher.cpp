#include <chrono>
#include <random>
#include <set>

#include "doctest.h"
#include "encyclink/matcher.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace encyclink;
using namespace encyclink::testing;

namespace {

Entry loc(std::string id, std::string headword, std::string text) {
  Entry e;
  e.id = std::move(id);
  e.headword = std::move(headword);
  e.text = text;
  e.truncated_text = std::move(text);
  e.flags.is_location = true;
  return e;
}

std::vector<Entry> read_entries(const std::string& name) {
  std::vector<Entry> out;
  for (const auto& j : read_jsonl(fixture_dir() / "matching" / name)) {
    out.push_back(loc(j.at("id"), j.at("headword"), j.at("truncated_text")));
  }
  return out;
}

struct Corpus {
  std::vector<std::string> e1_ids, e2_ids;
  std::vector<EmbeddingVector> e1, e2;
};

// Edition 2 keeps most edition-1 texts with a revised population, drops
// some and adds new ones, then shuffles.
Corpus random_corpus(std::mt19937_64& rng, std::size_t n, const Embedder& emb) {
  std::vector<std::string> t1, t2;
  for (std::size_t i = 0; i < n; ++i) t1.push_back(entry_like(rng));
  std::uniform_real_distribution<double> u;
  for (const auto& t : t1) {
    const double r = u(rng);
    if (r < 0.15) continue;
    if (r < 0.6) {
      t2.push_back(t.substr(0, t.find(" län.")) + " län. " +
                   std::to_string(std::uniform_int_distribution<int>(200, 19000)(rng)) + " inv. (1910).");
    } else {
      t2.push_back(t);
    }
  }
  for (std::size_t i = 0; i < n / 6; ++i) t2.push_back(entry_like(rng));
  std::shuffle(t2.begin(), t2.end(), rng);
  Corpus c;
  c.e1 = emb.embed(t1);
  c.e2 = emb.embed(t2);
  for (std::size_t i = 0; i < t1.size(); ++i) c.e1_ids.push_back("first/" + std::to_string(i));
  for (std::size_t j = 0; j < t2.size(); ++j) c.e2_ids.push_back("second/" + std::to_string(j));
  return c;
}

VectorIndex index_of(const Corpus& c, std::size_t dim, IndexMode mode) {
  VectorIndex idx(dim, mode);
  for (std::size_t j = 0; j < c.e2.size(); ++j) idx.add(c.e2_ids[j], c.e2[j]);
  return idx;
}

}  // namespace

TEST_CASE("vector index basics") {
  const MockEmbedder mock;
  VectorIndex empty(mock.dim());
  CHECK(empty.size() == 0);
  CHECK(empty.search(mock.embed_one("x"), 5).empty());

  const std::vector<Entry> entries = {loc("a", "Kalmar", "Kalmar, stad i Kalmar län."),
                                      loc("b", "Kalix", "Kalix, köping i Norrbottens län."),
                                      loc("c", "Kiruna", "Kiruna, samhälle i Norrbottens län.")};
  for (auto mode : {IndexMode::Exact, IndexMode::Hnsw}) {
    const auto idx = build_index(entries, mock, mode);
    const auto hits = idx.search(mock.embed_one(entries[1].truncated_text), 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].index == 1);
    CHECK(hits[0].similarity == doctest::Approx(1.0));
    CHECK(hits[0].similarity >= hits[1].similarity);
    CHECK(hits[1].similarity >= hits[2].similarity);
  }
  VectorIndex idx(4);
  CHECK_ERRC(idx.add("x", EmbeddingVector{{1, 0, 0}}), Errc::DimMismatch);
  CHECK_ERRC(idx.add("x", EmbeddingVector{{0, 0, 0, 0}}), Errc::ZeroVector);
  // equal similarity: insertion order decides
  idx.add("p", EmbeddingVector{{1, 0, 0, 0}});
  idx.add("q", EmbeddingVector{{1, 0, 0, 0}});
  const auto tied = idx.search(EmbeddingVector{{1, 0, 0, 0}}, 2);
  CHECK(tied[0].index == 0);
  CHECK(tied[1].index == 1);
}

TEST_CASE("HNSW top-1 agrees with brute force on 500 entries") {
  const MockEmbedder mock;
  std::mt19937_64 rng(2024);
  std::vector<std::string> texts, queries;
  for (int i = 0; i < 500; ++i) texts.push_back(entry_like(rng));
  for (int i = 0; i < 500; ++i) queries.push_back(entry_like(rng));
  VectorIndex exact(mock.dim(), IndexMode::Exact), approx(mock.dim(), IndexMode::Hnsw);
  const auto vs = mock.embed(texts);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    exact.add(std::to_string(i), vs[i]);
    approx.add(std::to_string(i), vs[i]);
  }
  int agree = 0;
  for (const auto& q : mock.embed(queries)) {
    agree += approx.search(q, 1).front().index == exact.search(q, 1).front().index;
  }
  MESSAGE("top-1 agreement " << agree << "/500");
  CHECK(agree >= 495);
  // repeated builds give the same graph
  VectorIndex again(mock.dim(), IndexMode::Hnsw);
  for (std::size_t i = 0; i < vs.size(); ++i) again.add(std::to_string(i), vs[i]);
  const auto q = mock.embed_one(queries[0]);
  CHECK(again.search(q, 10) == approx.search(q, 10));
}

TEST_CASE("match_editions trivial cases") {
  const MockEmbedder mock;
  std::mt19937_64 rng(1);
  std::vector<Entry> side;
  for (int i = 0; i < 20; ++i) side.push_back(loc("e" + std::to_string(i), "", entry_like(rng)));
  auto other = side;
  for (auto& e : other) e.id = "f" + e.id;
  const auto same = match_editions(side, build_index(other, mock), mock);
  CHECK(same.pairs.size() == 20);
  CHECK(same.removed.empty());
  CHECK(same.added.empty());
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(same.pairs[i].e2_id == "f" + side[i].id);
    CHECK(same.pairs[i].similarity == doctest::Approx(1.0));
  }

  const std::vector<Entry> a = {loc("a1", "", "Kalmar, stad."), loc("a2", "", "Öved, socken.")};
  const std::vector<Entry> b = {loc("b1", "", "Zürich, kanton i Schweiz med bank"),
                                loc("b2", "", "Quito, hufvudstad i Ecuador")};
  const auto disjoint = match_editions(a, build_index(b, mock), mock);
  CHECK(disjoint.pairs.empty());
  CHECK(disjoint.removed == std::vector<std::string>{"a1", "a2"});
  CHECK(disjoint.added == std::vector<std::string>{"b1", "b2"});
}

TEST_CASE("5x5 confusable fixture replays the greedy oracle") {
  const MockEmbedder mock;
  const std::vector<std::string> t1 = {
      "Åker, socken i Jönköpings län, Östra härad.",
      "Åsenhöga, socken i Jönköpings län, Östbo härad.",
      "Kalmar, stad i Kalmar län.",
      "Öved, socken i Malmöhus län, Frosta härad.",
      "Kiruna, grufsamhälle i Norrbottens län."};
  const std::vector<std::string> t2 = {
      "Åsenhöga, socken i Jönköpings län, Östbo härad. 1 210 inv.",
      "Åker, socken i Jönköpings län, Östra härad. 980 inv.",
      "Öved, socken i Malmöhus län, Frosta härad. 740 inv.",
      "Kalmar, stad i Kalmar län. 13 000 inv.",
      "Kungsör, köping i Västmanlands län."};
  std::vector<std::string> id1, id2;
  for (int i = 0; i < 5; ++i) {
    id1.push_back("a" + std::to_string(i));
    id2.push_back("b" + std::to_string(i));
  }
  const auto v1 = mock.embed(t1), v2 = mock.embed(t2);
  VectorIndex idx(mock.dim());
  for (int j = 0; j < 5; ++j) idx.add(id2[j], v2[j]);
  for (double thr : {0.3, 0.5, 0.7, 0.8, 0.9}) {
    MatchOptions o;
    o.threshold = thr;
    CHECK(match_editions(id1, v1, idx, o) == oracle_greedy_match(id1, v1, id2, v2, thr, 10));
  }
}

TEST_CASE("greedy matching equals the oracle on 100 randomized corpora") {
  const MockEmbedder mock(128);
  std::mt19937_64 rng(77);
  for (int round = 0; round < 100; ++round) {
    const auto n = std::uniform_int_distribution<std::size_t>(0, 80)(rng);
    const auto c = random_corpus(rng, n, mock);
    const double thr = std::uniform_real_distribution<double>(0.5, 0.95)(rng);
    MatchOptions o;
    o.threshold = thr;
    const auto exact = index_of(c, mock.dim(), IndexMode::Exact);
    const auto got = match_editions(c.e1_ids, c.e1, exact, o);
    CHECK(got == oracle_greedy_match(c.e1_ids, c.e1, c.e2_ids, c.e2, thr, 10));
    CHECK(match_invariant_violation(got, c.e1_ids, c.e2_ids) == "");
    CHECK(got == match_editions(c.e1_ids, c.e1, exact, o));

    const auto hnsw = match_editions(c.e1_ids, c.e1, index_of(c, mock.dim(), IndexMode::Hnsw), o);
    CHECK(match_invariant_violation(hnsw, c.e1_ids, c.e2_ids) == "");
    o.strategy = MatchStrategy::Global;
    CHECK(match_invariant_violation(match_editions(c.e1_ids, c.e1, exact, o), c.e1_ids, c.e2_ids) == "");
  }
}

TEST_CASE("greedy matching equals the oracle on 1000 entries") {
  const MockEmbedder mock;
  std::mt19937_64 rng(1000);
  const auto c = random_corpus(rng, 1000, mock);
  const auto got = match_editions(c.e1_ids, c.e1, index_of(c, mock.dim(), IndexMode::Exact));
  CHECK(got == oracle_greedy_match(c.e1_ids, c.e1, c.e2_ids, c.e2, 0.9, 10));
  CHECK(!got.pairs.empty());
}

TEST_CASE("raising the threshold never adds pairs") {
  const MockEmbedder mock(128);
  std::mt19937_64 rng(9);
  const auto c = random_corpus(rng, 60, mock);
  const auto idx = index_of(c, mock.dim(), IndexMode::Exact);
  std::size_t prev = c.e1.size() + 1;
  for (double thr = 0.0; thr <= 1.0; thr += 0.05) {
    MatchOptions o;
    o.threshold = thr;
    const auto n = match_editions(c.e1_ids, c.e1, idx, o).pairs.size();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("global strategy maximizes total similarity where greedy does not") {
  // a1 prefers b1 (0.8) over b2 (0.6); a2 only fits b1 (0.95)
  const std::vector<std::string> id1 = {"a1", "a2"}, id2 = {"b1", "b2"};
  const std::vector<EmbeddingVector> v2 = {EmbeddingVector{{1, 0, 0}}, EmbeddingVector{{0, 1, 0}}};
  const std::vector<EmbeddingVector> v1 = {
      EmbeddingVector{{0.8f, 0.6f, 0}},
      EmbeddingVector{{0.95f, 0, std::sqrt(1 - 0.95f * 0.95f)}}};
  VectorIndex idx(3);
  for (int j = 0; j < 2; ++j) idx.add(id2[j], v2[j]);
  MatchOptions o;
  o.threshold = 0.5;
  const auto greedy = match_editions(id1, v1, idx, o);
  REQUIRE(greedy.pairs.size() == 1);
  CHECK(greedy.pairs[0].e1_id == "a1");
  CHECK(greedy.pairs[0].e2_id == "b1");
  CHECK(greedy.removed == std::vector<std::string>{"a2"});
  o.strategy = MatchStrategy::Global;
  const auto global = match_editions(id1, v1, idx, o);
  REQUIRE(global.pairs.size() == 2);
  CHECK(global.pairs[0].e2_id == "b2");
  CHECK(global.pairs[1].e2_id == "b1");
  CHECK(global.added.empty());
}

TEST_CASE("headword baseline") {
  const std::vector<Entry> e1 = {loc("a", "Kalmar", "x"), loc("b", "Qvenneberga", "y"),
                                 loc("c", "Lund", "z")};
  const std::vector<Entry> e2 = {loc("p", "Lund", "z"), loc("q", "Kvenneberga", "y"),
                                 loc("r", "Kalmar", "x"), loc("s", "Lund", "w")};
  const auto r = baseline_headword_match(e1, e2);
  REQUIRE(r.pairs.size() == 2);
  CHECK(r.pairs[0] == MatchPair{"a", "r", 1.0});
  CHECK(r.pairs[1] == MatchPair{"c", "p", 1.0});
  CHECK(r.removed == std::vector<std::string>{"b"});
  CHECK(r.added == std::vector<std::string>{"q", "s"});
  CHECK(baseline_headword_match(e1, e1).pairs.size() == 3);
}

TEST_CASE("evaluate_matching") {
  MatchResult r;
  r.pairs = {{"a", "p", 0.95}, {"b", "q", 0.92}, {"c", "x", 0.91}};
  r.removed = {"d", "e"};
  const MatchGold gold = {{"a", "p"}, {"b", "q"}, {"c", "r"}, {"d", "s"}, {"e", std::nullopt}};
  const auto m = evaluate_matching(r, gold);
  CHECK(m.correct == 2);
  CHECK(m.predicted == 3);
  CHECK(m.gold == 4);
  CHECK(m.precision() == doctest::Approx(2.0 / 3.0));
  CHECK(m.recall() == 0.5);
  CHECK(m.f1() == doctest::Approx(2 * (2.0 / 3) * 0.5 / (2.0 / 3 + 0.5)));

  const MatchGold exact = {{"a", "p"}, {"b", "q"}, {"c", "x"}, {"d", std::nullopt}};
  CHECK(evaluate_matching(r, exact).f1() == 1.0);

  MatchResult none;
  none.removed = {"a"};
  const auto z = evaluate_matching(none, {{"a", "p"}});
  CHECK(z.precision() == 0.0);
  CHECK(z.recall() == 0.0);
  CHECK_ERRC(evaluate_matching(r, {{"zz", "p"}}), Errc::GoldIdUnknown);
}

TEST_CASE("match records round trip") {
  MatchResult r;
  r.pairs = {{"a", "p", 0.95}};
  r.removed = {"b"};
  r.added = {"q"};
  std::vector<Json> m, a;
  for (const auto& j : match_records(r)) m.push_back(Json::parse(j.dump()));
  for (const auto& j : added_records(r)) a.push_back(Json::parse(j.dump()));
  CHECK(m[1].at("e2_id").is_null());
  CHECK(match_result_from_records(m, a, 0.9) == r);
}

TEST_CASE("embedding matcher beats the headword baseline on the q/k fixture") {
  const MockEmbedder mock;
  const auto e1 = read_entries("qk40_e1.jsonl");
  const auto e2 = read_entries("qk40_e2.jsonl");
  REQUIRE(e1.size() == 40);
  const auto gold = read_match_gold(read_jsonl(fixture_dir() / "matching" / "qk40_gold.jsonl"));
  const auto emb = evaluate_matching(match_editions(e1, build_index(e2, mock), mock), gold);
  const auto base = evaluate_matching(baseline_headword_match(e1, e2), gold);
  MESSAGE("embedding F1 " << emb.f1() << ", baseline F1 " << base.f1());
  CHECK(base.correct == 35);
  CHECK(emb.f1() > base.f1());
}
