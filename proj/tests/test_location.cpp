#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "encyclink/location.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace encyclink;
using namespace encyclink::testing;

namespace {

std::string person_like(std::mt19937_64& rng) {
  static const std::vector<std::string> roles = {"målare", "skald", "präst", "general",
                                                 "tonsättare", "läkare", "riksråd"};
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  const int born = std::uniform_int_distribution<int>(1700, 1850)(rng);
  return pick(person_names()) + ", svensk " + pick(roles) + ", f. " + std::to_string(born) +
         ", d. " + std::to_string(born + 60) + ", son af " + pick(person_names()) + ".";
}

Entry make_entry(const std::string& text, std::size_t i) {
  Entry e;
  e.id = "first/K/" + std::to_string(i) + "/0";
  e.text = text;
  e.truncated_text = text;
  e.headword = text.substr(0, text.find(','));
  return e;
}

std::vector<std::pair<Entry, bool>> labeled_set(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<Entry, bool>> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool loc = i % 2 == 0;
    out.emplace_back(make_entry(loc ? entry_like(rng) : person_like(rng), i), loc);
  }
  return out;
}

}  // namespace

TEST_CASE("separable location set trains to full training accuracy") {
  const MockEmbedder mock;
  const auto train = labeled_set(11, 120);
  const auto report = train_location_model(train, mock);
  CHECK(report.model.dim() == mock.dim());
  CHECK(report.model.provider_tag == mock.provider_tag());
  // margin check over every training example
  for (const auto& [entry, label] : train) {
    const auto p = classify_location(report.model, entry, mock);
    CHECK(p.is_location == label);
    CHECK(p.probability > 0.0);
    CHECK(p.probability < 1.0);
  }
}

TEST_CASE("held-out F1 on the synthetic location set") {
  const MockEmbedder mock;
  const auto model = train_location_model(labeled_set(11, 120), mock).model;
  const auto test = labeled_set(99, 200);
  std::vector<Entry> entries;
  for (const auto& l : test) entries.push_back(l.first);
  const auto preds = classify_locations(model, entries, mock);
  int tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    tp += preds[i].is_location && test[i].second;
    fp += preds[i].is_location && !test[i].second;
    fn += !preds[i].is_location && test[i].second;
    CHECK(preds[i].probability == classify_location(model, entries[i], mock).probability);
  }
  const double f1 = 2.0 * tp / (2.0 * tp + fp + fn);
  CHECK(f1 >= 0.95);
}

TEST_CASE("threshold monotonicity") {
  const MockEmbedder mock;
  auto model = train_location_model(labeled_set(3, 60), mock).model;
  std::vector<Entry> entries;
  for (const auto& l : labeled_set(4, 100)) entries.push_back(l.first);
  std::mt19937_64 rng(8);
  std::vector<double> thresholds(50);
  for (auto& t : thresholds) t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::sort(thresholds.begin(), thresholds.end());
  long prev = static_cast<long>(entries.size()) + 1;
  for (double t : thresholds) {
    model.threshold = t;
    const auto preds = classify_locations(model, entries, mock);
    const long pos = std::count_if(preds.begin(), preds.end(), [](auto& p) { return p.is_location; });
    CHECK(pos <= prev);
    prev = pos;
  }
}

TEST_CASE("training is deterministic") {
  const MockEmbedder mock;
  const auto a = train_location_model(labeled_set(5, 40), mock).model;
  const auto b = train_location_model(labeled_set(5, 40), mock).model;
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}

TEST_CASE("degenerate training sets") {
  const MockEmbedder mock;
  CHECK_ERRC(train_location_model({}, mock), Errc::SingleClassTraining);
  std::vector<std::pair<Entry, bool>> one_class = {{make_entry("Kalmar, stad.", 0), true}};
  CHECK_ERRC(train_location_model(one_class, mock), Errc::SingleClassTraining);

  std::vector<std::pair<Entry, bool>> contradictory = {{make_entry("Kalmar, stad.", 0), true},
                                                       {make_entry("Kalmar, stad.", 1), false}};
  const auto report = train_location_model(contradictory, mock);
  // identical inputs with opposite labels: the loss cannot fall below log 2
  CHECK(report.final_loss >= std::log(2.0) - 1e-9);
}

TEST_CASE("cross-references are never locations") {
  const MockEmbedder mock;
  const auto model = train_location_model(labeled_set(11, 40), mock).model;
  auto e = make_entry("Kalmar, se Calmar.", 0);
  e.flags.is_crossref = true;
  const auto p = classify_location(model, e, mock);
  CHECK_FALSE(p.is_location);
  CHECK(p.probability == 0.0);
  // no embedding happens, so an empty text does not raise
  e.truncated_text.clear();
  CHECK(classify_location(model, e, mock).probability == 0.0);
}

TEST_CASE("dimension mismatch and model file round trip") {
  const MockEmbedder mock;
  const auto model = train_location_model(labeled_set(11, 40), mock).model;
  CHECK_ERRC(classify_location(model, make_entry("Kalmar, stad.", 0), MockEmbedder(64)),
             Errc::DimMismatch);
  const auto path = std::filesystem::temp_directory_path() / "encyclink_location_model.json";
  model.save(path);
  const auto back = LocationModel::load(path);
  CHECK(back.weights == model.weights);
  CHECK(back.bias == model.bias);
  CHECK(back.threshold == model.threshold);
  CHECK(back.provider_tag == model.provider_tag);
}
