#include "doctest.h"
#include "encyclink/crossref.hpp"
#include "support.hpp"

using namespace encyclink;

namespace {

Entry entry(std::string id, std::string headword, std::string text) {
  Entry e;
  e.id = std::move(id);
  e.headword = std::move(headword);
  e.text = std::move(text);
  return e;
}

}  // namespace

TEST_CASE("detect_crossref examples") {
  CHECK(detect_crossref(entry("a", "Nervtumör", "Nervtumör. Se Nervsjukdomar.")) ==
        "Nervsjukdomar");
  CHECK(detect_crossref(entry("b", "Bajesid", "Bajesid, turkiska sultaner. Se Bajasid.")) ==
        "Bajasid");
  std::string long_text = "Lång artikel. Se Annat.";
  while (long_text.size() < 120) long_text += " mer text";
  CHECK_FALSE(detect_crossref(entry("c", "Lång", long_text)).has_value());
}

TEST_CASE("detect_crossref edge cases") {
  auto of_length = [](std::size_t n) {
    std::string t = "Å. Se Målet ";  // 12 scalar values
    for (std::size_t i = 12; i < n; ++i) t += "x";
    return t;
  };
  CHECK(detect_crossref(entry("a", "Å", of_length(59))) == "Målet");
  CHECK_FALSE(detect_crossref(entry("a", "Å", of_length(60))).has_value());

  CHECK_FALSE(detect_crossref(entry("s", "Sedan", "Kyrkan. Sedan 1890 stängd.")).has_value());
  CHECK_FALSE(detect_crossref(entry("s", "X", "X. se vidare Y.")).has_value());
  CHECK(detect_crossref(entry("h", "Nord", "Nord. Se Nord-Amerika.")) == "Nord-Amerika");
  CHECK(detect_crossref(entry("h", "Ö", "Ö. Se Öland, Öster.")) == "Öland");

  const auto multi = detect_crossref_detail("Kol. Se Kolväten och Kolsyra.");
  REQUIRE(multi.has_value());
  CHECK(multi->target_word == "Kolväten");
  CHECK(multi->partial);
  CHECK_FALSE(detect_crossref_detail("Kol. Se Kolväten.")->partial);
}

TEST_CASE("resolve_crossref takes the first exact headword match") {
  const std::vector<Entry> entries = {
      entry("e/1", "Bajasid", "Bajasid, stad. Se Bajaset."),
      entry("e/2", "Bajasid", "Bajasid, turkiska sultaner, af hvilka fyra regerat."),
      entry("e/3", "Bajesid", "Bajesid, turkiska sultaner. Se Bajasid."),
  };
  CHECK(resolve_crossref("Bajasid", entries) == "e/1");
  CHECK_FALSE(resolve_crossref("Bajaset", entries).has_value());
  CHECK(resolve_crossref("Bajesid", entries) == "e/3");
  CHECK_FALSE(resolve_crossref("bajasid", entries).has_value());
}

TEST_CASE("apply_crossrefs flags entries and resolves within the edition") {
  std::vector<Entry> entries = {
      entry("first/v/1/0", "Bajasid", "Bajasid, stad. Se Bajaset."),
      entry("first/v/1/1", "Bajasid", "Bajasid, turkiska sultaner, af hvilka fyra regerat."),
      entry("first/v/1/2", "Bajesid", "Bajesid, turkiska sultaner. Se Bajasid."),
      entry("second/w/1/0", "Bajesid", "Bajesid. Se Bajasid."),
  };
  entries[3].edition = Edition::Second;
  entries[0].flags.is_location = true;
  const auto run = apply_crossrefs(entries);
  REQUIRE(run.references.size() == 3);
  CHECK(entries[0].flags.is_crossref);
  CHECK_FALSE(entries[0].flags.is_location);
  CHECK_FALSE(entries[1].flags.is_crossref);
  CHECK(entries[2].flags.crossref_target == "Bajasid");
  CHECK(run.references[1].resolved_entry_id == "first/v/1/0");
  CHECK_FALSE(run.references[2].resolved_entry_id.has_value());  // no second-edition Bajasid
  CHECK(run.unresolved_count == 2);
  for (const auto& c : run.references) {
    if (!c.resolved_entry_id) continue;
    for (const auto& e : entries) {
      if (e.id == *c.resolved_entry_id) CHECK(e.headword == c.target_word);
    }
  }
}

TEST_CASE("100-entry fixture: full precision, known misses, Bajasid first match") {
  std::vector<Entry> entries;
  for (const auto& j : read_jsonl(testing::fixture_dir() / "crossref" / "entries100.jsonl")) {
    entries.push_back(entry_from_json(j));
  }
  const auto gold = read_jsonl(testing::fixture_dir() / "crossref" / "gold100.jsonl");
  REQUIRE(entries.size() == 100);
  REQUIRE(gold.size() == 100);
  const auto run = apply_crossrefs(entries);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const bool g = !gold[i].at("target_word").is_null();
    const bool p = entries[i].flags.is_crossref;
    tp += g && p;
    fp += !g && p;
    fn += g && !p;
    if (g && p) CHECK(entries[i].flags.crossref_target == gold[i].at("target_word").get<std::string>());
  }
  CHECK(fp == 0);
  CHECK(tp == 34);
  // lowercase "se" once, and two redirects longer than the limit
  CHECK(fn == 3);
  CHECK(run.partial_count == 5);

  const CrossReference* bajesid = nullptr;
  for (const auto& c : run.references) {
    if (c.source_headword == "Bajesid") bajesid = &c;
  }
  REQUIRE(bajesid != nullptr);
  CHECK(bajesid->resolved_entry_id == "second/X/0002/8");
  CHECK(gold[20].at("resolved_id") == "second/X/0002/9");
}
