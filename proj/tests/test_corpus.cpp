#include <random>

#include "doctest.h"
#include "encyclink/corpus.hpp"
#include "encyclink/utf8.hpp"
#include "support.hpp"

using namespace encyclink;
using encyclink::testing::data_dir;
using encyclink::testing::fixture_dir;

namespace {

const NormalizationTable& table() {
  static const auto t = NormalizationTable::load(data_dir() / "normalization/replacements_v1.tsv");
  return t;
}

std::string page_html(const std::string& body, const std::string& index = "") {
  std::string s = "<html><body>";
  if (!index.empty()) s += "<!-- index -->" + index + "<!-- /index -->";
  s += "<!-- mode=normal -->" + body + "<!-- NEWIMAGE2 --></body></html>";
  return s;
}

}  // namespace

TEST_CASE("replacement table loads and rejects malformed lines") {
  CHECK(table().size() > 20);
  REQUIRE(table().find(0xA0) != nullptr);
  CHECK(*table().find(0xA0) == U" ");
  CHECK(table().find(0xAD)->empty());
  CHECK_ERRC(NormalizationTable::parse("zz\tx\n"), Errc::FormatError);
  CHECK_ERRC(NormalizationTable::parse("00A0 x\n"), Errc::FormatError);
  // a replacement that is itself mapped would break idempotence
  CHECK_ERRC(NormalizationTable::parse("2013\t-\n002D\t\n"), Errc::FormatError);
}

TEST_CASE("normalize_text examples") {
  CHECK(normalize_text("a b", table()) == "a b");
  CHECK(normalize_text("  x   y ", table()) == "x y");
  CHECK(normalize_text("Se&nbsp;Bajasid", table()) == "Se Bajasid");
  CHECK(normalize_text("<b>Abo</b>.", table()) == "Abo.");
  CHECK(normalize_text("rad ett<br>rad två", table()) == "rad ett rad två");
  CHECK(normalize_text("Pleisse­n – Elster", table()) == "Pleissen - Elster");
  CHECK(normalize_text("&amp;lt;b&amp;gt;x", table()) == "bx");
  CHECK(normalize_text("1 &lt; 2", table()) == "1 2");
  CHECK(normalize_text("&#228;&#xE5;&ouml;", table()) == "äåö");
  CHECK(normalize_text("", table()).empty());
}

TEST_CASE("normalize_text is idempotent and tag free on random markup soup") {
  const std::vector<std::string> atoms = {
      "a", "Å", "ö", " ", "  ", "\n", "\t", "<", ">", "&", ";", "amp", "nbsp", "lt", "gt",
      "&amp;", "&nbsp;", "&lt;", "&gt;", "<b>", "</b>", "<br>", "<p>", " ", "­",
      "—", "“", "b", "#", "x", "4", "<!--", "-->", "&#60;", "&#x3E;"};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);
  std::uniform_int_distribution<int> len(0, 30);
  for (int iter = 0; iter < 3000; ++iter) {
    std::string s;
    for (int k = len(rng); k > 0; --k) s += atoms[pick(rng)];
    const auto once = normalize_text(s, table());
    CHECK(normalize_text(once, table()) == once);
    CHECK(once.find('<') == std::string::npos);
    CHECK(once.find('>') == std::string::npos);
    CHECK(once.find("  ") == std::string::npos);
  }
}

TEST_CASE("parse_page maps bold markup to spans") {
  const auto page = parse_page(page_html("<p><b>Abo.</b> stad i Finland."), Edition::First,
                               "nfaa", "0042", table());
  REQUIRE(page.paragraphs.size() == 1);
  CHECK(page.paragraphs[0].text == "Abo. stad i Finland.");
  REQUIRE(page.paragraphs[0].bold_spans.size() == 1);
  CHECK(page.paragraphs[0].bold_spans[0] == Span{0, 4});
  CHECK(page.index_words.empty());
}

TEST_CASE("bold spans use scalar offsets and survive whitespace collapse") {
  const auto page = parse_page(page_html("<p>  <b> Öved </b>,  socken <b>Natt  och Dag</b>"),
                               Edition::Second, "nfbs", "0318", table());
  REQUIRE(page.paragraphs.size() == 1);
  const auto& p = page.paragraphs[0];
  CHECK(p.text == "Öved , socken Natt och Dag");
  REQUIRE(p.bold_spans.size() == 2);
  CHECK(p.bold_spans[0] == Span{0, 4});
  CHECK(p.bold_spans[1] == Span{14, 26});
  const auto cps = utf8::decode(p.text);
  CHECK(utf8::encode(std::u32string_view(cps).substr(14, 12)) == "Natt och Dag");
}

TEST_CASE("page without a text region is malformed") {
  CHECK_ERRC(parse_page("<html><body>nothing</body></html>", Edition::First, "v", "p", table()),
             Errc::MalformedPage);
  CHECK_ERRC(parse_page("<!-- mode=normal --> text", Edition::First, "v", "p", table()),
             Errc::MalformedPage);
}

TEST_CASE("empty index region yields no index words") {
  const auto page = parse_page(page_html("<p>Text.", "Index: <a href='#'> </a>"),
                               Edition::First, "v", "p", table());
  CHECK(page.index_words.empty());
}

TEST_CASE("nfai_0520 fixture parses to the hand-built expectation") {
  const auto raw = read_file(fixture_dir() / "pages/nfai_0520.html");
  const auto page = parse_page(raw, Edition::First, "nfai", "0520", table());

  Page expected;
  expected.edition = Edition::First;
  expected.volume_id = "nfai";
  expected.page_id = "0520";
  expected.index_words = {"Leijonhufvud", "Leipzig"};
  expected.paragraphs = {
      {"Leijonhufvud, adlig, friherrlig och grefvelig ätt, härstammande från Småland. Se "
       "vidare Sture.",
       {{0, 13}}},
      {"1. Erik Abrahamsson L., riksråd, f. omkr. 1460 - d. 1520.", {}},
      {"Leipzig, stad i konungariket Sachsen, vid Pleissen och Elster.", {{0, 7}}},
  };
  CHECK(page == expected);

  std::string joined;
  for (const auto& p : page.paragraphs) joined += p.text + "\n";
  CHECK(joined ==
        "Leijonhufvud, adlig, friherrlig och grefvelig ätt, härstammande från Småland. Se "
        "vidare Sture.\n"
        "1. Erik Abrahamsson L., riksråd, f. omkr. 1460 - d. 1520.\n"
        "Leipzig, stad i konungariket Sachsen, vid Pleissen och Elster.\n");

  for (const auto& p : page.paragraphs) {
    CHECK(p.text.find('<') == std::string::npos);
    CHECK(p.text.find('>') == std::string::npos);
    const auto n = utf8::length(p.text);
    for (std::size_t i = 0; i < p.bold_spans.size(); ++i) {
      CHECK(p.bold_spans[i].start < p.bold_spans[i].end);
      CHECK(p.bold_spans[i].end <= n);
      if (i > 0) CHECK(p.bold_spans[i - 1].end <= p.bold_spans[i].start);
    }
  }

  CHECK(page_from_json(Json::parse(page_to_json(page).dump())) == page);
}
