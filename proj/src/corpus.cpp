#include "encyclink/corpus.hpp"

#include <array>
#include <regex>
#include <unordered_map>

#include "encyclink/error.hpp"
#include "encyclink/utf8.hpp"

namespace encyclink {

namespace fs = std::filesystem;

std::string_view edition_name(Edition e) noexcept {
  return e == Edition::First ? "first" : "second";
}

Edition parse_edition(std::string_view s) {
  if (s == "first" || s == "1") return Edition::First;
  if (s == "second" || s == "2") return Edition::Second;
  throw Error(Errc::FormatError, "unknown edition '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Replacement table

NormalizationTable NormalizationTable::load(const fs::path& path) {
  return parse(read_file(path));
}

NormalizationTable NormalizationTable::parse(std::string_view contents) {
  NormalizationTable t;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(Errc::FormatError, "replacement table line " + std::to_string(lineno) +
                                         ": expected <hex> TAB <replacement>");
    }
    const std::string hex(line.substr(0, tab));
    std::string_view rest = line.substr(tab + 1);
    // Optional trailing "TAB # comment".
    if (auto c = rest.find('\t'); c != std::string_view::npos) rest = rest.substr(0, c);

    char32_t cp = 0;
    try {
      std::size_t used = 0;
      cp = static_cast<char32_t>(std::stoul(hex, &used, 16));
      if (used != hex.size()) throw std::invalid_argument(hex);
    } catch (const std::exception&) {
      throw Error(Errc::FormatError,
                  "replacement table line " + std::to_string(lineno) + ": bad codepoint");
    }

    std::string repl;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (rest[i] == '\\' && i + 1 < rest.size()) {
        const char e = rest[++i];
        if (e == 's') repl.push_back(' ');
        else if (e == 't') repl.push_back('\t');
        else if (e == '\\') repl.push_back('\\');
        else throw Error(Errc::FormatError, "replacement table line " +
                                                std::to_string(lineno) + ": bad escape");
      } else {
        repl.push_back(rest[i]);
      }
    }
    t.map_[cp] = utf8::decode(repl);
  }
  for (const auto& [cp, repl] : t.map_) {
    for (char32_t r : repl) {
      if (t.map_.count(r) != 0) {
        throw Error(Errc::FormatError, "replacement for U+" + std::to_string(cp) +
                                           " contains a mapped codepoint");
      }
    }
  }
  return t;
}

const std::u32string* NormalizationTable::find(char32_t cp) const {
  auto it = map_.find(cp);
  return it == map_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

const std::unordered_map<std::string, char32_t>& named_entities() {
  static const std::unordered_map<std::string, char32_t> kMap = [] {
    std::unordered_map<std::string, char32_t> m{
        {"amp", U'&'},       {"lt", U'<'},         {"gt", U'>'},         {"quot", U'"'},
        {"apos", U'\''},     {"ndash", 0x2013},    {"mdash", 0x2014},    {"hellip", 0x2026},
        {"lsquo", 0x2018},   {"rsquo", 0x2019},    {"sbquo", 0x201A},    {"ldquo", 0x201C},
        {"rdquo", 0x201D},   {"bdquo", 0x201E},    {"minus", 0x2212},    {"thinsp", 0x2009},
        {"ensp", 0x2002},    {"emsp", 0x2003},     {"zwnj", 0x200C},     {"zwj", 0x200D},
        {"OElig", 0x152},    {"oelig", 0x153},     {"Scaron", 0x160},    {"scaron", 0x161},
        {"Yuml", 0x178},     {"fnof", 0x192},      {"lsaquo", 0x2039},   {"rsaquo", 0x203A},
    };
    // Latin-1 block, U+00A0..U+00FF, in code point order.
    static constexpr std::array<const char*, 96> kLatin1 = {
        "nbsp",   "iexcl",  "cent",   "pound",  "curren", "yen",    "brvbar", "sect",
        "uml",    "copy",   "ordf",   "laquo",  "not",    "shy",    "reg",    "macr",
        "deg",    "plusmn", "sup2",   "sup3",   "acute",  "micro",  "para",   "middot",
        "cedil",  "sup1",   "ordm",   "raquo",  "frac14", "frac12", "frac34", "iquest",
        "Agrave", "Aacute", "Acirc",  "Atilde", "Auml",   "Aring",  "AElig",  "Ccedil",
        "Egrave", "Eacute", "Ecirc",  "Euml",   "Igrave", "Iacute", "Icirc",  "Iuml",
        "ETH",    "Ntilde", "Ograve", "Oacute", "Ocirc",  "Otilde", "Ouml",   "times",
        "Oslash", "Ugrave", "Uacute", "Ucirc",  "Uuml",   "Yacute", "THORN",  "szlig",
        "agrave", "aacute", "acirc",  "atilde", "auml",   "aring",  "aelig",  "ccedil",
        "egrave", "eacute", "ecirc",  "euml",   "igrave", "iacute", "icirc",  "iuml",
        "eth",    "ntilde", "ograve", "oacute", "ocirc",  "otilde", "ouml",   "divide",
        "oslash", "ugrave", "uacute", "ucirc",  "uuml",   "yacute", "thorn",  "yuml",
    };
    for (std::size_t i = 0; i < kLatin1.size(); ++i) m.emplace(kLatin1[i], 0xA0 + i);
    return m;
  }();
  return kMap;
}

bool is_block_tag(std::u32string_view name) {
  static constexpr std::array<std::u32string_view, 20> kBlock = {
      U"p",  U"br", U"div", U"tr", U"td", U"th", U"li", U"ul", U"ol", U"table",
      U"h1", U"h2", U"h3",  U"h4", U"h5", U"h6", U"hr", U"blockquote", U"center", U"dd"};
  for (auto b : kBlock) {
    if (name == b) return true;
  }
  return false;
}

char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }

// Removes comments and tags. Block-level tags become a space; inline tags
// vanish so that "<b>Abo</b>." stays "Abo.".
std::u32string strip_tags(std::u32string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == U'<' && s.substr(i, 4) == U"<!--") {
      const auto end = s.find(U"-->", i + 4);
      if (end != std::u32string_view::npos) {
        i = end + 3;
        continue;
      }
    }
    if (s[i] == U'<' && i + 1 < s.size()) {
      const char32_t n = s[i + 1];
      const bool opener = (n == U'/' || n == U'!' || utf8::is_letter(n)) && n < 0x80;
      if (opener) {
        std::size_t j = i + 1;
        while (j < s.size() && s[j] != U'>' && s[j] != U'<') ++j;
        if (j < s.size() && s[j] == U'>') {
          std::size_t k = i + 1;
          if (k < j && s[k] == U'/') ++k;
          std::u32string name;
          while (k < j && s[k] < 0x80 && (utf8::is_letter(s[k]) || utf8::is_digit(s[k]))) {
            name.push_back(ascii_lower(s[k]));
            ++k;
          }
          if (is_block_tag(name)) out.push_back(U' ');
          i = j + 1;
          continue;
        }
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::u32string decode_entities(std::u32string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == U'&') {
      const auto semi = s.find(U';', i + 1);
      if (semi != std::u32string_view::npos && semi - i <= 12 && semi > i + 1) {
        const auto body = s.substr(i + 1, semi - i - 1);
        std::optional<char32_t> cp;
        if (body[0] == U'#') {
          std::string digits;
          int base = 10;
          std::size_t k = 1;
          if (k < body.size() && (body[k] == U'x' || body[k] == U'X')) {
            base = 16;
            ++k;
          }
          bool ok = k < body.size();
          for (; k < body.size(); ++k) {
            const char32_t c = body[k];
            const bool dig = utf8::is_digit(c) ||
                             (base == 16 && ((c >= U'a' && c <= U'f') || (c >= U'A' && c <= U'F')));
            if (!dig) {
              ok = false;
              break;
            }
            digits.push_back(static_cast<char>(c));
          }
          if (ok) {
            const auto v = std::stoul(digits, nullptr, base);
            if (v > 0 && v <= 0x10FFFF && !(v >= 0xD800 && v <= 0xDFFF)) {
              cp = static_cast<char32_t>(v);
            }
          }
        } else {
          std::string name;
          bool ok = true;
          for (char32_t c : body) {
            if (c >= 0x80 || !(utf8::is_letter(c) || utf8::is_digit(c))) {
              ok = false;
              break;
            }
            name.push_back(static_cast<char>(c));
          }
          if (ok) {
            const auto& m = named_entities();
            if (auto it = m.find(name); it != m.end()) cp = it->second;
          }
        }
        if (cp) {
          out.push_back(*cp);
          i = semi + 1;
          continue;
        }
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::u32string apply_table(std::u32string_view s, const NormalizationTable& table) {
  std::u32string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (const auto* r = table.find(c)) {
      out += *r;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

// Tag removal, entity decoding and replacement run to a fixpoint, so that
// escaped markup ("&amp;lt;b&amp;gt;") cannot survive a single pass.
std::u32string clean(std::u32string s, const NormalizationTable& table) {
  for (;;) {
    std::u32string next = apply_table(decode_entities(strip_tags(s)), table);
    if (next == s) return s;
    s = std::move(next);
  }
}

struct Flagged {
  char32_t c;
  bool bold;
};

// Collapses whitespace runs into one space (bold only if the whole run
// was bold) and trims both ends.
std::vector<Flagged> collapse(const std::vector<Flagged>& in) {
  std::vector<Flagged> out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    if (utf8::is_space(in[i].c)) {
      bool all_bold = true;
      while (i < in.size() && utf8::is_space(in[i].c)) {
        all_bold = all_bold && in[i].bold;
        ++i;
      }
      if (!out.empty() && i < in.size()) out.push_back({U' ', all_bold});
      continue;
    }
    out.push_back(in[i]);
    ++i;
  }
  return out;
}

const std::regex& bold_tag_re() {
  static const std::regex re(R"(<\s*(/?)\s*(b|strong)(\s[^<>]*)?>)", std::regex::icase);
  return re;
}

}  // namespace

std::string normalize_text(std::string_view raw, const NormalizationTable& table) {
  const auto cleaned = clean(utf8::decode(raw), table);
  std::vector<Flagged> flagged;
  flagged.reserve(cleaned.size());
  for (char32_t c : cleaned) flagged.push_back({c, false});
  std::string out;
  for (const auto& f : collapse(flagged)) utf8::append(out, f.c);
  return out;
}

Paragraph normalize_paragraph(std::string_view raw_html, const NormalizationTable& table) {
  std::vector<Flagged> flagged;
  const std::string raw(raw_html);
  int depth = 0;
  auto emit = [&](const std::string& chunk) {
    const auto cleaned = clean(utf8::decode(chunk), table);
    for (char32_t c : cleaned) flagged.push_back({c, depth > 0});
  };
  auto it = std::sregex_iterator(raw.begin(), raw.end(), bold_tag_re());
  std::size_t last = 0;
  for (; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    emit(raw.substr(last, static_cast<std::size_t>(m.position()) - last));
    if (m[1].length() == 0) {
      ++depth;
    } else if (depth > 0) {
      --depth;
    }
    last = static_cast<std::size_t>(m.position() + m.length());
  }
  emit(raw.substr(last));

  const auto collapsed = collapse(flagged);
  Paragraph p;
  std::u32string text;
  text.reserve(collapsed.size());
  for (const auto& f : collapsed) text.push_back(f.c);
  // Maximal bold runs, trimmed so that spans never start or end on a space.
  std::size_t i = 0;
  while (i < collapsed.size()) {
    if (!collapsed[i].bold) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < collapsed.size() && collapsed[j].bold) ++j;
    std::size_t s = i;
    std::size_t e = j;
    while (s < e && collapsed[s].c == U' ') ++s;
    while (e > s && collapsed[e - 1].c == U' ') --e;
    if (s < e) p.bold_spans.push_back({s, e});
    i = j;
  }
  p.text = utf8::encode(text);
  return p;
}

Page parse_page(std::string_view raw_html, Edition edition, std::string volume_id,
                std::string page_id, const NormalizationTable& table) {
  static constexpr std::string_view kTextStart = "<!-- mode=normal -->";
  static constexpr std::string_view kTextEnd = "<!-- NEWIMAGE2 -->";
  static constexpr std::string_view kIndexStart = "<!-- index -->";
  static constexpr std::string_view kIndexEnd = "<!-- /index -->";

  const auto ts = raw_html.find(kTextStart);
  const auto te = ts == std::string_view::npos ? ts : raw_html.find(kTextEnd, ts);
  if (ts == std::string_view::npos || te == std::string_view::npos) {
    throw Error(Errc::MalformedPage, "page " + volume_id + "/" + page_id +
                                         " has no OCR text region");
  }

  Page page;
  page.edition = edition;
  page.volume_id = std::move(volume_id);
  page.page_id = std::move(page_id);

  std::string region(raw_html.substr(ts + kTextStart.size(), te - ts - kTextStart.size()));
  static const std::regex para_tag(R"(<\s*/?\s*p(\s[^<>]*)?>)", std::regex::icase);
  region = std::regex_replace(region, para_tag, "\n\n");
  static const std::regex blank_line(R"(\n[ \t\r]*\n)");
  for (auto it = std::sregex_token_iterator(region.begin(), region.end(), blank_line, -1);
       it != std::sregex_token_iterator(); ++it) {
    Paragraph p = normalize_paragraph(it->str(), table);
    if (!p.text.empty()) page.paragraphs.push_back(std::move(p));
  }

  const auto is = raw_html.find(kIndexStart);
  if (is != std::string_view::npos) {
    const auto ie = raw_html.find(kIndexEnd, is);
    const std::string index(raw_html.substr(
        is + kIndexStart.size(),
        (ie == std::string_view::npos ? raw_html.size() : ie) - is - kIndexStart.size()));
    static const std::regex anchor(R"(<a\b[^>]*>([\s\S]*?)</a\s*>)", std::regex::icase);
    for (auto it = std::sregex_iterator(index.begin(), index.end(), anchor);
         it != std::sregex_iterator(); ++it) {
      auto word = normalize_text((*it)[1].str(), table);
      if (!word.empty()) page.index_words.push_back(std::move(word));
    }
  }
  return page;
}

// ---------------------------------------------------------------------------
// Page store

PageStore::PageStore(fs::path root) : root_(std::move(root)) {
  const auto manifest_path = root_ / "manifest.jsonl";
  if (!fs::exists(manifest_path)) {
    throw Error(Errc::IoError, "page store has no manifest: " + manifest_path.string());
  }
  for_each_jsonl(manifest_path, [&](const Json& j) {
    ManifestRecord r;
    try {
      r.edition = parse_edition(j.at("edition").get<std::string>());
      r.volume = j.at("volume").get<std::string>();
      r.page = j.at("page").get<std::string>();
      r.path = j.value("path", relative_path(r.edition, r.volume, r.page).generic_string());
      if (j.contains("letters")) r.letters = j.at("letters").get<std::string>();
    } catch (const Json::exception& e) {
      throw Error(Errc::FormatError, std::string("manifest record: ") + e.what());
    }
    manifest_.push_back(std::move(r));
  });
}

fs::path PageStore::relative_path(Edition e, std::string_view volume, std::string_view page) {
  return fs::path(std::string(edition_name(e))) / std::string(volume) /
         (std::string(page) + ".html");
}

std::string PageStore::read_raw(const ManifestRecord& rec) const {
  return read_file(root_ / rec.path);
}

std::vector<Page> PageStore::load_all(const NormalizationTable& table) const {
  std::vector<Page> pages;
  pages.reserve(manifest_.size());
  for (const auto& rec : manifest_) {
    pages.push_back(parse_page(read_raw(rec), rec.edition, rec.volume, rec.page, table));
  }
  return pages;
}

OrderedJson page_to_json(const Page& p) {
  OrderedJson paragraphs = OrderedJson::array();
  for (const auto& para : p.paragraphs) {
    OrderedJson spans = OrderedJson::array();
    for (const auto& s : para.bold_spans) spans.push_back({s.start, s.end});
    paragraphs.push_back({{"text", para.text}, {"bold_spans", spans}});
  }
  return {{"edition", edition_name(p.edition)},
          {"volume", p.volume_id},
          {"page", p.page_id},
          {"paragraphs", paragraphs},
          {"index_words", p.index_words}};
}

Page page_from_json(const Json& j) {
  Page p;
  try {
    p.edition = parse_edition(j.at("edition").get<std::string>());
    p.volume_id = j.at("volume").get<std::string>();
    p.page_id = j.at("page").get<std::string>();
    for (const auto& para : j.at("paragraphs")) {
      Paragraph out;
      out.text = para.at("text").get<std::string>();
      for (const auto& s : para.at("bold_spans")) {
        out.bold_spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
      }
      p.paragraphs.push_back(std::move(out));
    }
    p.index_words = j.at("index_words").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw Error(Errc::SchemaMismatch, std::string("page record: ") + e.what());
  }
  return p;
}

}  // namespace encyclink
