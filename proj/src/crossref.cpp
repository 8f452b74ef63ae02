#include "encyclink/crossref.hpp"

#include <map>

#include "encyclink/utf8.hpp"

namespace encyclink {

namespace {

bool is_word_char(char32_t c) { return utf8::is_letter(c) || c == U'-'; }

}  // namespace

std::optional<CrossrefDetection> detect_crossref_detail(std::string_view text,
                                                       std::size_t max_chars) {
  const auto cps = utf8::decode(text);
  if (cps.size() >= max_chars) return std::nullopt;

  static constexpr std::u32string_view kMarker = U" Se ";
  std::size_t from = 0;
  for (;;) {
    const auto at = std::u32string_view(cps).find(kMarker, from);
    if (at == std::u32string_view::npos) return std::nullopt;
    std::size_t b = at + kMarker.size();
    std::size_t e = b;
    while (e < cps.size() && is_word_char(cps[e])) ++e;
    // trailing hyphens belong to line breaks, not to the word
    while (e > b && cps[e - 1] == U'-') --e;
    if (e > b) {
      CrossrefDetection d;
      d.target_word = utf8::encode(std::u32string_view(cps).substr(b, e - b));
      const auto rest = utf8::encode(std::u32string_view(cps).substr(e));
      d.partial = rest.find(" och ") != std::string::npos || rest.find(", ") == 0;
      return d;
    }
    from = at + 1;
  }
}

std::optional<std::string> detect_crossref(const Entry& entry, std::size_t max_chars) {
  auto d = detect_crossref_detail(entry.text, max_chars);
  if (!d) return std::nullopt;
  return std::move(d->target_word);
}

std::optional<std::string> resolve_crossref(std::string_view target_word,
                                            const std::vector<Entry>& entries) {
  for (const auto& e : entries) {
    if (e.headword == target_word) return e.id;
  }
  return std::nullopt;
}

CrossrefRun apply_crossrefs(std::vector<Entry>& entries, std::size_t max_chars) {
  // First entry per (edition, headword); same answer as a linear scan.
  std::map<std::pair<Edition, std::string>, std::string> first_by_headword;
  for (const auto& e : entries) first_by_headword.try_emplace({e.edition, e.headword}, e.id);

  CrossrefRun run;
  for (auto& e : entries) {
    const auto d = detect_crossref_detail(e.text, max_chars);
    e.flags.is_crossref = d.has_value();
    e.flags.crossref_target.reset();
    if (!d) continue;
    e.flags.crossref_target = d->target_word;
    e.flags.is_location = false;
    CrossReference c;
    c.source_id = e.id;
    c.source_headword = e.headword;
    c.target_word = d->target_word;
    c.partial = d->partial;
    if (auto it = first_by_headword.find({e.edition, d->target_word});
        it != first_by_headword.end()) {
      c.resolved_entry_id = it->second;
    } else {
      ++run.unresolved_count;
    }
    if (c.partial) ++run.partial_count;
    run.references.push_back(std::move(c));
  }
  return run;
}

OrderedJson crossref_to_json(const CrossReference& c) {
  return {{"source_id", c.source_id},
          {"source_headword", c.source_headword},
          {"target_word", c.target_word},
          {"resolved_id", c.resolved_entry_id ? OrderedJson(*c.resolved_entry_id)
                                              : OrderedJson(nullptr)},
          {"partial", c.partial}};
}

}  // namespace encyclink
