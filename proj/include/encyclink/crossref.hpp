#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "encyclink/jsonl.hpp"
#include "encyclink/segmenter.hpp"

namespace encyclink {

inline constexpr std::size_t kCrossrefMaxChars = 60;

struct CrossReference {
  std::string source_id;
  std::string source_headword;
  std::string target_word;
  std::optional<std::string> resolved_entry_id;
  bool partial = false;  // "Se X och Y": only X is resolved
};

struct CrossrefDetection {
  std::string target_word;
  bool partial = false;
};

// An entry shorter than 60 scalar values whose text contains " Se "
// followed by a word is a cross-reference; the word (letters, Swedish
// letters and hyphens) is the target.
std::optional<CrossrefDetection> detect_crossref_detail(std::string_view text,
                                                       std::size_t max_chars = kCrossrefMaxChars);
std::optional<std::string> detect_crossref(const Entry& entry,
                                           std::size_t max_chars = kCrossrefMaxChars);

// Id of the first entry whose headword equals target_word exactly.
std::optional<std::string> resolve_crossref(std::string_view target_word,
                                            const std::vector<Entry>& entries);

struct CrossrefRun {
  std::vector<CrossReference> references;
  std::size_t partial_count = 0;
  std::size_t unresolved_count = 0;
};

// Flags cross-reference entries in place and resolves each within its edition.
CrossrefRun apply_crossrefs(std::vector<Entry>& entries,
                            std::size_t max_chars = kCrossrefMaxChars);

OrderedJson crossref_to_json(const CrossReference& c);

}  // namespace encyclink
