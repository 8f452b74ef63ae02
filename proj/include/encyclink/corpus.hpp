#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "encyclink/jsonl.hpp"

namespace encyclink {

enum class Edition { First, Second };

std::string_view edition_name(Edition e) noexcept;
Edition parse_edition(std::string_view s);

// Half-open range of Unicode scalar offsets into Paragraph::text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

struct Paragraph {
  std::string text;
  std::vector<Span> bold_spans;
  bool operator==(const Paragraph&) const = default;
};

struct Page {
  Edition edition = Edition::First;
  std::string volume_id;
  std::string page_id;
  std::vector<Paragraph> paragraphs;
  std::vector<std::string> index_words;
  bool operator==(const Page&) const = default;
};

// Character replacement table applied during normalization. Loaded from
// the versioned TSV shipped under data/normalization/.
class NormalizationTable {
 public:
  NormalizationTable() = default;

  static NormalizationTable load(const std::filesystem::path& path);
  static NormalizationTable parse(std::string_view contents);

  const std::u32string* find(char32_t cp) const;
  std::size_t size() const { return map_.size(); }

 private:
  std::map<char32_t, std::u32string> map_;
};

// Strips markup, decodes character references, applies the replacement
// table, collapses whitespace runs and trims. Idempotent.
std::string normalize_text(std::string_view raw, const NormalizationTable& table);

// Normalizes one paragraph of page markup, keeping <b>/<strong> runs as
// spans over the normalized text.
Paragraph normalize_paragraph(std::string_view raw_html, const NormalizationTable& table);

// Parses an archive page. The OCR text sits between the comments
// "<!-- mode=normal -->" and "<!-- NEWIMAGE2 -->"; paragraphs are separated
// by <p> tags or blank lines. The proofread headword index, when present,
// is the list of anchors between "<!-- index -->" and "<!-- /index -->".
Page parse_page(std::string_view raw_html, Edition edition, std::string volume_id,
                std::string page_id, const NormalizationTable& table);

// One line of the page store manifest.
struct ManifestRecord {
  Edition edition = Edition::First;
  std::string volume;
  std::string page;
  std::string path;  // relative to the store root
  std::optional<std::string> letters;  // initial letters valid for the volume
};

// Page store: <root>/<edition>/<volume>/<page>.html plus <root>/manifest.jsonl.
class PageStore {
 public:
  explicit PageStore(std::filesystem::path root);

  const std::vector<ManifestRecord>& manifest() const { return manifest_; }
  std::string read_raw(const ManifestRecord& rec) const;
  std::vector<Page> load_all(const NormalizationTable& table) const;

  static std::filesystem::path relative_path(Edition e, std::string_view volume,
                                             std::string_view page);

 private:
  std::filesystem::path root_;
  std::vector<ManifestRecord> manifest_;
};

OrderedJson page_to_json(const Page& p);
Page page_from_json(const Json& j);

}  // namespace encyclink
