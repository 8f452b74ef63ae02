#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "encyclink/corpus.hpp"
#include "encyclink/features.hpp"
#include "encyclink/jsonl.hpp"
#include "encyclink/logistic.hpp"

namespace encyclink {

inline constexpr std::size_t kTruncateChars = 200;
inline constexpr double kIndexMatchThreshold = 0.15;

enum class Strategy { Bold, Index, Classifier };

std::string_view strategy_name(Strategy s) noexcept;
Strategy parse_strategy(std::string_view s);

struct EntryFlags {
  bool is_crossref = false;
  std::optional<std::string> crossref_target;
  bool is_location = false;
  bool operator==(const EntryFlags&) const = default;
};

struct Entry {
  std::string id;  // "<edition>/<volume>/<page>/<ordinal on page>"
  Edition edition = Edition::First;
  std::string volume_id;
  std::string page_id;
  std::string headword;
  std::string text;
  std::string truncated_text;
  Strategy strategy = Strategy::Bold;
  EntryFlags flags;
  std::optional<double> location_prob;
  bool operator==(const Entry&) const = default;
};

OrderedJson entry_to_json(const Entry& e);
Entry entry_from_json(const Json& j);

struct SegmentationStats {
  Edition edition = Edition::First;
  std::size_t total_entries = 0;
  std::size_t bold_count = 0;
  std::size_t index_count = 0;
  std::size_t classifier_count = 0;
  std::size_t continuation_paragraphs = 0;
  std::size_t subentry_paragraphs = 0;
  std::size_t orphan_paragraphs = 0;  // non-entries before any entry of their volume

  double proportion(Strategy s) const;
  OrderedJson to_json() const;
};

// Removes trailing '.', ',', ':', ';' and whitespace.
std::string strip_trailing_punct(std::string_view s);

// Headword when the paragraph opens with a bold run.
std::optional<std::string> match_bold(const Paragraph& paragraph);

// Tries index words longest first (ties lexicographic) against the text
// prefix of the same length; returns the first word within the threshold.
std::optional<std::string> match_index(const Paragraph& paragraph,
                                       const std::vector<std::string>& index_words,
                                       double threshold = kIndexMatchThreshold);

// A paragraph opening with a numbered subentry marker such as "1. ".
bool is_subentry_marker(std::string_view text);

struct LabeledText {
  std::string text;
  bool is_entry = false;
};

// Bold-initial paragraphs are positives; paragraphs starting with an
// uppercase letter outside `volume_letters` are negatives; the rest are
// left out.
std::vector<LabeledText> build_entry_training_set(const std::vector<Page>& pages,
                                                  const std::set<char32_t>& volume_letters);

// Initial letters of the bold headwords in a volume, used when the page
// store does not declare them.
std::set<char32_t> infer_volume_letters(const std::vector<Page>& pages);

struct EntryPrediction {
  bool is_entry = false;
  double probability = 0.0;
};

class EntryClassifier {
 public:
  EntryClassifier() = default;
  EntryClassifier(NgramConfig features, LogisticModel model, double threshold = 0.5)
      : features_(std::move(features)), model_(std::move(model)), threshold_(threshold) {}

  EntryPrediction predict(std::string_view paragraph_text) const;

  const NgramConfig& features() const { return features_; }
  const LogisticModel& model() const { return model_; }
  double threshold() const { return threshold_; }

  void save(const std::filesystem::path& path) const;
  static EntryClassifier load(const std::filesystem::path& path);
  std::string serialize() const;
  static EntryClassifier deserialize(std::string_view text);

 private:
  NgramConfig features_;
  LogisticModel model_;
  double threshold_ = 0.5;
};

struct EntryClassifierOptions {
  NgramConfig features;
  LogisticOptions optimizer;
  double threshold = 0.5;
};

EntryClassifier train_entry_classifier(const std::vector<LabeledText>& labeled,
                                       const EntryClassifierOptions& options = {});

EntryPrediction predict_entry(const EntryClassifier& clf, const Paragraph& paragraph);

// Headword for a classifier-detected entry: the text before the first
// '.', ',' or '(' (or the first word when none occurs), trimmed.
std::string classifier_headword(std::string_view text);

struct SegmentOptions {
  double index_threshold = kIndexMatchThreshold;
  std::size_t truncate_chars = kTruncateChars;
};

struct SegmentResult {
  std::vector<Entry> entries;
  SegmentationStats stats;
};

// Runs the cascade bold -> index -> classifier over every paragraph of one
// edition. Non-entry paragraphs extend the most recent entry of the same
// volume. Without a classifier the third step never fires.
SegmentResult segment(const std::vector<Page>& pages, const EntryClassifier* classifier,
                      const SegmentOptions& options = {});

}  // namespace encyclink
