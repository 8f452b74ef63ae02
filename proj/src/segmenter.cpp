#include "encyclink/segmenter.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>

#include "encyclink/error.hpp"
#include "encyclink/levenshtein.hpp"
#include "encyclink/utf8.hpp"

namespace encyclink {

std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::Bold: return "bold";
    case Strategy::Index: return "index";
    case Strategy::Classifier: return "classifier";
  }
  return "bold";
}

Strategy parse_strategy(std::string_view s) {
  if (s == "bold") return Strategy::Bold;
  if (s == "index") return Strategy::Index;
  if (s == "classifier") return Strategy::Classifier;
  throw Error(Errc::FormatError, "unknown strategy '" + std::string(s) + "'");
}

OrderedJson entry_to_json(const Entry& e) {
  OrderedJson j = {
      {"id", e.id},
      {"edition", edition_name(e.edition)},
      {"volume", e.volume_id},
      {"page", e.page_id},
      {"headword", e.headword},
      {"strategy", strategy_name(e.strategy)},
      {"is_crossref", e.flags.is_crossref},
      {"crossref_target", e.flags.crossref_target ? OrderedJson(*e.flags.crossref_target)
                                                  : OrderedJson(nullptr)},
      {"is_location", e.flags.is_location},
  };
  if (e.location_prob) j["location_prob"] = *e.location_prob;
  j["truncated_text"] = e.truncated_text;
  j["text"] = e.text;
  return j;
}

Entry entry_from_json(const Json& j) {
  Entry e;
  try {
    e.id = j.at("id").get<std::string>();
    e.edition = parse_edition(j.at("edition").get<std::string>());
    e.volume_id = j.at("volume").get<std::string>();
    e.page_id = j.at("page").get<std::string>();
    e.headword = j.at("headword").get<std::string>();
    e.strategy = parse_strategy(j.at("strategy").get<std::string>());
    e.text = j.at("text").get<std::string>();
    e.truncated_text = j.value("truncated_text", utf8::prefix(e.text, kTruncateChars));
    e.flags.is_crossref = j.value("is_crossref", false);
    if (j.contains("crossref_target") && !j.at("crossref_target").is_null()) {
      e.flags.crossref_target = j.at("crossref_target").get<std::string>();
    }
    e.flags.is_location = j.value("is_location", false);
    if (j.contains("location_prob") && !j.at("location_prob").is_null()) {
      e.location_prob = j.at("location_prob").get<double>();
    }
  } catch (const Json::exception& ex) {
    throw Error(Errc::SchemaMismatch, std::string("entry record: ") + ex.what());
  }
  return e;
}

double SegmentationStats::proportion(Strategy s) const {
  if (total_entries == 0) return 0.0;
  std::size_t c = 0;
  switch (s) {
    case Strategy::Bold: c = bold_count; break;
    case Strategy::Index: c = index_count; break;
    case Strategy::Classifier: c = classifier_count; break;
  }
  return static_cast<double>(c) / static_cast<double>(total_entries);
}

OrderedJson SegmentationStats::to_json() const {
  return {{"edition", edition_name(edition)},
          {"total_entries", total_entries},
          {"bold_count", bold_count},
          {"index_count", index_count},
          {"classifier_count", classifier_count},
          {"bold_share", proportion(Strategy::Bold)},
          {"index_share", proportion(Strategy::Index)},
          {"classifier_share", proportion(Strategy::Classifier)},
          {"continuation_paragraphs", continuation_paragraphs},
          {"subentry_paragraphs", subentry_paragraphs},
          {"orphan_paragraphs", orphan_paragraphs}};
}

namespace {

bool is_trailing_punct(char32_t c) {
  return c == U'.' || c == U',' || c == U':' || c == U';' || utf8::is_space(c);
}

std::u32string trim(std::u32string s) {
  std::size_t b = 0;
  while (b < s.size() && utf8::is_space(s[b])) ++b;
  std::size_t e = s.size();
  while (e > b && utf8::is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::string strip_trailing_punct(std::string_view s) {
  auto cps = utf8::decode(s);
  while (!cps.empty() && is_trailing_punct(cps.back())) cps.pop_back();
  return utf8::encode(trim(std::move(cps)));
}

std::optional<std::string> match_bold(const Paragraph& paragraph) {
  if (paragraph.bold_spans.empty() || paragraph.bold_spans.front().start != 0) return std::nullopt;
  const auto& span = paragraph.bold_spans.front();
  const auto cps = utf8::decode(paragraph.text);
  if (span.end > cps.size()) return std::nullopt;
  auto head = strip_trailing_punct(utf8::encode(std::u32string_view(cps).substr(0, span.end)));
  if (head.empty()) return std::nullopt;
  return head;
}

std::optional<std::string> match_index(const Paragraph& paragraph,
                                       const std::vector<std::string>& index_words,
                                       double threshold) {
  struct Word {
    std::u32string cps;
    const std::string* source;
  };
  std::vector<Word> words;
  words.reserve(index_words.size());
  for (const auto& w : index_words) {
    if (!w.empty()) words.push_back({utf8::decode(w), &w});
  }
  std::sort(words.begin(), words.end(), [](const Word& a, const Word& b) {
    if (a.cps.size() != b.cps.size()) return a.cps.size() > b.cps.size();
    return *a.source < *b.source;
  });
  const auto text = utf8::decode(paragraph.text);
  for (const auto& w : words) {
    const auto prefix = std::u32string_view(text).substr(0, std::min(w.cps.size(), text.size()));
    const double score =
        static_cast<double>(levenshtein(w.cps, prefix)) / static_cast<double>(w.cps.size());
    if (score <= threshold) return *w.source;
  }
  return std::nullopt;
}

bool is_subentry_marker(std::string_view text) {
  const auto cps = utf8::decode(text);
  std::size_t i = 0;
  while (i < cps.size() && utf8::is_digit(cps[i])) ++i;
  return i > 0 && i < cps.size() && cps[i] == U'.' &&
         (i + 1 == cps.size() || utf8::is_space(cps[i + 1]));
}

std::vector<LabeledText> build_entry_training_set(const std::vector<Page>& pages,
                                                  const std::set<char32_t>& volume_letters) {
  std::vector<LabeledText> out;
  for (const auto& page : pages) {
    for (const auto& para : page.paragraphs) {
      if (para.text.empty()) continue;
      if (!para.bold_spans.empty() && para.bold_spans.front().start == 0) {
        out.push_back({para.text, true});
        continue;
      }
      const char32_t first = utf8::decode(para.text).front();
      if (utf8::is_upper(first) && volume_letters.count(first) == 0) {
        out.push_back({para.text, false});
      }
    }
  }
  return out;
}

std::set<char32_t> infer_volume_letters(const std::vector<Page>& pages) {
  std::set<char32_t> letters;
  for (const auto& page : pages) {
    for (const auto& para : page.paragraphs) {
      if (auto head = match_bold(para)) {
        const char32_t c = utf8::decode(*head).front();
        if (utf8::is_letter(c)) letters.insert(utf8::to_upper(c));
      }
    }
  }
  return letters;
}

// ---------------------------------------------------------------------------
// Entry classifier

EntryPrediction EntryClassifier::predict(std::string_view paragraph_text) const {
  const auto x = ngram_featurize(utf8::prefix(paragraph_text, kTruncateChars), features_);
  const double p = model_.probability(x);
  return {p >= threshold_, p};
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(Errc::FormatError, "bad number '" + s + "' in model file");
  }
  return v;
}

constexpr std::string_view kClassifierMagic = "encyclink-entry-classifier v1";

}  // namespace

std::string EntryClassifier::serialize() const {
  std::ostringstream out;
  out << kClassifierMagic << '\n';
  out << "dims " << features_.dims << '\n';
  out << "orders";
  for (int o : features_.orders) out << ' ' << o;
  out << '\n';
  out << "seed " << features_.seed << '\n';
  out << "threshold " << format_double(threshold_) << '\n';
  out << "bias " << format_double(model_.bias) << '\n';
  std::size_t nnz = 0;
  for (double w : model_.weights) nnz += (w != 0.0);
  out << "weights " << model_.weights.size() << ' ' << nnz << '\n';
  for (std::size_t i = 0; i < model_.weights.size(); ++i) {
    if (model_.weights[i] != 0.0) out << i << ' ' << format_double(model_.weights[i]) << '\n';
  }
  return out.str();
}

EntryClassifier EntryClassifier::deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kClassifierMagic) {
    throw Error(Errc::FormatError, "not an entry classifier model");
  }
  auto expect = [&](std::string_view key) {
    std::string k;
    in >> k;
    if (k != key) throw Error(Errc::FormatError, "expected '" + std::string(key) + "' in model");
  };
  EntryClassifier clf;
  std::string tok;
  expect("dims");
  in >> clf.features_.dims;
  expect("orders");
  std::getline(in, line);
  clf.features_.orders.clear();
  {
    std::istringstream ol(line);
    int o = 0;
    while (ol >> o) clf.features_.orders.push_back(o);
  }
  expect("seed");
  in >> clf.features_.seed;
  expect("threshold");
  in >> tok;
  clf.threshold_ = parse_double(tok);
  expect("bias");
  in >> tok;
  clf.model_.bias = parse_double(tok);
  expect("weights");
  std::size_t dim = 0;
  std::size_t nnz = 0;
  in >> dim >> nnz;
  if (!in || dim != clf.features_.total_dims()) {
    throw Error(Errc::FormatError, "model weight dimension does not match its feature config");
  }
  clf.model_.weights.assign(dim, 0.0);
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t i = 0;
    in >> i >> tok;
    if (!in || i >= dim) throw Error(Errc::FormatError, "truncated model weights");
    clf.model_.weights[i] = parse_double(tok);
  }
  return clf;
}

void EntryClassifier::save(const std::filesystem::path& path) const {
  write_file_atomic(path, serialize());
}

EntryClassifier EntryClassifier::load(const std::filesystem::path& path) {
  return deserialize(read_file(path));
}

EntryClassifier train_entry_classifier(const std::vector<LabeledText>& labeled,
                                       const EntryClassifierOptions& options) {
  std::vector<SparseVector> xs;
  xs.reserve(labeled.size());
  for (const auto& l : labeled) {
    xs.push_back(ngram_featurize(utf8::prefix(l.text, kTruncateChars), options.features));
  }
  std::unique_ptr<bool[]> ys(new bool[labeled.size()]);
  for (std::size_t i = 0; i < labeled.size(); ++i) ys[i] = labeled[i].is_entry;
  auto fit = train_logistic(xs, std::span<const bool>(ys.get(), labeled.size()),
                            options.features.total_dims(), options.optimizer);
  return EntryClassifier(options.features, std::move(fit.model), options.threshold);
}

EntryPrediction predict_entry(const EntryClassifier& clf, const Paragraph& paragraph) {
  return clf.predict(paragraph.text);
}

std::string classifier_headword(std::string_view text) {
  const auto cps = utf8::decode(text);
  std::size_t cut = cps.size();
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] == U'.' || cps[i] == U',' || cps[i] == U'(') {
      cut = i;
      break;
    }
  }
  if (cut == cps.size()) {
    cut = 0;
    while (cut < cps.size() && !utf8::is_space(cps[cut])) ++cut;
  }
  return strip_trailing_punct(utf8::encode(std::u32string_view(cps).substr(0, cut)));
}

// ---------------------------------------------------------------------------
// Cascade

SegmentResult segment(const std::vector<Page>& pages, const EntryClassifier* classifier,
                      const SegmentOptions& options) {
  SegmentResult result;
  if (!pages.empty()) result.stats.edition = pages.front().edition;

  std::string current_volume;
  bool have_volume = false;
  std::optional<std::size_t> last_entry;

  auto finish = [&](std::size_t idx) {
    auto& e = result.entries[idx];
    e.truncated_text = utf8::prefix(e.text, options.truncate_chars);
  };

  for (const auto& page : pages) {
    if (!have_volume || page.volume_id != current_volume) {
      current_volume = page.volume_id;
      have_volume = true;
      last_entry.reset();
    }
    std::size_t ordinal = 0;
    for (const auto& para : page.paragraphs) {
      if (para.text.empty()) continue;

      std::optional<std::string> head;
      Strategy strategy = Strategy::Bold;
      const bool subentry = is_subentry_marker(para.text);
      if (subentry) {
        ++result.stats.subentry_paragraphs;
      } else if ((head = match_bold(para))) {
        strategy = Strategy::Bold;
      } else if ((head = match_index(para, page.index_words, options.index_threshold))) {
        strategy = Strategy::Index;
      } else if (classifier != nullptr && classifier->predict(para.text).is_entry) {
        auto h = classifier_headword(para.text);
        if (!h.empty()) {
          head = std::move(h);
          strategy = Strategy::Classifier;
        }
      }

      if (!head) {
        if (!last_entry) {
          ++result.stats.orphan_paragraphs;
          continue;
        }
        ++result.stats.continuation_paragraphs;
        auto& prev = result.entries[*last_entry];
        prev.text += '\n';
        prev.text += para.text;
        continue;
      }

      Entry e;
      e.edition = page.edition;
      e.volume_id = page.volume_id;
      e.page_id = page.page_id;
      e.id = std::string(edition_name(page.edition)) + "/" + page.volume_id + "/" + page.page_id +
             "/" + std::to_string(ordinal++);
      e.headword = std::move(*head);
      e.text = para.text;
      e.strategy = strategy;
      result.entries.push_back(std::move(e));
      last_entry = result.entries.size() - 1;

      ++result.stats.total_entries;
      switch (strategy) {
        case Strategy::Bold: ++result.stats.bold_count; break;
        case Strategy::Index: ++result.stats.index_count; break;
        case Strategy::Classifier: ++result.stats.classifier_count; break;
      }
    }
  }
  for (std::size_t i = 0; i < result.entries.size(); ++i) finish(i);
  return result;
}

}  // namespace encyclink
