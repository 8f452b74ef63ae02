#include "encyclink/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <iostream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "encyclink/corpus.hpp"
#include "encyclink/crossref.hpp"
#include "encyclink/error.hpp"
#include "encyclink/geostats.hpp"
#include "encyclink/hash.hpp"
#include "encyclink/location.hpp"
#include "encyclink/parallel.hpp"
#include "encyclink/utf8.hpp"

namespace encyclink {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kBuiltin = "builtin";

// Reads keys from one config object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error(Errc::ConfigError, where_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      throw Error(Errc::ConfigError, where_ + "." + key + " has the wrong type");
    }
  }

  const Json* sub(const char* key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw Error(Errc::ConfigError, "unknown key " + where_ + "." + k);
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> used_;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::ConfigError, what);
}

void check_unit(double v, const std::string& key) {
  check(v >= 0.0 && v <= 1.0, key + " must lie in [0, 1]");
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_sha256(const fs::path& p) { return sha256_hex(read_file(p)); }

std::vector<Entry> read_entries(const fs::path& p) {
  std::vector<Entry> out;
  for_each_jsonl(p, [&](const Json& j) { out.push_back(entry_from_json(j)); });
  return out;
}

std::vector<OrderedJson> entries_json(const std::vector<Entry>& entries) {
  std::vector<OrderedJson> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(entry_to_json(e));
  return out;
}

bool linkable(const Entry& e) { return e.flags.is_location && !e.flags.is_crossref; }

std::vector<Entry> locations_of(const std::vector<Entry>& entries, Edition ed) {
  std::vector<Entry> out;
  for (const auto& e : entries) {
    if (e.edition == ed && linkable(e)) out.push_back(e);
  }
  return out;
}

// Entry ids start with the edition name.
Edition edition_of_id(const std::string& id) {
  return parse_edition(std::string_view(id).substr(0, id.find('/')));
}

std::set<char32_t> letter_set(const std::string& letters) {
  std::set<char32_t> out;
  for (char32_t c : utf8::decode(letters)) {
    if (utf8::is_letter(c)) out.insert(utf8::to_upper(c));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

PipelineConfig PipelineConfig::from_json(const Json& j, fs::path base_dir) {
  PipelineConfig c;
  c.base_dir = std::move(base_dir);
  Section top(j, "config");
  top.get("pages", c.pages);
  top.get("normalization_table", c.normalization_table);
  top.get("seed", c.seed);

  if (const Json* s = top.sub("segment")) {
    Section seg(*s, "segment");
    seg.get("index_threshold", c.segment.index_threshold);
    seg.get("truncate_chars", c.segment.truncate_chars);
    if (const Json* k = seg.sub("classifier")) {
      Section cls(*k, "segment.classifier");
      cls.get("enabled", c.entry_classifier_enabled);
      cls.get("dims", c.entry_classifier.features.dims);
      cls.get("orders", c.entry_classifier.features.orders);
      cls.get("hash_seed", c.entry_classifier.features.seed);
      cls.get("threshold", c.entry_classifier.threshold);
      cls.get("l2", c.entry_classifier.optimizer.l2);
      cls.get("learning_rate", c.entry_classifier.optimizer.learning_rate);
      cls.get("max_epochs", c.entry_classifier.optimizer.max_epochs);
      cls.get("tolerance", c.entry_classifier.optimizer.tolerance);
      cls.finish();
    }
    seg.finish();
  }
  if (const Json* s = top.sub("crossref")) {
    Section cr(*s, "crossref");
    cr.get("max_chars", c.crossref_max_chars);
    cr.finish();
  }
  if (const Json* s = top.sub("embedder")) c.embedder = EmbeddingProviderSpec::from_json(*s);
  if (const Json* s = top.sub("location")) {
    Section loc(*s, "location");
    loc.get("training", c.location_training);
    loc.get("threshold", c.location_threshold);
    loc.get("l2", c.location_optimizer.l2);
    loc.get("learning_rate", c.location_optimizer.learning_rate);
    loc.get("max_epochs", c.location_optimizer.max_epochs);
    loc.get("tolerance", c.location_optimizer.tolerance);
    loc.finish();
  }
  if (const Json* s = top.sub("match")) {
    Section m(*s, "match");
    m.get("threshold", c.match.threshold);
    m.get("k", c.match.k);
    std::string index(index_mode_name(c.index_mode));
    m.get("index", index);
    std::string strategy = c.match.strategy == MatchStrategy::Greedy ? "greedy" : "global";
    m.get("strategy", strategy);
    if (const Json* h = m.sub("hnsw")) {
      Section hs(*h, "match.hnsw");
      hs.get("M", c.hnsw.m);
      hs.get("ef_construction", c.hnsw.ef_construction);
      hs.get("ef_search", c.hnsw.ef_search);
      hs.finish();
    }
    m.finish();
    try {
      c.index_mode = parse_index_mode(index);
    } catch (const Error&) {
      throw Error(Errc::ConfigError, "match.index must be exact or hnsw");
    }
    if (strategy == "greedy") c.match.strategy = MatchStrategy::Greedy;
    else if (strategy == "global") c.match.strategy = MatchStrategy::Global;
    else throw Error(Errc::ConfigError, "match.strategy must be greedy or global");
  }
  if (const Json* s = top.sub("link")) {
    Section l(*s, "link");
    l.get("threshold", c.link.threshold);
    l.get("k", c.link.k);
    l.get("radius_km", c.radius_km);
    l.get("qk_expansion", c.link.qk_expansion);
    l.get("max_in_flight", c.link.max_in_flight);
    l.get("fixtures", c.api_fixtures);
    std::string mode(api_mode_name(c.api.mode));
    l.get("api_mode", mode);
    l.get("requests_per_second", c.api.requests_per_second);
    l.get("max_attempts", c.api.max_attempts);
    std::int64_t backoff = c.api.backoff_base.count();
    l.get("backoff_ms", backoff);
    c.api.backoff_base = std::chrono::milliseconds(backoff);
    l.get("wikidata_api", c.api.wikidata_api);
    l.get("wikipedia_api", c.api.wikipedia_api);
    l.get("language", c.api.language);
    l.finish();
    try {
      c.api.mode = parse_api_mode(mode);
    } catch (const Error&) {
      throw Error(Errc::ConfigError, "link.api_mode must be live, record or replay");
    }
  }
  if (const Json* s = top.sub("stats")) {
    Section st(*s, "stats");
    st.get("boundaries", c.boundaries);
    st.get("top_n", c.top_n);
    st.finish();
  }
  top.finish();

  check(c.segment.index_threshold >= 0.0, "segment.index_threshold must be non-negative");
  check(c.segment.truncate_chars > 0, "segment.truncate_chars must be positive");
  check(c.entry_classifier.features.dims > 0, "segment.classifier.dims must be positive");
  check(!c.entry_classifier.features.orders.empty(), "segment.classifier.orders is empty");
  for (int n : c.entry_classifier.features.orders) {
    check(n >= 1 && n <= 8, "segment.classifier.orders must lie in [1, 8]");
  }
  check_unit(c.entry_classifier.threshold, "segment.classifier.threshold");
  check(c.crossref_max_chars > 0, "crossref.max_chars must be positive");
  check_unit(c.location_threshold, "location.threshold");
  check_unit(c.match.threshold, "match.threshold");
  check(c.match.k > 0, "match.k must be positive");
  check(c.hnsw.m >= 2, "match.hnsw.M must be at least 2");
  check(c.hnsw.ef_construction > 0 && c.hnsw.ef_search > 0, "match.hnsw ef values must be positive");
  check_unit(c.link.threshold, "link.threshold");
  check(c.link.k > 0, "link.k must be positive");
  check(c.radius_km > 0.0, "link.radius_km must be positive");
  check(c.api.requests_per_second > 0.0, "link.requests_per_second must be positive");
  check(c.api.max_attempts >= 1, "link.max_attempts must be at least 1");
  check(c.top_n > 0, "stats.top_n must be positive");
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

OrderedJson PipelineConfig::to_json() const {
  const auto& f = entry_classifier.features;
  const auto& o = entry_classifier.optimizer;
  OrderedJson j;
  j["pages"] = pages;
  j["normalization_table"] = normalization_table;
  j["segment"] = {{"index_threshold", segment.index_threshold},
                  {"truncate_chars", segment.truncate_chars},
                  {"classifier",
                   {{"enabled", entry_classifier_enabled},
                    {"dims", f.dims},
                    {"orders", f.orders},
                    {"hash_seed", f.seed},
                    {"threshold", entry_classifier.threshold},
                    {"l2", o.l2},
                    {"learning_rate", o.learning_rate},
                    {"max_epochs", o.max_epochs},
                    {"tolerance", o.tolerance}}}};
  j["crossref"] = {{"max_chars", crossref_max_chars}};
  j["embedder"] = embedder.to_json();
  j["location"] = {{"training", location_training},
                   {"threshold", location_threshold},
                   {"l2", location_optimizer.l2},
                   {"learning_rate", location_optimizer.learning_rate},
                   {"max_epochs", location_optimizer.max_epochs},
                   {"tolerance", location_optimizer.tolerance}};
  j["match"] = {{"threshold", match.threshold},
                {"k", match.k},
                {"index", index_mode_name(index_mode)},
                {"strategy", match.strategy == MatchStrategy::Greedy ? "greedy" : "global"},
                {"hnsw",
                 {{"M", hnsw.m},
                  {"ef_construction", hnsw.ef_construction},
                  {"ef_search", hnsw.ef_search}}}};
  j["link"] = {{"threshold", link.threshold},
               {"k", link.k},
               {"radius_km", radius_km},
               {"qk_expansion", link.qk_expansion},
               {"max_in_flight", link.max_in_flight},
               {"fixtures", api_fixtures},
               {"api_mode", api_mode_name(api.mode)},
               {"requests_per_second", api.requests_per_second},
               {"max_attempts", api.max_attempts},
               {"backoff_ms", api.backoff_base.count()},
               {"wikidata_api", api.wikidata_api},
               {"wikipedia_api", api.wikipedia_api},
               {"language", api.language}};
  j["stats"] = {{"boundaries", boundaries}, {"top_n", top_n}};
  j["seed"] = seed;
  return j;
}

std::string PipelineConfig::run_id() const { return sha256_hex(to_json().dump()).substr(0, 16); }

fs::path PipelineConfig::resolve(const std::string& p) const {
  const fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path;
  return base_dir / path;
}

// ---------------------------------------------------------------------------
// Stages

std::string_view stage_name(Stage s) noexcept {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Segment: return "segment";
    case Stage::Crossref: return "crossref";
    case Stage::ClassifyLocations: return "classify-locations";
    case Stage::Match: return "match";
    case Stage::Link: return "link";
    case Stage::Stats: return "stats";
  }
  return "?";
}

Stage parse_stage(std::string_view s) {
  for (Stage st : kAllStages) {
    if (stage_name(st) == s) return st;
  }
  throw Error(Errc::ConfigError, "unknown stage '" + std::string(s) + "'");
}

const StageSpec& stage_spec(Stage s) {
  static const std::vector<StageSpec> specs = {
      {Stage::Ingest, {}, {"pages.jsonl"}},
      {Stage::Segment,
       {"pages.jsonl"},
       {"entries_segmented.jsonl", "segment_stats.json", "entry_classifier.txt"}},
      {Stage::Crossref, {"entries_segmented.jsonl"}, {"entries_crossref.jsonl", "crossrefs.jsonl"}},
      {Stage::ClassifyLocations,
       {"entries_crossref.jsonl"},
       {"entries_located.jsonl", "location_model.json"}},
      {Stage::Match, {"entries_located.jsonl"}, {"matches.jsonl", "matches_added.jsonl"}},
      {Stage::Link, {"entries_located.jsonl"}, {"links.jsonl"}},
      {Stage::Stats,
       {"links.jsonl"},
       {"stats.json", "map.geojson", "continent_shares.csv", "country_deltas.csv"}},
  };
  return specs[static_cast<std::size_t>(s)];
}

Pipeline::Pipeline(PipelineConfig config, fs::path workdir)
    : config_(std::move(config)), workdir_(std::move(workdir)) {}

Pipeline::~Pipeline() = default;

void Pipeline::set_embedder(std::shared_ptr<const Embedder> embedder) {
  embedder_ = std::move(embedder);
}

void Pipeline::set_transport(Transport transport) { transport_ = std::move(transport); }

const Embedder& Pipeline::embedder() {
  if (!embedder_) {
    auto spec = config_.embedder;
    if (spec.kind == ProviderKind::File) spec.endpoint_or_path = config_.resolve(spec.endpoint_or_path).string();
    embedder_ = make_embedder(spec);
  }
  return *embedder_;
}

void Pipeline::require_inputs(const StageSpec& spec) const {
  for (const auto& in : spec.inputs) {
    if (!fs::exists(workdir_ / in)) {
      throw Error(Errc::MissingUpstream, std::string(stage_name(spec.stage)) + " needs " + in +
                                             " in " + workdir_.string());
    }
  }
}

StageReport Pipeline::run(Stage stage) {
  const auto& spec = stage_spec(stage);
  require_inputs(spec);
  OrderedJson summary;
  std::vector<std::string> tags;
  switch (stage) {
    case Stage::Ingest: summary = ingest(); break;
    case Stage::Segment: summary = segment(); break;
    case Stage::Crossref: summary = crossref(); break;
    case Stage::ClassifyLocations:
      summary = classify_locations();
      tags.push_back(embedder().provider_tag());
      break;
    case Stage::Match:
      summary = match();
      tags.push_back(embedder().provider_tag());
      break;
    case Stage::Link:
      summary = link();
      tags.push_back(embedder().provider_tag());
      break;
    case Stage::Stats: summary = stats(); break;
  }
  return finish(spec, std::move(summary), tags);
}

std::vector<StageReport> Pipeline::run_all() {
  std::vector<StageReport> out;
  for (Stage s : kAllStages) out.push_back(run(s));
  return out;
}

StageReport Pipeline::finish(const StageSpec& spec, OrderedJson summary,
                             const std::vector<std::string>& provider_tags) {
  const std::string run_id = config_.run_id();
  OrderedJson inputs = OrderedJson::object();
  for (const auto& in : spec.inputs) inputs[in] = file_sha256(workdir_ / in);

  StageReport report;
  report.stage = spec.stage;
  report.summary = summary;
  OrderedJson outputs = OrderedJson::object();
  for (const auto& out : spec.outputs) {
    const fs::path p = workdir_ / out;
    fs::path meta = p;
    meta += ".meta.json";
    if (!fs::exists(p)) {
      std::error_code ec;
      fs::remove(meta, ec);
      continue;
    }
    const auto sum = file_sha256(p);
    report.checksums.emplace_back(out, sum);
    outputs[out] = sum;
    OrderedJson m = {{"artifact", out},
                     {"stage", stage_name(spec.stage)},
                     {"run_id", run_id},
                     {"manifest", kManifestFile},
                     {"sha256", sum},
                     {"inputs", inputs}};
    write_file_atomic(meta, m.dump(2) + "\n");
  }

  const fs::path manifest_path = workdir_ / kManifestFile;
  OrderedJson manifest;
  if (fs::exists(manifest_path)) {
    try {
      manifest = OrderedJson::parse(read_file(manifest_path));
    } catch (const OrderedJson::parse_error&) {
      manifest = OrderedJson();
    }
  }
  const auto now = timestamp_utc();
  if (!manifest.is_object() || !manifest.contains("created_at")) {
    manifest = OrderedJson::object();
    manifest["created_at"] = now;
  }
  manifest["updated_at"] = now;
  manifest["run_id"] = run_id;
  manifest["config"] = config_.to_json();
  OrderedJson old_stages = manifest.value("stages", OrderedJson::object());
  OrderedJson stages = OrderedJson::object();
  for (Stage s : kAllStages) {
    const std::string name(stage_name(s));
    if (s == spec.stage) {
      stages[name] = {{"run_id", run_id},     {"completed_at", now},
                      {"inputs", inputs},     {"outputs", outputs},
                      {"provider_tags", provider_tags}, {"summary", summary}};
    } else if (old_stages.contains(name)) {
      stages[name] = old_stages[name];
    }
  }
  manifest["stages"] = stages;
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  return report;
}

OrderedJson Pipeline::ingest() {
  if (config_.pages.empty()) throw Error(Errc::ConfigError, "config key 'pages' is not set");
  const PageStore store(config_.resolve(config_.pages));
  const auto table = config_.normalization_table == kBuiltin
                         ? NormalizationTable::load(fs::path(ENCYCLINK_DATA_DIR) / "normalization" /
                                                    "replacements_v1.tsv")
                         : NormalizationTable::load(config_.resolve(config_.normalization_table));
  const auto& manifest = store.manifest();
  std::vector<OrderedJson> records(manifest.size());
  std::size_t paragraphs = 0;
  std::vector<std::size_t> counts(manifest.size());
  parallel_for(manifest.size(), [&](std::size_t i) {
    const auto& rec = manifest[i];
    const Page p = parse_page(store.read_raw(rec), rec.edition, rec.volume, rec.page, table);
    counts[i] = p.paragraphs.size();
    records[i] = page_to_json(p);
    if (rec.letters) records[i]["letters"] = *rec.letters;
  });
  for (auto n : counts) paragraphs += n;
  write_jsonl_atomic(workdir_ / "pages.jsonl", records);
  return {{"pages", manifest.size()}, {"paragraphs", paragraphs}};
}

OrderedJson Pipeline::segment() {
  struct Volume {
    std::vector<Page> pages;
    std::optional<std::string> letters;
  };
  std::vector<Page> pages;
  std::vector<std::pair<std::pair<Edition, std::string>, Volume>> volumes;
  for_each_jsonl(workdir_ / "pages.jsonl", [&](const Json& j) {
    Page p = page_from_json(j);
    std::pair<Edition, std::string> key{p.edition, p.volume_id};
    auto it = std::find_if(volumes.begin(), volumes.end(),
                           [&](const auto& v) { return v.first == key; });
    if (it == volumes.end()) it = volumes.insert(volumes.end(), {key, Volume{}});
    if (j.contains("letters")) it->second.letters = j.at("letters").get<std::string>();
    it->second.pages.push_back(p);
    pages.push_back(std::move(p));
  });

  const fs::path model_path = workdir_ / "entry_classifier.txt";
  std::optional<EntryClassifier> classifier;
  OrderedJson training = {{"enabled", config_.entry_classifier_enabled}};
  if (config_.entry_classifier_enabled) {
    std::vector<LabeledText> labeled;
    for (const auto& [key, vol] : volumes) {
      const auto letters = vol.letters ? letter_set(*vol.letters) : infer_volume_letters(vol.pages);
      auto part = build_entry_training_set(vol.pages, letters);
      labeled.insert(labeled.end(), part.begin(), part.end());
    }
    std::size_t positives = 0;
    for (const auto& l : labeled) positives += l.is_entry ? 1 : 0;
    training["positives"] = positives;
    training["negatives"] = labeled.size() - positives;
    try {
      classifier = train_entry_classifier(labeled, config_.entry_classifier);
    } catch (const Error& e) {
      if (e.code() != Errc::SingleClassTraining) throw;
      std::cerr << "warning: entry classifier not trained (" << e.what()
                << "); the classifier step is skipped\n";
    }
  }
  training["trained"] = classifier.has_value();
  if (classifier) {
    classifier->save(model_path);
  } else {
    std::error_code ec;
    fs::remove(model_path, ec);
  }

  std::vector<Entry> entries;
  OrderedJson stats = OrderedJson::object();
  for (Edition ed : {Edition::First, Edition::Second}) {
    std::vector<Page> mine;
    for (const auto& p : pages) {
      if (p.edition == ed) mine.push_back(p);
    }
    if (mine.empty()) continue;
    auto result = encyclink::segment(mine, classifier ? &*classifier : nullptr, config_.segment);
    stats[std::string(edition_name(ed))] = result.stats.to_json();
    entries.insert(entries.end(), std::make_move_iterator(result.entries.begin()),
                   std::make_move_iterator(result.entries.end()));
  }
  write_jsonl_atomic(workdir_ / "entries_segmented.jsonl", entries_json(entries));
  OrderedJson stats_file = {{"editions", stats}, {"entry_classifier", training}};
  write_file_atomic(workdir_ / "segment_stats.json", stats_file.dump(2) + "\n");
  return {{"entries", entries.size()}, {"classifier_trained", classifier.has_value()}};
}

OrderedJson Pipeline::crossref() {
  auto entries = read_entries(workdir_ / "entries_segmented.jsonl");
  const auto run = apply_crossrefs(entries, config_.crossref_max_chars);
  std::vector<OrderedJson> refs;
  refs.reserve(run.references.size());
  for (const auto& c : run.references) refs.push_back(crossref_to_json(c));
  write_jsonl_atomic(workdir_ / "crossrefs.jsonl", refs);
  write_jsonl_atomic(workdir_ / "entries_crossref.jsonl", entries_json(entries));
  return {{"crossrefs", run.references.size()},
          {"partial", run.partial_count},
          {"unresolved", run.unresolved_count}};
}

OrderedJson Pipeline::classify_locations() {
  if (config_.location_training.empty()) {
    throw Error(Errc::ConfigError, "config key 'location.training' is not set");
  }
  const fs::path training_path = config_.resolve(config_.location_training);
  std::vector<std::pair<Entry, bool>> labeled;
  for (const auto& j : read_jsonl(training_path)) {
    Entry e;
    try {
      e.text = j.at("text").get<std::string>();
      e.headword = j.value("headword", std::string());
      labeled.emplace_back(std::move(e), j.at("is_location").get<bool>());
    } catch (const Json::exception& ex) {
      throw Error(Errc::FormatError, training_path.string() + ": " + ex.what());
    }
    auto& back = labeled.back().first;
    back.truncated_text = utf8::prefix(back.text, config_.segment.truncate_chars);
  }
  const Embedder& emb = embedder();
  auto report = train_location_model(labeled, emb, config_.location_optimizer);
  report.model.threshold = config_.location_threshold;
  report.model.save(workdir_ / "location_model.json");

  auto entries = read_entries(workdir_ / "entries_crossref.jsonl");
  const auto predictions = encyclink::classify_locations(report.model, entries, emb);
  OrderedJson per_edition = OrderedJson::object();
  std::map<Edition, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].flags.is_location = predictions[i].is_location;
    entries[i].location_prob = predictions[i].probability;
    auto& c = counts[entries[i].edition];
    ++c.first;
    if (predictions[i].is_location) ++c.second;
  }
  for (const auto& [ed, c] : counts) {
    per_edition[std::string(edition_name(ed))] = {
        {"entries", c.first},
        {"locations", c.second},
        {"proportion", c.first == 0 ? 0.0 : double(c.second) / double(c.first)}};
  }
  write_jsonl_atomic(workdir_ / "entries_located.jsonl", entries_json(entries));
  return {{"training_examples", labeled.size()},
          {"training_loss", report.final_loss},
          {"editions", per_edition}};
}

OrderedJson Pipeline::match() {
  const auto entries = read_entries(workdir_ / "entries_located.jsonl");
  const auto e1 = locations_of(entries, Edition::First);
  const auto e2 = locations_of(entries, Edition::Second);
  const Embedder& emb = embedder();
  HnswParams params = config_.hnsw;
  params.seed = config_.seed;
  const auto index = build_index(e2, emb, config_.index_mode, params);
  const auto result = match_editions(e1, index, emb, config_.match);
  write_jsonl_atomic(workdir_ / "matches.jsonl", match_records(result));
  write_jsonl_atomic(workdir_ / "matches_added.jsonl", added_records(result));
  return {{"pairs", result.pairs.size()},
          {"removed", result.removed.size()},
          {"added", result.added.size()}};
}

OrderedJson Pipeline::link() {
  std::unique_ptr<FixtureStore> store;
  if (!config_.api_fixtures.empty()) {
    store = std::make_unique<FixtureStore>(config_.resolve(config_.api_fixtures));
  } else if (config_.api.mode != ApiMode::Live) {
    throw Error(Errc::ConfigError, "link.fixtures is required in " +
                                       std::string(api_mode_name(config_.api.mode)) + " mode");
  }
  ApiClient client(config_.api, store.get(), transport_);
  const auto entries = read_entries(workdir_ / "entries_located.jsonl");
  const auto links = link_entries(entries, client, embedder(), config_.link);
  std::vector<OrderedJson> records;
  records.reserve(links.size());
  std::map<Edition, std::size_t> linked;
  for (const auto& l : links) {
    records.push_back(link_to_json(l));
    ++linked[edition_of_id(l.entry_id)];
  }
  std::map<Edition, std::size_t> candidates;
  for (const auto& e : entries) {
    if (linkable(e)) ++candidates[e.edition];
  }
  write_jsonl_atomic(workdir_ / "links.jsonl", records);
  OrderedJson per_edition = OrderedJson::object();
  for (const auto& [ed, n] : candidates) {
    per_edition[std::string(edition_name(ed))] = {{"locations", n}, {"linked", linked[ed]}};
  }
  return {{"editions", per_edition}, {"network_requests", client.network_requests()}};
}

OrderedJson Pipeline::stats() {
  const auto boundaries = config_.boundaries == kBuiltin
                              ? BoundarySet::load_default()
                              : BoundarySet::load(config_.resolve(config_.boundaries));
  EditionLinks first{Edition::First, {}};
  EditionLinks second{Edition::Second, {}};
  for_each_jsonl(workdir_ / "links.jsonl", [&](const Json& j) {
    auto l = link_from_json(j);
    (edition_of_id(l.entry_id) == Edition::First ? first : second).links.push_back(std::move(l));
  });
  const auto s1 = summarize(first.links, boundaries, Edition::First);
  const auto s2 = summarize(second.links, boundaries, Edition::Second);

  DeltaRanking ranking;
  const bool comparable = s1.assigned() > 0 && s2.assigned() > 0;
  if (comparable) ranking = country_deltas(s1, s2, config_.top_n);
  auto deltas_json = [](const std::vector<CountryDelta>& ds) {
    OrderedJson arr = OrderedJson::array();
    for (const auto& d : ds) {
      arr.push_back({{"country_code", d.country_code},
                     {"share_ed1_pct", d.share_ed1},
                     {"share_ed2_pct", d.share_ed2},
                     {"delta_pp", d.delta_pp}});
    }
    return arr;
  };
  OrderedJson out = {{"boundaries", boundaries.source()},
                     {"first", s1.to_json()},
                     {"second", s2.to_json()},
                     {"top_increases", deltas_json(ranking.increases)},
                     {"top_decreases", deltas_json(ranking.decreases)}};
  write_file_atomic(workdir_ / "stats.json", out.dump(2) + "\n");
  emit_map_data({first, second}, boundaries, workdir_ / "map.geojson");
  write_file_atomic(workdir_ / "continent_shares.csv", continent_shares_csv({s1, s2}));
  write_file_atomic(workdir_ / "country_deltas.csv", country_deltas_csv(ranking, boundaries));
  return {{"linked_first", s1.total_linked},
          {"linked_second", s2.total_linked},
          {"unassigned", s1.unassigned + s2.unassigned}};
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

std::string fmt_num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt2(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, ptr);
}

std::vector<Json> read_gold(const fs::path& path) {
  auto records = read_jsonl(path);
  if (records.empty()) throw Error(Errc::SchemaMismatch, "gold file is empty: " + path.string());
  return records;
}

void require_fields(const Json& j, std::initializer_list<const char*> keys, const fs::path& path) {
  for (const char* k : keys) {
    if (!j.is_object() || !j.contains(k)) {
      throw Error(Errc::SchemaMismatch, path.string() + ": record lacks '" + k + "'");
    }
  }
}

std::string opt_string(const Json& j, const char* key) {
  return j.at(key).is_null() ? std::string() : j.at(key).get<std::string>();
}

fs::path need(const fs::path& workdir, const char* file) {
  const auto p = workdir / file;
  if (!fs::exists(p)) throw Error(Errc::MissingUpstream, "evaluation needs " + p.string());
  return p;
}

Prf& column(EvalRow& row, Edition ed) {
  auto& slot = ed == Edition::First ? row.first : row.second;
  if (!slot) slot = Prf{};
  return *slot;
}

EvalReport eval_segment(const fs::path& workdir, const fs::path& gold_path) {
  const auto entries = read_entries(need(workdir, "entries_segmented.jsonl"));
  const auto gold = read_gold(gold_path);

  // A gold record names an entry start; predictions are judged only on
  // pages that appear in the gold sample.
  auto key = [](Edition ed, const std::string& vol, const std::string& page, const std::string& hw) {
    return std::string(edition_name(ed)) + "\x1f" + vol + "\x1f" + page + "\x1f" + hw;
  };
  auto page_key = [](Edition ed, const std::string& vol, const std::string& page) {
    return std::string(edition_name(ed)) + "\x1f" + vol + "\x1f" + page;
  };
  std::map<std::string, std::size_t> remaining;
  std::set<std::string> pages;
  std::map<std::string, std::vector<Strategy>> gold_strategies;

  EvalRow overall{"Segmenter", {}, {}};
  EvalRow by[3] = {{"Bold matching", {}, {}}, {"Index matching", {}, {}}, {"Entry classifier", {}, {}}};
  for (const auto& g : gold) {
    require_fields(g, {"edition", "volume", "page", "headword"}, gold_path);
    Edition ed;
    try {
      ed = parse_edition(g.at("edition").get<std::string>());
    } catch (const std::exception&) {
      throw Error(Errc::SchemaMismatch, gold_path.string() + ": bad edition");
    }
    const auto vol = g.at("volume").get<std::string>();
    const auto page = g.at("page").get<std::string>();
    const auto k = key(ed, vol, page, g.at("headword").get<std::string>());
    ++remaining[k];
    pages.insert(page_key(ed, vol, page));
    ++column(overall, ed).gold;
    if (g.contains("strategy") && !g.at("strategy").is_null()) {
      const auto s = parse_strategy(g.at("strategy").get<std::string>());
      gold_strategies[k].push_back(s);
      ++column(by[static_cast<int>(s)], ed).gold;
    }
  }
  for (const auto& e : entries) {
    if (!pages.count(page_key(e.edition, e.volume_id, e.page_id))) continue;
    auto& row = by[static_cast<int>(e.strategy)];
    ++column(overall, e.edition).predicted;
    ++column(row, e.edition).predicted;
    const auto k = key(e.edition, e.volume_id, e.page_id, e.headword);
    auto it = remaining.find(k);
    if (it == remaining.end() || it->second == 0) continue;
    --it->second;
    ++column(overall, e.edition).correct;
    auto& gs = gold_strategies[k];
    if (auto s = std::find(gs.begin(), gs.end(), e.strategy); s != gs.end()) {
      gs.erase(s);
      ++column(row, e.edition).correct;
    } else if (gs.empty()) {
      // gold without strategy labels: the start is right, count it for precision
      ++column(row, e.edition).correct;
    }
  }
  EvalReport r;
  r.stage = Stage::Segment;
  r.rows.push_back(overall);
  for (auto& row : by) r.rows.push_back(row);
  return r;
}

std::unordered_map<std::string, Edition> entry_editions(const std::vector<Entry>& entries) {
  std::unordered_map<std::string, Edition> out;
  for (const auto& e : entries) out.emplace(e.id, e.edition);
  return out;
}

EvalReport eval_crossref(const fs::path& workdir, const fs::path& gold_path) {
  const auto entries = read_entries(need(workdir, "entries_crossref.jsonl"));
  const auto ids = entry_editions(entries);
  std::unordered_map<std::string, std::string> resolved;  // source -> resolved id ("" if none)
  for (const auto& j : read_jsonl(need(workdir, "crossrefs.jsonl"))) {
    resolved[j.at("source_id").get<std::string>()] = opt_string(j, "resolved_id");
  }
  const auto gold = read_gold(gold_path);

  EvalRow detection{"Cross-reference detection", {}, {}};
  EvalRow linking{"Cross-references", {}, {}};
  for (const auto& g : gold) {
    require_fields(g, {"source_id", "target_word", "resolved_id"}, gold_path);
    const auto id = g.at("source_id").get<std::string>();
    auto it = ids.find(id);
    if (it == ids.end()) throw Error(Errc::GoldIdUnknown, "unknown entry id " + id);
    const Edition ed = it->second;
    const bool gold_ref = !g.at("target_word").is_null();
    const std::string gold_target = opt_string(g, "resolved_id");
    auto pred = resolved.find(id);
    const bool pred_ref = pred != resolved.end();
    auto& d = column(detection, ed);
    auto& l = column(linking, ed);
    if (gold_ref) ++d.gold;
    if (pred_ref) ++d.predicted;
    if (gold_ref && pred_ref) ++d.correct;
    if (!gold_target.empty()) ++l.gold;
    if (pred_ref && !pred->second.empty()) {
      ++l.predicted;
      if (pred->second == gold_target) ++l.correct;
    }
  }
  EvalReport r;
  r.stage = Stage::Crossref;
  r.rows = {detection, linking};
  return r;
}

EvalReport eval_locations(const fs::path& workdir, const fs::path& gold_path) {
  const auto entries = read_entries(need(workdir, "entries_located.jsonl"));
  std::unordered_map<std::string, const Entry*> by_id;
  for (const auto& e : entries) by_id.emplace(e.id, &e);
  EvalRow row{"Location classifier", {}, {}};
  for (const auto& g : read_gold(gold_path)) {
    require_fields(g, {"entry_id", "is_location"}, gold_path);
    const auto id = g.at("entry_id").get<std::string>();
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(Errc::GoldIdUnknown, "unknown entry id " + id);
    const bool gold_pos = g.at("is_location").get<bool>();
    const bool pred_pos = it->second->flags.is_location;
    auto& c = column(row, it->second->edition);
    if (gold_pos) ++c.gold;
    if (pred_pos) ++c.predicted;
    if (gold_pos && pred_pos) ++c.correct;
  }
  EvalReport r;
  r.stage = Stage::ClassifyLocations;
  r.rows = {row};
  return r;
}

EvalReport eval_match(const fs::path& workdir, const fs::path& gold_path) {
  const auto records = read_gold(gold_path);
  for (const auto& g : records) require_fields(g, {"e1_id", "e2_id"}, gold_path);
  const auto gold = read_match_gold(records);
  const auto predicted = match_result_from_records(read_jsonl(need(workdir, "matches.jsonl")),
                                                   read_jsonl(need(workdir, "matches_added.jsonl")),
                                                   kMatchThreshold);
  const auto entries = read_entries(need(workdir, "entries_located.jsonl"));
  const auto baseline = baseline_headword_match(locations_of(entries, Edition::First),
                                                locations_of(entries, Edition::Second));
  EvalReport r;
  r.stage = Stage::Match;
  r.rows.push_back({"Entry matching", evaluate_matching(predicted, gold), std::nullopt});
  r.rows.push_back({"Baseline: headword match", evaluate_matching(baseline, gold), std::nullopt});
  return r;
}

EvalReport eval_link(const fs::path& workdir, const fs::path& gold_path, double radius_km) {
  const auto entries = read_entries(need(workdir, "entries_located.jsonl"));
  std::unordered_set<std::string> known;
  for (const auto& e : entries) known.insert(e.id);
  const auto ids = entry_editions(entries);
  std::vector<LinkedLocation> links;
  for_each_jsonl(need(workdir, "links.jsonl"), [&](const Json& j) { links.push_back(link_from_json(j)); });
  const auto records = read_gold(gold_path);
  for (const auto& g : records) require_fields(g, {"entry_id", "qid", "lat", "lon"}, gold_path);
  const auto gold = read_link_gold(records);

  EvalRow qid{"QID match", {}, {}};
  EvalRow radius{"Within " + fmt_num(radius_km) + " km", {}, {}};
  for (Edition ed : {Edition::First, Edition::Second}) {
    std::vector<GoldLink> g_ed;
    for (const auto& g : gold) {
      auto it = ids.find(g.entry_id);
      if (it == ids.end()) throw Error(Errc::GoldIdUnknown, "unknown entry id " + g.entry_id);
      if (it->second == ed) g_ed.push_back(g);
    }
    if (g_ed.empty()) continue;
    std::vector<LinkedLocation> p_ed;
    for (const auto& l : links) {
      if (edition_of_id(l.entry_id) == ed) p_ed.push_back(l);
    }
    const auto m = evaluate_linking(p_ed, g_ed, radius_km, &known);
    column(qid, ed) = m.qid_match;
    column(radius, ed) = m.within_radius;
  }
  EvalReport r;
  r.stage = Stage::Link;
  r.rows = {qid, radius};
  return r;
}

}  // namespace

EvalReport evaluate_stage(Stage stage, const fs::path& workdir, const fs::path& gold_path,
                          const PipelineConfig& config) {
  switch (stage) {
    case Stage::Segment: return eval_segment(workdir, gold_path);
    case Stage::Crossref: return eval_crossref(workdir, gold_path);
    case Stage::ClassifyLocations: return eval_locations(workdir, gold_path);
    case Stage::Match: return eval_match(workdir, gold_path);
    case Stage::Link: return eval_link(workdir, gold_path, config.radius_km);
    default: break;
  }
  throw Error(Errc::ConfigError, "stage " + std::string(stage_name(stage)) + " has no evaluation");
}

std::string EvalReport::to_csv() const {
  std::string out = "stage,method,edition,correct,predicted,gold,precision,recall,f1\n";
  for (const auto& row : rows) {
    for (Edition ed : {Edition::First, Edition::Second}) {
      const auto& c = ed == Edition::First ? row.first : row.second;
      if (!c) continue;
      out += std::string(stage_name(stage)) + "," + row.method + "," +
             std::string(edition_name(ed)) + "," + std::to_string(c->correct) + "," +
             std::to_string(c->predicted) + "," + std::to_string(c->gold) + ",";
      out += (c->predicted ? fmt_num(c->precision()) : "") + ",";
      out += (c->gold ? fmt_num(c->recall()) : "") + ",";
      out += (c->predicted && c->gold ? fmt_num(c->f1()) : "") + "\n";
    }
  }
  return out;
}

std::string EvalReport::to_text() const {
  auto pad = [](std::string s, std::size_t w) {
    const auto n = utf8::length(s);
    if (n < w) s.append(w - n, ' ');
    return s;
  };
  auto cells = [&](const std::optional<Prf>& c) {
    std::string out;
    if (!c) return pad("-", 10) + pad("-", 10) + pad("-", 10);
    out += pad(c->predicted ? fmt2(c->precision()) : "-", 10);
    out += pad(c->gold ? fmt2(c->recall()) : "-", 10);
    out += pad(c->predicted && c->gold ? fmt2(c->f1()) : "-", 10);
    return out;
  };
  std::size_t w = 8;
  for (const auto& row : rows) w = std::max(w, utf8::length(row.method) + 2);
  std::string out = pad("Method", w) + "| " + pad("First edition", 30) + "| Second edition\n";
  out += pad("", w) + "| " + pad("Precision", 10) + pad("Recall", 10) + pad("F1", 10) + "| " +
         pad("Precision", 10) + pad("Recall", 10) + "F1\n";
  for (const auto& row : rows) {
    std::string second = cells(row.second);
    while (!second.empty() && second.back() == ' ') second.pop_back();
    out += pad(row.method, w) + "| " + cells(row.first) + "| " + second + "\n";
  }
  return out;
}

void write_eval_report(const EvalReport& report, const fs::path& workdir) {
  const std::string name(stage_name(report.stage));
  write_file_atomic(workdir / "eval" / (name + ".csv"), report.to_csv());
  write_file_atomic(workdir / "eval" / (name + ".txt"), report.to_text());
}

}  // namespace encyclink
