#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "encyclink/crossref.hpp"
#include "encyclink/embedder.hpp"
#include "encyclink/jsonl.hpp"
#include "encyclink/logistic.hpp"
#include "encyclink/matcher.hpp"
#include "encyclink/segmenter.hpp"
#include "encyclink/wikilinker.hpp"

namespace encyclink {

// Every threshold is a named key; the defaults are the values used by the
// library functions. Paths are kept as written and resolved against
// base_dir (the directory of the config file) when used. "builtin" selects
// the data files shipped under data/.
struct PipelineConfig {
  std::string pages;  // page store root
  std::string normalization_table = "builtin";

  SegmentOptions segment;
  bool entry_classifier_enabled = true;
  EntryClassifierOptions entry_classifier;

  std::size_t crossref_max_chars = kCrossrefMaxChars;

  EmbeddingProviderSpec embedder;

  std::string location_training;  // JSONL {text, is_location}
  double location_threshold = 0.5;
  LogisticOptions location_optimizer;

  MatchOptions match;
  IndexMode index_mode = IndexMode::Hnsw;
  HnswParams hnsw;

  LinkOptions link;
  double radius_km = kRadiusKm;
  ApiClientOptions api;
  std::string api_fixtures;

  std::string boundaries = "builtin";
  std::size_t top_n = 5;

  std::uint64_t seed = 42;  // HNSW construction

  std::filesystem::path base_dir;  // not part of the snapshot

  // Unknown keys and out-of-range values throw ConfigError.
  static PipelineConfig from_json(const Json& j, std::filesystem::path base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path);
  OrderedJson to_json() const;

  // First 16 hex digits of sha256 over the canonical snapshot.
  std::string run_id() const;

  std::filesystem::path resolve(const std::string& p) const;
};

enum class Stage { Ingest, Segment, Crossref, ClassifyLocations, Match, Link, Stats };

inline constexpr Stage kAllStages[] = {Stage::Ingest,            Stage::Segment, Stage::Crossref,
                                       Stage::ClassifyLocations, Stage::Match,   Stage::Link,
                                       Stage::Stats};

std::string_view stage_name(Stage s) noexcept;
Stage parse_stage(std::string_view s);  // ConfigError for unknown names

struct StageSpec {
  Stage stage;
  std::vector<std::string> inputs;   // workdir artifacts produced by earlier stages
  std::vector<std::string> outputs;  // first entry is the primary artifact
};

const StageSpec& stage_spec(Stage s);

struct StageReport {
  Stage stage = Stage::Ingest;
  std::vector<std::pair<std::string, std::string>> checksums;  // file, sha256 hex
  OrderedJson summary;
};

// Runs one stage inside workdir. Throws MissingUpstream when a declared
// input is absent. Outputs are written atomically, each with a
// "<file>.meta.json" sidecar naming the run id and the manifest; the run
// manifest records checksums, provider tags and timestamps.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::filesystem::path workdir);
  ~Pipeline();

  const PipelineConfig& config() const { return config_; }
  const std::filesystem::path& workdir() const { return workdir_; }

  StageReport run(Stage stage);
  std::vector<StageReport> run_all();

  // Overrides the embedder built from the config (tests).
  void set_embedder(std::shared_ptr<const Embedder> embedder);
  // Overrides the API transport used in live and record modes (tests).
  void set_transport(Transport transport);

 private:
  const Embedder& embedder();
  void require_inputs(const StageSpec& spec) const;
  StageReport finish(const StageSpec& spec, OrderedJson summary,
                     const std::vector<std::string>& provider_tags);

  OrderedJson ingest();
  OrderedJson segment();
  OrderedJson crossref();
  OrderedJson classify_locations();
  OrderedJson match();
  OrderedJson link();
  OrderedJson stats();

  PipelineConfig config_;
  std::filesystem::path workdir_;
  std::shared_ptr<const Embedder> embedder_;
  Transport transport_;
};

inline constexpr std::string_view kManifestFile = "run_manifest.json";

// ---------------------------------------------------------------------------
// Evaluation

struct EvalRow {
  std::string method;
  std::optional<Prf> first;
  std::optional<Prf> second;
};

struct EvalReport {
  Stage stage = Stage::Ingest;
  std::vector<EvalRow> rows;

  // stage,method,edition,correct,predicted,gold,precision,recall,f1
  std::string to_csv() const;
  // Method | first P R F1 | second P R F1, "-" where not applicable.
  std::string to_text() const;
};

// Gold schemas (JSONL):
//   segment             {edition, volume, page, headword, strategy?}
//   crossref            {source_id, target_word|null, resolved_id|null}
//   classify-locations  {entry_id, is_location}
//   match               {e1_id, e2_id|null}
//   link                {entry_id, qid, lat, lon}
// An empty gold file or a record missing a required field throws
// SchemaMismatch.
EvalReport evaluate_stage(Stage stage, const std::filesystem::path& workdir,
                          const std::filesystem::path& gold_path,
                          const PipelineConfig& config = {});

// Writes eval/<stage>.csv and eval/<stage>.txt under workdir.
void write_eval_report(const EvalReport& report, const std::filesystem::path& workdir);

}  // namespace encyclink
