// encyclink: command line front end for the pipeline stages.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "encyclink/error.hpp"
#include "encyclink/pipeline.hpp"

using namespace encyclink;

namespace {

struct Globals {
  std::string config;
  std::string workdir = "work";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> api_mode;
  std::optional<double> rate_limit;
  std::optional<double> link_threshold;
};

PipelineConfig make_config(const Globals& g) {
  PipelineConfig c = g.config.empty() ? PipelineConfig::from_json(Json::object())
                                      : PipelineConfig::load(g.config);
  // Flags go through the same validation as the file.
  Json j = c.to_json();
  if (g.seed) j["seed"] = *g.seed;
  if (g.api_mode) j["link"]["api_mode"] = *g.api_mode;
  if (g.rate_limit) j["link"]["requests_per_second"] = *g.rate_limit;
  if (g.link_threshold) j["link"]["threshold"] = *g.link_threshold;
  return PipelineConfig::from_json(j, c.base_dir);
}

void print_report(const StageReport& r) {
  std::cout << stage_name(r.stage) << ": " << r.summary.dump() << "\n";
  for (const auto& [file, sum] : r.checksums) std::cout << "  " << sum << "  " << file << "\n";
}

int exit_code(Errc c) {
  switch (c) {
    case Errc::ConfigError: return 2;
    case Errc::MissingUpstream: return 3;
    case Errc::SchemaMismatch:
    case Errc::GoldIdUnknown: return 4;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Segment, align and geolocate two encyclopedia editions"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--workdir", g.workdir, "Directory for stage artifacts")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for the HNSW graph");
  app.add_option("--api-mode", g.api_mode, "Knowledge-graph API mode")
      ->check(CLI::IsMember({"live", "record", "replay"}));
  app.add_option("--rate-limit", g.rate_limit, "API requests per second");
  app.add_option("--link-threshold", g.link_threshold, "Similarity threshold for linking");

  std::vector<std::pair<CLI::App*, Stage>> stage_commands;
  for (Stage s : kAllStages) {
    auto* sub = app.add_subcommand(std::string(stage_name(s)), "Run the " +
                                                                  std::string(stage_name(s)) +
                                                                  " stage");
    stage_commands.emplace_back(sub, s);
  }
  auto* run_all = app.add_subcommand("run-all", "Run every stage in order");

  std::string eval_stage;
  std::string gold;
  auto* eval = app.add_subcommand("eval", "Score a stage against a gold file");
  eval->add_option("stage", eval_stage, "segment, crossref, classify-locations, match or link")
      ->required();
  eval->add_option("--gold", gold, "Gold JSONL")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    Pipeline pipeline(make_config(g), g.workdir);
    if (run_all->parsed()) {
      for (const auto& r : pipeline.run_all()) print_report(r);
      return 0;
    }
    if (eval->parsed()) {
      const auto report = evaluate_stage(parse_stage(eval_stage), g.workdir, gold, pipeline.config());
      write_eval_report(report, g.workdir);
      std::cout << report.to_text();
      return 0;
    }
    for (const auto& [sub, stage] : stage_commands) {
      if (sub->parsed()) print_report(pipeline.run(stage));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
