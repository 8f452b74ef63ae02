#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "encyclink/embedder.hpp"
#include "encyclink/logistic.hpp"
#include "encyclink/segmenter.hpp"

namespace encyclink {

// Logistic head over document embeddings.
struct LocationModel {
  std::vector<double> weights;
  double bias = 0.0;
  double threshold = 0.5;
  std::string provider_tag;

  std::size_t dim() const { return weights.size(); }

  OrderedJson to_json() const;
  static LocationModel from_json(const Json& j);
  void save(const std::filesystem::path& path) const;
  static LocationModel load(const std::filesystem::path& path);
};

struct LocationTrainingReport {
  LocationModel model;
  double final_loss = 0.0;
  int epochs = 0;
};

// Trains on embed(truncated_text) of each labeled entry. Throws
// SingleClassTraining when either label is missing.
LocationTrainingReport train_location_model(const std::vector<std::pair<Entry, bool>>& labeled,
                                            const Embedder& embedder,
                                            const LogisticOptions& options = {});

struct LocationPrediction {
  bool is_location = false;
  double probability = 0.0;
};

// Cross-reference entries are never locations and are not embedded.
LocationPrediction classify_location(const LocationModel& model, const Entry& entry,
                                     const Embedder& embedder);

// Batched form; embeds all non-crossref entries in one call.
std::vector<LocationPrediction> classify_locations(const LocationModel& model,
                                                   const std::vector<Entry>& entries,
                                                   const Embedder& embedder);

double location_probability(const LocationModel& model, const EmbeddingVector& v);

}  // namespace encyclink
