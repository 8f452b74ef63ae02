#include "encyclink/location.hpp"

#include <memory>

#include "encyclink/error.hpp"

namespace encyclink {

namespace {

SparseVector as_sparse(const EmbeddingVector& v) {
  SparseVector s;
  s.entries.reserve(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) {
    s.entries.emplace_back(static_cast<std::uint32_t>(i), static_cast<double>(v.values[i]));
  }
  return s;
}

}  // namespace

OrderedJson LocationModel::to_json() const {
  return {{"format", "encyclink-location-model"},
          {"version", 1},
          {"dim", dim()},
          {"provider_tag", provider_tag},
          {"threshold", threshold},
          {"bias", bias},
          {"weights", weights}};
}

LocationModel LocationModel::from_json(const Json& j) {
  LocationModel m;
  try {
    if (j.at("format").get<std::string>() != "encyclink-location-model") {
      throw Error(Errc::FormatError, "not a location model");
    }
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.threshold = j.at("threshold").get<double>();
    m.provider_tag = j.at("provider_tag").get<std::string>();
    if (j.at("dim").get<std::size_t>() != m.weights.size()) {
      throw Error(Errc::FormatError, "location model dim does not match its weights");
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::FormatError, std::string("location model: ") + e.what());
  }
  return m;
}

void LocationModel::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json().dump() + "\n");
}

LocationModel LocationModel::load(const std::filesystem::path& path) {
  return from_json(Json::parse(read_file(path)));
}

LocationTrainingReport train_location_model(const std::vector<std::pair<Entry, bool>>& labeled,
                                            const Embedder& embedder,
                                            const LogisticOptions& options) {
  std::vector<std::string> texts;
  texts.reserve(labeled.size());
  for (const auto& [entry, label] : labeled) texts.push_back(entry.truncated_text);
  bool pos = false;
  bool neg = false;
  for (const auto& l : labeled) (l.second ? pos : neg) = true;
  if (!pos || !neg) throw Error(Errc::SingleClassTraining, "location training needs both classes");

  const auto vectors = embedder.embed(texts);
  std::vector<SparseVector> xs;
  xs.reserve(vectors.size());
  for (const auto& v : vectors) xs.push_back(as_sparse(v));
  std::unique_ptr<bool[]> ys(new bool[labeled.size()]);
  for (std::size_t i = 0; i < labeled.size(); ++i) ys[i] = labeled[i].second;

  auto fit = train_logistic(xs, std::span<const bool>(ys.get(), labeled.size()), embedder.dim(),
                            options);
  LocationTrainingReport report;
  report.model.weights = std::move(fit.model.weights);
  report.model.bias = fit.model.bias;
  report.model.provider_tag = embedder.provider_tag();
  report.final_loss = fit.final_loss;
  report.epochs = fit.epochs;
  return report;
}

double location_probability(const LocationModel& model, const EmbeddingVector& v) {
  if (v.dim() != model.dim()) {
    throw Error(Errc::DimMismatch, "location model has dim " + std::to_string(model.dim()) +
                                       ", embedding has " + std::to_string(v.dim()));
  }
  double z = model.bias;
  for (std::size_t i = 0; i < v.dim(); ++i) z += model.weights[i] * static_cast<double>(v.values[i]);
  return sigmoid(z);
}

LocationPrediction classify_location(const LocationModel& model, const Entry& entry,
                                     const Embedder& embedder) {
  if (entry.flags.is_crossref) return {false, 0.0};
  if (embedder.dim() != model.dim()) {
    throw Error(Errc::DimMismatch, "location model and embedder dimensions differ");
  }
  const double p = location_probability(model, embedder.embed_one(entry.truncated_text));
  return {p >= model.threshold, p};
}

std::vector<LocationPrediction> classify_locations(const LocationModel& model,
                                                   const std::vector<Entry>& entries,
                                                   const Embedder& embedder) {
  if (embedder.dim() != model.dim()) {
    throw Error(Errc::DimMismatch, "location model and embedder dimensions differ");
  }
  std::vector<std::string> texts;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].flags.is_crossref) continue;
    texts.push_back(entries[i].truncated_text);
    where.push_back(i);
  }
  std::vector<LocationPrediction> out(entries.size());
  if (texts.empty()) return out;
  const auto vectors = embedder.embed(texts);
  for (std::size_t k = 0; k < where.size(); ++k) {
    const double p = location_probability(model, vectors[k]);
    out[where[k]] = {p >= model.threshold, p};
  }
  return out;
}

}  // namespace encyclink
