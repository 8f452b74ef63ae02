#include "encyclink/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "encyclink/error.hpp"

namespace encyclink {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LogisticModel::probability(const SparseVector& x) const { return sigmoid(logit(x)); }

namespace {

// log(1 + exp(-z)) without overflow.
double softplus_neg(double z) {
  return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

double objective(const LogisticModel& m, std::span<const SparseVector> xs,
                 std::span<const bool> ys, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double z = m.logit(xs[i]);
    loss += ys[i] ? softplus_neg(z) : softplus_neg(-z);
  }
  loss /= static_cast<double>(xs.size());
  double sq = 0.0;
  for (double w : m.weights) sq += w * w;
  return loss + 0.5 * l2 * sq;
}

}  // namespace

LogisticFit train_logistic(std::span<const SparseVector> samples, std::span<const bool> labels,
                           std::size_t dim, const LogisticOptions& options) {
  if (samples.size() != labels.size()) {
    throw Error(Errc::DimMismatch, "sample and label counts differ");
  }
  const bool has_pos = std::find(labels.begin(), labels.end(), true) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), false) != labels.end();
  if (!has_pos || !has_neg) {
    throw Error(Errc::SingleClassTraining, "training data must contain both classes");
  }
  for (const auto& s : samples) {
    if (!s.entries.empty() && s.entries.back().first >= dim) {
      throw Error(Errc::DimMismatch, "feature index exceeds model dimension");
    }
  }

  LogisticFit fit;
  fit.model.weights.assign(dim, 0.0);
  const double n = static_cast<double>(samples.size());
  std::vector<double> grad(dim, 0.0);
  double prev = objective(fit.model, samples, labels, options.l2);

  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double r = fit.model.probability(samples[i]) - (labels[i] ? 1.0 : 0.0);
      for (const auto& [j, v] : samples[i].entries) grad[j] += r * v;
      grad_bias += r;
    }
    const double lr = options.learning_rate;
    for (std::size_t j = 0; j < dim; ++j) {
      fit.model.weights[j] -= lr * (grad[j] / n + options.l2 * fit.model.weights[j]);
    }
    fit.model.bias -= lr * grad_bias / n;

    const double cur = objective(fit.model, samples, labels, options.l2);
    fit.epochs = epoch;
    fit.final_loss = cur;
    if (std::abs(prev - cur) <= options.tolerance * std::max(std::abs(prev), 1e-300)) {
      fit.converged = true;
      break;
    }
    prev = cur;
  }
  return fit;
}

}  // namespace encyclink
