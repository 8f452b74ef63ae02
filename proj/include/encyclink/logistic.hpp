#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "encyclink/features.hpp"

namespace encyclink {

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  double logit(const SparseVector& x) const { return x.dot(weights) + bias; }
  double probability(const SparseVector& x) const;
};

struct LogisticOptions {
  double l2 = 1e-4;
  double learning_rate = 1.0;
  int max_epochs = 500;
  double tolerance = 1e-6;  // relative change of the objective between epochs
};

struct LogisticFit {
  LogisticModel model;
  double final_loss = 0.0;  // mean log-loss plus the L2 term
  int epochs = 0;
  bool converged = false;
};

// Full-batch gradient descent on the L2-regularized mean log-loss, starting
// from zero weights. Deterministic: samples are visited in input order.
// Throws SingleClassTraining unless both labels occur.
LogisticFit train_logistic(std::span<const SparseVector> samples, std::span<const bool> labels,
                           std::size_t dim, const LogisticOptions& options = {});

double sigmoid(double z);

}  // namespace encyclink
