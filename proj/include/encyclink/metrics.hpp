#pragma once

#include <cstddef>

#include "encyclink/jsonl.hpp"

namespace encyclink {

// Precision over predictions, recall over gold positives. An empty
// denominator gives 0.
struct Prf {
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const { return predicted == 0 ? 0.0 : double(correct) / double(predicted); }
  double recall() const { return gold == 0 ? 0.0 : double(correct) / double(gold); }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  OrderedJson to_json() const {
    return {{"correct", correct}, {"predicted", predicted}, {"gold", gold},
            {"precision", precision()}, {"recall", recall()}, {"f1", f1()}};
  }
};

}  // namespace encyclink
