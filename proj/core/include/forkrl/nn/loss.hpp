#pragma once

#include "forkrl/nn/matrix.hpp"

namespace forkrl::nn {

struct LossResult {
  double value = 0.0;
  RowMatrix gradient;  // dLoss/dPrediction, same shape as the prediction
};

// Huber loss with transition at |d| = 1, averaged over every element.
LossResult smooth_l1(const RowMatrix& prediction, const RowMatrix& target);

// Mean squared error over every element; gradient 2 d / n.
LossResult mse(const RowMatrix& prediction, const RowMatrix& target);

}  // namespace forkrl::nn
