#include "forkrl/nn/loss.hpp"

#include <cmath>

#include "forkrl/errors.hpp"

namespace forkrl::nn {

namespace {

void check_same_shape(const RowMatrix& a, const RowMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": prediction and target shapes differ");
  }
}

}  // namespace

LossResult smooth_l1(const RowMatrix& prediction, const RowMatrix& target) {
  check_same_shape(prediction, target, "smooth_l1");
  LossResult r;
  r.gradient.resize(prediction.rows(), prediction.cols());
  const auto n = prediction.size();
  if (n == 0) return r;
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double d = prediction.data()[k] - target.data()[k];
    const double a = std::abs(d);
    if (a < 1.0) {
      total += 0.5 * d * d;
      r.gradient.data()[k] = d * inv_n;
    } else {
      total += a - 0.5;
      r.gradient.data()[k] = (d > 0.0 ? 1.0 : -1.0) * inv_n;
    }
  }
  r.value = total * inv_n;
  return r;
}

LossResult mse(const RowMatrix& prediction, const RowMatrix& target) {
  check_same_shape(prediction, target, "mse");
  LossResult r;
  const auto n = prediction.size();
  if (n == 0) {
    r.gradient.resize(prediction.rows(), prediction.cols());
    return r;
  }
  const RowMatrix d = prediction - target;
  r.value = d.squaredNorm() / static_cast<double>(n);
  r.gradient = (2.0 / static_cast<double>(n)) * d;
  return r;
}

}  // namespace forkrl::nn
