#pragma once

#include <functional>

#include "forkrl/nn/matrix.hpp"

namespace forkrl::nn {

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every i.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& x,
                        double h = 1e-5);

// |a - b| / max(|a|, |b|, floor), the comparison used by gradient checks.
double relative_error(double analytic, double numeric, double floor = 1e-4);

}  // namespace forkrl::nn
