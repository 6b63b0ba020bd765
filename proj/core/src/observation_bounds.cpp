#include "forkrl/observation_bounds.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "forkrl/errors.hpp"

namespace forkrl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ObservationBounds::ObservationBounds(std::size_t dim)
    : declared_low_(Vector::Constant(static_cast<Eigen::Index>(dim), -kInf)),
      declared_high_(Vector::Constant(static_cast<Eigen::Index>(dim), kInf)),
      seen_low_(Vector::Constant(static_cast<Eigen::Index>(dim), kInf)),
      seen_high_(Vector::Constant(static_cast<Eigen::Index>(dim), -kInf)) {}

ObservationBounds::ObservationBounds(std::size_t dim, const std::optional<Vector>& declared_low,
                                     const std::optional<Vector>& declared_high)
    : ObservationBounds(dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (declared_low) {
    if (declared_low->size() != n) throw ShapeError("ObservationBounds: low dim mismatch");
    declared_low_ = *declared_low;
  }
  if (declared_high) {
    if (declared_high->size() != n) throw ShapeError("ObservationBounds: high dim mismatch");
    declared_high_ = *declared_high;
  }
}

void ObservationBounds::observe(const Vector& state) {
  if (state.size() != seen_low_.size()) throw ShapeError("ObservationBounds: state dim mismatch");
  seen_low_ = seen_low_.cwiseMin(state);
  seen_high_ = seen_high_.cwiseMax(state);
}

void ObservationBounds::observe_rows(const Eigen::Ref<const RowMatrix>& states) {
  if (states.cols() != seen_low_.size()) throw ShapeError("ObservationBounds: state dim mismatch");
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    seen_low_ = seen_low_.cwiseMin(states.row(i).transpose());
    seen_high_ = seen_high_.cwiseMax(states.row(i).transpose());
  }
}

Vector ObservationBounds::low() const {
  Vector out(declared_low_.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (std::isfinite(declared_low_[i])) {
      out[i] = declared_low_[i];
    } else {
      out[i] = seen_low_[i] <= seen_high_[i] ? seen_low_[i] : -kInf;
    }
  }
  return out;
}

Vector ObservationBounds::high() const {
  Vector out(declared_high_.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (std::isfinite(declared_high_[i])) {
      out[i] = declared_high_[i];
    } else {
      out[i] = seen_low_[i] <= seen_high_[i] ? seen_high_[i] : kInf;
    }
  }
  return out;
}

void ObservationBounds::clip(RowMatrix& states) const {
  if (states.cols() != declared_low_.size()) throw ShapeError("ObservationBounds: clip dim mismatch");
  const Vector lo = low();
  const Vector hi = high();
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    states.row(i) = states.row(i).cwiseMax(lo.transpose()).cwiseMin(hi.transpose());
  }
}

Vector ObservationBounds::clip(const Vector& state) const {
  RowMatrix m = state.transpose();
  clip(m);
  return m.row(0).transpose();
}

void ObservationBounds::write(BinaryWriter& w) const {
  for (const Vector* v : {&declared_low_, &declared_high_, &seen_low_, &seen_high_}) {
    w.f64s(v->data(), static_cast<std::size_t>(v->size()));
  }
}

void ObservationBounds::read(BinaryReader& r) {
  for (Vector* v : {&declared_low_, &declared_high_, &seen_low_, &seen_high_}) {
    auto values = r.f64s();
    *v = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  if (declared_high_.size() != declared_low_.size() || seen_low_.size() != declared_low_.size() ||
      seen_high_.size() != declared_low_.size()) {
    throw FormatError("ObservationBounds: inconsistent dims");
  }
}

}  // namespace forkrl
