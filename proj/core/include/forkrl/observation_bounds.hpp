#pragma once

#include <optional>

#include "forkrl/binary_io.hpp"
#include "forkrl/nn/matrix.hpp"

namespace forkrl {

/// Per-dimension clip range for predicted states.
///
/// Dimensions with a finite environment-declared bound use it. All other
/// dimensions use the running min/max over every observed state; before any
/// observation they are unbounded.
class ObservationBounds {
 public:
  ObservationBounds() = default;
  explicit ObservationBounds(std::size_t dim);
  ObservationBounds(std::size_t dim, const std::optional<Vector>& declared_low,
                    const std::optional<Vector>& declared_high);

  std::size_t dim() const { return static_cast<std::size_t>(declared_low_.size()); }

  void observe(const Vector& state);
  void observe_rows(const Eigen::Ref<const RowMatrix>& states);

  Vector low() const;
  Vector high() const;

  void clip(RowMatrix& states) const;
  Vector clip(const Vector& state) const;

  void write(BinaryWriter& w) const;
  void read(BinaryReader& r);

  friend bool operator==(const ObservationBounds&, const ObservationBounds&) = default;

 private:
  Vector declared_low_;
  Vector declared_high_;
  Vector seen_low_;
  Vector seen_high_;
};

}  // namespace forkrl
