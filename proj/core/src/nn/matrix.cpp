#include "forkrl/nn/matrix.hpp"

#include <string>

#include "forkrl/errors.hpp"

namespace forkrl {
namespace nn {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : data_(RowMatrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols))) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (values.size() != rows * cols) {
    throw ShapeError("Matrix: expected " + std::to_string(rows * cols) + " values, got " +
                     std::to_string(values.size()));
  }
  data_ = Eigen::Map<const RowMatrix>(values.data(), static_cast<Eigen::Index>(rows),
                                      static_cast<Eigen::Index>(cols));
  require_finite(data_, "Matrix");
}

Matrix::Matrix(RowMatrix values) : data_(std::move(values)) { require_finite(data_, "Matrix"); }

void require_finite(const Eigen::Ref<const RowMatrix>& m, const char* what) {
  if (!m.allFinite()) throw ShapeError(std::string(what) + ": non-finite entry");
}

}  // namespace nn

RowMatrix hstack(std::initializer_list<const RowMatrix*> parts) {
  if (parts.size() == 0) return {};
  const Eigen::Index rows = (*parts.begin())->rows();
  Eigen::Index cols = 0;
  for (const auto* p : parts) {
    if (p->rows() != rows) throw ShapeError("hstack: row count mismatch");
    cols += p->cols();
  }
  RowMatrix out(rows, cols);
  Eigen::Index offset = 0;
  for (const auto* p : parts) {
    out.middleCols(offset, p->cols()) = *p;
    offset += p->cols();
  }
  return out;
}

RowMatrix rows_from(std::span<const Vector> vectors) {
  if (vectors.empty()) return {};
  const auto cols = vectors.front().size();
  RowMatrix out(static_cast<Eigen::Index>(vectors.size()), cols);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != cols) throw ShapeError("rows_from: ragged vectors");
    out.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
  }
  return out;
}

}  // namespace forkrl
