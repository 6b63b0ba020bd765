#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace forkrl {

// Row-major dense storage. Batches are laid out one sample per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

namespace nn {

/// Validated dense matrix. Every entry is finite at construction; NaN and
/// Inf are rejected with ShapeError so corrupted weights never enter a net.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  explicit Matrix(RowMatrix values);

  std::size_t rows() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(data_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }

  double operator()(std::size_t r, std::size_t c) const {
    return data_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  std::span<const double> values() const { return {data_.data(), size()}; }
  const RowMatrix& eigen() const { return data_; }
  // Mutable access for in-place optimizer and soft updates; finiteness is
  // not re-checked on this path.
  RowMatrix& eigen() { return data_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           a.data_ == b.data_;
  }

 private:
  RowMatrix data_;
};

// Throws ShapeError when any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const RowMatrix>& m, const char* what);

}  // namespace nn

// Row-wise horizontal concatenation of batches with equal row counts.
RowMatrix hstack(std::initializer_list<const RowMatrix*> parts);

// Stacks vectors as rows of a batch.
RowMatrix rows_from(std::span<const Vector> vectors);

}  // namespace forkrl
