#pragma once

// Maximum-weight one-to-one assignment (Hungarian algorithm).

#include <vector>

namespace hsg {

// Dense row-major score matrix.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  // row_to_col[i] = assigned column, or -1 when row i is matched to padding.
  std::vector<int> row_to_col;
  double total = 0.0;
};

// Maximises sum_i S(i, pi(i)). A rectangular S is padded with zero rows or
// columns to a square. Among optimal assignments of the padded problem the
// lexicographically smallest permutation is returned.
Assignment max_weight_assignment(const ScoreMatrix& scores);

}  // namespace hsg
