#include "hsg/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hsg/error.hpp"

namespace hsg {

namespace {

struct Solution {
  std::vector<int> col_of_row;
  std::vector<double> u;  // row potentials, 1-based
  std::vector<double> v;  // column potentials, 1-based
};

// Minimum-cost perfect matching on an n x n cost matrix by shortest
// augmenting paths with potentials. On return cost(i, j) - u[i+1] - v[j+1]
// is nonnegative and zero on the matching.
Solution hungarian_min(const std::vector<double>& cost, int n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Solution out{std::vector<int>(n, -1), std::move(u), std::move(v)};
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) out.col_of_row[p[j] - 1] = j - 1;
  }
  return out;
}

// Perfect matchings on the tight edges of an optimal dual are exactly the
// optimal assignments; this picks the lexicographically smallest one.
class TightMatcher {
 public:
  TightMatcher(std::vector<std::vector<int>> tight, std::vector<int> col_of_row)
      : tight_(std::move(tight)), col_of_row_(std::move(col_of_row)), row_of_col_(col_of_row_.size()) {
    for (std::size_t i = 0; i < col_of_row_.size(); ++i) row_of_col_[col_of_row_[i]] = static_cast<int>(i);
  }

  std::vector<int> run() {
    const int n = static_cast<int>(col_of_row_.size());
    for (int i = 0; i < n; ++i) {
      for (int j : tight_[i]) {
        if (j == col_of_row_[i]) break;
        if (row_of_col_[j] < i) continue;  // held by a fixed row
        if (rematch(i, j)) break;
      }
      fixed_rows_ = i + 1;
    }
    return col_of_row_;
  }

 private:
  // Moves row i to column j and re-seats the displaced row along an
  // alternating path that ends in i's old column.
  bool rematch(int i, int j) {
    const std::vector<int> saved_cols = col_of_row_;
    const std::vector<int> saved_rows = row_of_col_;
    const int displaced = row_of_col_[j];
    const int target = col_of_row_[i];
    col_of_row_[i] = j;
    row_of_col_[j] = i;
    visited_.assign(col_of_row_.size(), 0);
    visited_[j] = 1;
    fixed_rows_ = i + 1;
    if (augment(displaced, target)) return true;
    col_of_row_ = saved_cols;
    row_of_col_ = saved_rows;
    fixed_rows_ = i;
    return false;
  }

  bool augment(int row, int target) {
    for (int c : tight_[row]) {
      if (visited_[c]) continue;
      visited_[c] = 1;
      if (c == target) {
        col_of_row_[row] = c;
        row_of_col_[c] = row;
        return true;
      }
      const int owner = row_of_col_[c];
      if (owner < fixed_rows_) continue;
      if (augment(owner, target)) {
        col_of_row_[row] = c;
        row_of_col_[c] = row;
        return true;
      }
    }
    return false;
  }

  std::vector<std::vector<int>> tight_;
  std::vector<int> col_of_row_;
  std::vector<int> row_of_col_;
  std::vector<char> visited_;
  int fixed_rows_ = 0;
};

}  // namespace

Assignment max_weight_assignment(const ScoreMatrix& scores) {
  const int r = static_cast<int>(scores.rows());
  const int c = static_cast<int>(scores.cols());
  const int n = std::max(r, c);
  Assignment out;
  out.row_to_col.assign(static_cast<std::size_t>(r), -1);
  if (r == 0 || c == 0) return out;

  std::vector<double> cost(static_cast<std::size_t>(n) * n, 0.0);
  double scale = 1.0;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      const double s = scores(i, j);
      if (!std::isfinite(s)) throw DomainError("max_weight_assignment: non-finite score");
      cost[i * n + j] = -s;
      scale = std::max(scale, std::abs(s));
    }
  }
  const Solution sol = hungarian_min(cost, n);
  const double tol = 1e-9 * scale;
  std::vector<std::vector<int>> tight(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (cost[i * n + j] - sol.u[i + 1] - sol.v[j + 1] <= tol) tight[i].push_back(j);
    }
  }
  const std::vector<int> perm = TightMatcher(std::move(tight), sol.col_of_row).run();
  for (int i = 0; i < r; ++i) {
    if (perm[i] < c) {
      out.row_to_col[i] = perm[i];
      out.total += scores(i, perm[i]);
    }
  }
  return out;
}

}  // namespace hsg
