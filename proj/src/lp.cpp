#include "rskit/lp.hpp"

#include <cmath>
#include <vector>

#include "rskit/errors.hpp"

namespace rskit {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr int kDegenerateRunBeforeBland = 50;

// Rows 0..m-1 are constraints, row m holds reduced profits. The last column
// is the right-hand side; T(m, rhs) carries minus the objective value.
class Tableau {
 public:
  Tableau(Eigen::MatrixXd t, std::vector<int> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index rhs() const { return t_.cols() - 1; }
  Eigen::MatrixXd& t() { return t_; }
  std::vector<int>& basis() { return basis_; }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = static_cast<int>(col);
  }

  // Runs simplex iterations over columns [0, allowed). Returns the status.
  LpStatus optimize(Eigen::Index allowed, int max_pivots, int& pivots) {
    int degenerate_run = 0;
    while (pivots < max_pivots) {
      const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
      Eigen::Index enter = -1;
      double best = kPivotTol;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        const double profit = t_(rows(), j);
        if (profit > best) {
          enter = j;
          if (bland) break;
          best = profit;
        }
      }
      if (enter < 0) return LpStatus::optimal;

      Eigen::Index leave = -1;
      double ratio = 0.0;
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double r = t_(i, rhs()) / a;
        if (leave < 0 || r < ratio - 1e-14 ||
            (r <= ratio + 1e-14 && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          ratio = r;
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
      ++pivots;
    }
    return LpStatus::iteration_limit;
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, int max_pivots) {
  const Eigen::Index m = lp.A.rows();
  const Eigen::Index n = lp.A.cols();
  if (lp.b.size() != m || lp.c.size() != n) throw ShapeError("solve_lp: inconsistent dimensions");

  LpResult result;
  result.x = Eigen::VectorXd::Zero(n);

  // Phase one: artificial identity columns n..n+m-1, minimize their sum.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  std::vector<int> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = lp.b(i) < 0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * lp.A.row(i);
    t(i, n + i) = 1.0;
    t(i, n + m) = sign * lp.b(i);
    basis[static_cast<std::size_t>(i)] = static_cast<int>(n + i);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    t.row(m).head(n) += t.row(i).head(n);
    t(m, n + m) += t(i, n + m);
  }
  Tableau tab(std::move(t), std::move(basis));
  int pivots = 0;
  LpStatus status = tab.optimize(n + m, max_pivots, pivots);
  if (status == LpStatus::iteration_limit) {
    result.status = status;
    result.pivots = pivots;
    return result;
  }
  const double scale = 1.0 + lp.b.cwiseAbs().sum();
  if (tab.t()(m, n + m) > 1e-9 * scale) {
    result.status = LpStatus::infeasible;
    result.pivots = pivots;
    return result;
  }

  // Drive remaining artificials out; a row with no usable entry is redundant.
  std::vector<bool> redundant(static_cast<std::size_t>(m), false);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis()[static_cast<std::size_t>(i)] < n) continue;
    Eigen::Index col = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab.t()(i, j)) > 1e-9) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(i, col);
      ++pivots;
    } else {
      redundant[static_cast<std::size_t>(i)] = true;
    }
  }

  // Phase two: profits c_j - c_B . column_j over the structural columns.
  auto& tt = tab.t();
  tt.row(m).setZero();
  tt.row(m).head(n) = lp.c.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (redundant[static_cast<std::size_t>(i)]) continue;
    const int bcol = tab.basis()[static_cast<std::size_t>(i)];
    const double cb = lp.c(bcol);
    if (cb != 0.0) {
      tt.row(m).head(n) -= cb * tt.row(i).head(n);
      tt(m, n + m) -= cb * tt(i, n + m);
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (redundant[static_cast<std::size_t>(i)]) tt.row(i).setZero();
  }
  status = tab.optimize(n, max_pivots, pivots);
  result.status = status;
  result.pivots = pivots;
  if (status != LpStatus::optimal) return result;
  for (Eigen::Index i = 0; i < m; ++i) {
    const int bcol = tab.basis()[static_cast<std::size_t>(i)];
    if (!redundant[static_cast<std::size_t>(i)] && bcol < n) result.x(bcol) = std::max(0.0, tt(i, n + m));
  }
  result.value = lp.c.dot(result.x);
  return result;
}

}  // namespace rskit
