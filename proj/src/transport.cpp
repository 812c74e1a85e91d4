#include "rskit/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "rskit/errors.hpp"

namespace rskit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Cell {
  Eigen::Index row;
  Eigen::Index col;
};

std::uint64_t label_key(double y) {
  if (y == 0.0) y = 0.0;
  std::uint64_t bits;
  std::memcpy(&bits, &y, sizeof bits);
  return bits;
}

// Transportation simplex on strictly positive supplies and demands.
class TransportSimplex {
 public:
  TransportSimplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand, const Eigen::MatrixXd& cost)
      : m_(supply.size()), n_(demand.size()), cost_(cost), flow_(Eigen::MatrixXd::Zero(m_, n_)),
        basic_(m_, std::vector<char>(static_cast<std::size_t>(n_), 0)) {
    northwest_corner(supply, demand);
  }

  int run() {
    const double tol = 1e-12 * (1.0 + cost_.cwiseAbs().maxCoeff());
    const int limit = 1000 * static_cast<int>(m_ + n_) + 10000;
    Eigen::VectorXd u(m_), v(n_);
    int pivots = 0;
    while (true) {
      potentials(u, v);
      Eigen::Index best_i = -1, best_j = -1;
      double best = -tol;
      for (Eigen::Index i = 0; i < m_; ++i) {
        for (Eigen::Index j = 0; j < n_; ++j) {
          if (basic_[i][j]) continue;
          const double reduced = cost_(i, j) - u(i) - v(j);
          if (reduced < best) {
            best = reduced;
            best_i = i;
            best_j = j;
          }
        }
      }
      if (best_i < 0) return pivots;
      if (++pivots > limit) throw ConvergenceError("transportation simplex did not terminate", best);
      pivot(best_i, best_j);
    }
  }

  const Eigen::MatrixXd& flow() const { return flow_; }

 private:
  // Node ids: rows are 0..m-1, columns m..m+n-1.
  void northwest_corner(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand) {
    Eigen::Index i = 0, j = 0;
    double s = supply(0), d = demand(0);
    while (true) {
      const double q = std::max(0.0, std::min(s, d));
      add_basic(i, j, q);
      s -= q;
      d -= q;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (j == n_ - 1 || (i < m_ - 1 && s <= d)) {
        ++i;
        s = supply(i);
      } else {
        ++j;
        d = demand(j);
      }
    }
  }

  void add_basic(Eigen::Index i, Eigen::Index j, double q) {
    basic_[i][j] = 1;
    flow_(i, j) = q;
    cells_.push_back({i, j});
  }

  void build_adjacency() {
    adjacency_.assign(static_cast<std::size_t>(m_ + n_), {});
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      adjacency_[static_cast<std::size_t>(cells_[k].row)].push_back(k);
      adjacency_[static_cast<std::size_t>(m_ + cells_[k].col)].push_back(k);
    }
  }

  std::size_t other_end(std::size_t cell, std::size_t node) const {
    const auto& c = cells_[cell];
    const auto row_node = static_cast<std::size_t>(c.row);
    const auto col_node = static_cast<std::size_t>(m_ + c.col);
    return node == row_node ? col_node : row_node;
  }

  void potentials(Eigen::VectorXd& u, Eigen::VectorXd& v) {
    build_adjacency();
    const std::size_t nodes = static_cast<std::size_t>(m_ + n_);
    std::vector<char> seen(nodes, 0);
    std::vector<double> pot(nodes, 0.0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t cell : adjacency_[node]) {
        const std::size_t next = other_end(cell, node);
        if (seen[next]) continue;
        seen[next] = 1;
        // u_i + v_j = c_ij on basic cells
        pot[next] = cost_(cells_[cell].row, cells_[cell].col) - pot[node];
        stack.push_back(next);
      }
    }
    for (Eigen::Index i = 0; i < m_; ++i) u(i) = pot[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n_; ++j) v(j) = pot[static_cast<std::size_t>(m_ + j)];
  }

  void pivot(Eigen::Index ei, Eigen::Index ej) {
    // Tree path from column node ej back to row node ei.
    const std::size_t nodes = static_cast<std::size_t>(m_ + n_);
    const std::size_t source = static_cast<std::size_t>(ei);
    const std::size_t target = static_cast<std::size_t>(m_ + ej);
    std::vector<std::ptrdiff_t> via(nodes, -1);
    std::vector<char> seen(nodes, 0);
    std::vector<std::size_t> queue{source};
    seen[source] = 1;
    for (std::size_t head = 0; head < queue.size() && !seen[target]; ++head) {
      const std::size_t node = queue[head];
      for (std::size_t cell : adjacency_[node]) {
        const std::size_t next = other_end(cell, node);
        if (seen[next]) continue;
        seen[next] = 1;
        via[next] = static_cast<std::ptrdiff_t>(cell);
        queue.push_back(next);
      }
    }
    // Walking back from the column, cells alternate -, +, -, ...
    std::vector<std::size_t> minus, plus;
    std::size_t node = target;
    bool negative = true;
    while (node != source) {
      const auto cell = static_cast<std::size_t>(via[node]);
      (negative ? minus : plus).push_back(cell);
      negative = !negative;
      node = other_end(cell, node);
    }
    std::size_t leaving = minus.front();
    double theta = kInf;
    for (std::size_t cell : minus) {
      const double f = flow_(cells_[cell].row, cells_[cell].col);
      if (f < theta) {
        theta = f;
        leaving = cell;
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t cell : minus) flow_(cells_[cell].row, cells_[cell].col) -= theta;
    for (std::size_t cell : plus) flow_(cells_[cell].row, cells_[cell].col) += theta;
    const Cell out = cells_[leaving];
    flow_(out.row, out.col) = 0.0;
    basic_[out.row][out.col] = 0;
    basic_[ei][ej] = 1;
    flow_(ei, ej) = theta;
    cells_[leaving] = {ei, ej};
    build_adjacency();
  }

  Eigen::Index m_, n_;
  const Eigen::MatrixXd& cost_;
  Eigen::MatrixXd flow_;
  std::vector<std::vector<char>> basic_;
  std::vector<Cell> cells_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

void require_normalized(const DiscreteDistribution& d, const char* which) {
  if (std::abs(d.weights().sum() - 1.0) > 1e-12 || (d.weights().array() < 0).any())
    throw ValidationError(std::string("distribution ") + which + " is not normalized");
}

}  // namespace

double CostSpec::operator()(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != b.size())
    throw ShapeError("cost: points of dimension " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  if (variant == CostVariant::feature_only) {
    if (a.empty()) throw ShapeError("cost: feature_only needs a label coordinate");
    if (a.back() != b.back()) return kInf;
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

std::string CostSpec::name() const {
  switch (variant) {
    case CostVariant::full_l2: return "full_l2";
    case CostVariant::feature_only: return "feature_only";
    case CostVariant::augmented_l2: return "augmented_l2";
  }
  return "unknown";
}

CostSpec CostSpec::from_name(std::string_view name) {
  if (name == "full_l2") return {CostVariant::full_l2};
  if (name == "feature_only") return {CostVariant::feature_only};
  if (name == "augmented_l2") return {CostVariant::augmented_l2};
  throw ParameterError("unknown cost '" + std::string(name) + "'");
}

double cost(const CostSpec& spec, std::span<const double> a, std::span<const double> b) { return spec(a, b); }

Eigen::MatrixXd cost_matrix(const CostSpec& spec, const Eigen::MatrixXd& from, const Eigen::MatrixXd& to) {
  if (from.cols() != to.cols()) throw ShapeError("cost_matrix: dimension mismatch");
  Eigen::MatrixXd c(from.rows(), to.rows());
  for (Eigen::Index i = 0; i < from.rows(); ++i) {
    const Eigen::VectorXd pi = from.row(i).transpose();
    for (Eigen::Index j = 0; j < to.rows(); ++j) {
      const Eigen::VectorXd qj = to.row(j).transpose();
      c(i, j) = spec(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size())),
                     std::span<const double>(qj.data(), static_cast<std::size_t>(qj.size())));
    }
  }
  return c;
}

TransportPlan solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                              const Eigen::MatrixXd& cost) {
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw ShapeError("solve_transport: cost matrix does not match marginals");
  if (!cost.allFinite()) throw ValidationError("solve_transport: costs must be finite");
  if (std::abs(supply.sum() - demand.sum()) > 1e-9 * (1.0 + supply.sum()))
    throw ValidationError("solve_transport: unbalanced marginals");

  // Zero-mass atoms carry no flow; solve on the positive ones only.
  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index i = 0; i < supply.size(); ++i)
    if (supply(i) > 0) rows.push_back(i);
  for (Eigen::Index j = 0; j < demand.size(); ++j)
    if (demand(j) > 0) cols.push_back(j);

  TransportPlan plan;
  plan.coupling = Eigen::MatrixXd::Zero(supply.size(), demand.size());
  if (rows.empty() || cols.empty()) return plan;

  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(cols.size());
  Eigen::VectorXd a(m), b(n);
  Eigen::MatrixXd c(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i) = supply(rows[i]);
    for (Eigen::Index j = 0; j < n; ++j) c(i, j) = cost(rows[i], cols[j]);
  }
  for (Eigen::Index j = 0; j < n; ++j) b(j) = demand(cols[j]);

  TransportSimplex simplex(a, b, c);
  plan.pivots = simplex.run();
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) plan.coupling(rows[i], cols[j]) = simplex.flow()(i, j);
  plan.objective = (plan.coupling.array() * cost.array()).sum();
  return plan;
}

WassersteinResult wasserstein(const DiscreteDistribution& p, const DiscreteDistribution& q, const CostSpec& spec) {
  require_normalized(p, "p");
  require_normalized(q, "q");
  if (p.dim() != q.dim()) throw ShapeError("wasserstein: distributions live in different dimensions");

  if (spec.variant != CostVariant::feature_only) {
    TransportPlan plan = solve_transport(p.weights(), q.weights(), cost_matrix(spec, p.points(), q.points()));
    const double d = plan.objective;
    return {d, std::move(plan)};
  }

  // feature_only: mass may only move within a label class.
  std::map<std::uint64_t, std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>>> groups;
  const Eigen::Index label = p.dim() - 1;
  for (Eigen::Index i = 0; i < p.size(); ++i) groups[label_key(p.points()(i, label))].first.push_back(i);
  for (Eigen::Index j = 0; j < q.size(); ++j) groups[label_key(q.points()(j, label))].second.push_back(j);
  for (const auto& [key, members] : groups) {
    double mp = 0.0, mq = 0.0;
    for (auto i : members.first) mp += p.weights()(i);
    for (auto j : members.second) mq += q.weights()(j);
    if (std::abs(mp - mq) > 1e-12) return {kInf, TransportPlan{Eigen::MatrixXd(), kInf, 0}};
  }

  WassersteinResult result{0.0, TransportPlan{Eigen::MatrixXd::Zero(p.size(), q.size()), 0.0, 0}};
  for (const auto& [key, members] : groups) {
    const auto& [pi, qj] = members;
    Eigen::VectorXd a(static_cast<Eigen::Index>(pi.size())), b(static_cast<Eigen::Index>(qj.size()));
    Eigen::MatrixXd c(a.size(), b.size());
    for (Eigen::Index r = 0; r < a.size(); ++r) a(r) = p.weights()(pi[r]);
    for (Eigen::Index s = 0; s < b.size(); ++s) b(s) = q.weights()(qj[s]);
    // Rescale the smaller side so both block marginals carry identical mass.
    if (b.sum() > 0) b *= a.sum() / b.sum();
    for (Eigen::Index r = 0; r < a.size(); ++r)
      for (Eigen::Index s = 0; s < b.size(); ++s)
        c(r, s) = (p.points().row(pi[r]).head(label) - q.points().row(qj[s]).head(label)).norm();
    const TransportPlan block = solve_transport(a, b, c);
    for (Eigen::Index r = 0; r < a.size(); ++r)
      for (Eigen::Index s = 0; s < b.size(); ++s) result.plan.coupling(pi[r], qj[s]) = block.coupling(r, s);
    result.plan.objective += block.objective;
    result.plan.pivots += block.pivots;
  }
  result.distance = result.plan.objective;
  return result;
}

double wasserstein_1d(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.dim() != 1 || q.dim() != 1) throw ShapeError("wasserstein_1d needs one-dimensional supports");
  require_normalized(p, "p");
  require_normalized(q, "q");
  auto sorted = [](const DiscreteDistribution& d) {
    std::vector<std::pair<double, double>> atoms;
    for (Eigen::Index i = 0; i < d.size(); ++i) atoms.emplace_back(d.points()(i, 0), d.weights()(i));
    std::sort(atoms.begin(), atoms.end());
    return atoms;
  };
  const auto a = sorted(p);
  const auto b = sorted(q);
  // Walk the quantile levels: each step consumes the smaller remaining mass.
  std::size_t i = 0, j = 0;
  double left_a = a[0].second, left_b = b[0].second, total = 0.0;
  while (i < a.size() && j < b.size()) {
    const double step = std::min(left_a, left_b);
    total += step * std::abs(a[i].first - b[j].first);
    left_a -= step;
    left_b -= step;
    if (left_a <= 0.0 && ++i < a.size()) left_a = a[i].second;
    if (left_b <= 0.0 && ++j < b.size()) left_b = b[j].second;
    if (left_a <= 0.0 && left_b <= 0.0 && (i >= a.size() || j >= b.size())) break;
  }
  return total;
}

}  // namespace rskit
