#pragma once

// Average-cost MDP as a linear program over occupancy measures x_{ia}:
//
//   minimize   sum c_ia x_ia
//   subject to sum x_ia = 1
//              sum_a x_ja - sum_{i,a} p_ij(a) x_ia = 0   for every state j
//              x >= 0
//
// The truncated chain is made irreducible by mixing each transition row with
// the uniform distribution: p'_ij(a) = (1-eps) p_ij(a) + eps/n.
// The LP is solved with a dense two-phase tableau simplex under Bland's rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ncwait/errors.hpp"
#include "ncwait/mdp_solver.hpp"
#include "ncwait/relay_model.hpp"

namespace ncwait {

struct LpVariable {
  std::size_t state = 0;
  Action action = Action::Wait;
  double cost = 0.0;
  std::vector<Transition> row;  // perturbed next-state distribution
};

struct OccupancyLP {
  std::size_t num_states = 0;
  std::vector<LpVariable> variables;
  double epsilon = 0.0;
  std::vector<QState> labels;  // optional, one per state

  /// Largest |sum_j p'_ij(a) - 1| over all variables.
  double max_row_defect() const {
    double worst = 0.0;
    for (const auto& v : variables) {
      double s = 0.0;
      for (const auto& t : v.row) s += t.probability;
      worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
  }
};

inline OccupancyLP build_occupancy_lp(const RelayParams& params, const TruncatedSpace& space, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ParameterError("epsilon must lie in [0,1]");
  const SpaceModel model(params, space);
  const std::size_t n = model.size();
  OccupancyLP lp;
  lp.num_states = n;
  lp.epsilon = epsilon;
  lp.labels.assign(space.states().begin(), space.states().end());
  const double spread = epsilon / static_cast<double>(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& c : model.choices(s)) {
      LpVariable v{s, c.action, c.cost, {}};
      if (epsilon > 0.0) {
        std::vector<double> dense(n, spread);
        for (const auto& t : c.outcomes) dense[t.next] += (1.0 - epsilon) * t.probability;
        v.row.reserve(n);
        for (std::size_t j = 0; j < n; ++j) v.row.push_back({j, dense[j]});
      } else {
        v.row = c.outcomes;
      }
      lp.variables.push_back(std::move(v));
    }
  }
  return lp;
}

struct LpOptions {
  /// Reduced costs above -pivot_tolerance count as nonnegative; tableau
  /// entries below it are not used as pivots.
  double pivot_tolerance = 1e-7;
  std::size_t max_pivots = 200'000;
};

struct LpSolution {
  double objective = 0.0;
  std::vector<double> occupancy;  // one entry per LP variable
  std::vector<double> state_mass;
  PolicyTable policy;             // transmit probability per state
  std::size_t pivots = 0;
};

namespace detail {

// Dense tableau for  min c^T x  s.t.  A x = b, x >= 0, b >= 0.
class Tableau {
 public:
  Tableau(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c, const LpOptions& opts)
      : rows_(a.size()), cols_(c.size()), opts_(opts) {
    // Columns: structural [0, cols_), artificial [cols_, cols_ + rows_), rhs last.
    width_ = cols_ + rows_ + 1;
    t_.assign(rows_, std::vector<double>(width_, 0.0));
    for (std::size_t r = 0; r < rows_; ++r) {
      const double sign = b[r] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < cols_; ++j) t_[r][j] = sign * a[r][j];
      t_[r][cols_ + r] = 1.0;
      t_[r][width_ - 1] = sign * b[r];
    }
    basis_.resize(rows_);
    for (std::size_t r = 0; r < rows_; ++r) basis_[r] = cols_ + r;
    cost_ = std::move(c);
  }

  void solve() {
    // Phase I: minimize the sum of artificials.
    std::vector<double> phase1(cols_ + rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) phase1[cols_ + r] = 1.0;
    run(phase1, cols_ + rows_);
    if (objective(phase1) > 1e-9) throw LpConstructionError("occupancy LP is infeasible");
    drive_out_artificials();

    std::vector<double> phase2(cols_ + rows_, 0.0);
    std::copy(cost_.begin(), cost_.end(), phase2.begin());
    run(phase2, cols_);
  }

  std::vector<double> primal() const {
    std::vector<double> x(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) x[basis_[r]] = std::max(0.0, t_[r][width_ - 1]);
    }
    return x;
  }

  std::size_t pivots() const noexcept { return pivots_; }

 private:
  double objective(const std::vector<double>& c) const {
    double z = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) z += c[basis_[r]] * t_[r][width_ - 1];
    return z;
  }

  // Reduced cost of column j: c_j - c_B^T B^{-1} A_j.
  double reduced_cost(const std::vector<double>& c, std::size_t j) const {
    double d = c[j];
    for (std::size_t r = 0; r < rows_; ++r) d -= c[basis_[r]] * t_[r][j];
    return d;
  }

  void run(const std::vector<double>& c, std::size_t eligible) {
    while (true) {
      // Bland: lowest-index improving column, then lowest-index basic variable among ratio ties.
      std::size_t enter = eligible;
      for (std::size_t j = 0; j < eligible; ++j) {
        if (is_basic(j)) continue;
        if (reduced_cost(c, j) < -opts_.pivot_tolerance) {
          enter = j;
          break;
        }
      }
      if (enter == eligible) return;

      std::size_t leave = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = t_[r][enter];
        if (a <= opts_.pivot_tolerance) continue;
        const double ratio = std::max(0.0, t_[r][width_ - 1]) / a;
        if (leave == rows_ || ratio < best_ratio - 1e-12) {
          leave = r;
          best_ratio = ratio;
        } else if (ratio <= best_ratio + 1e-12 && basis_[r] < basis_[leave]) {
          leave = r;
        }
      }
      if (leave == rows_) throw LpConstructionError("occupancy LP is unbounded");
      pivot(leave, enter);
      if (++pivots_ > opts_.max_pivots) {
        throw ConvergenceError("simplex pivot limit exceeded (possible cycling)",
                               static_cast<double>(pivots_));
      }
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) continue;
      std::size_t best = cols_;
      double mag = opts_.pivot_tolerance;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!is_basic(j) && std::abs(t_[r][j]) > mag) {
          mag = std::abs(t_[r][j]);
          best = j;
        }
      }
      if (best < cols_) {
        pivot(r, best);
      } else {
        // Redundant equality: the row is a combination of the others.
        std::fill(t_[r].begin(), t_[r].end(), 0.0);
        t_[r][basis_[r]] = 1.0;
      }
    }
  }

  bool is_basic(std::size_t j) const {
    return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
  }

  void pivot(std::size_t row, std::size_t col) {
    auto& pr = t_[row];
    const double inv = 1.0 / pr[col];
    for (double& v : pr) v *= inv;
    pr[col] = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == row) continue;
      const double f = t_[r][col];
      if (f == 0.0) continue;
      auto& tr = t_[r];
      for (std::size_t j = 0; j < width_; ++j) tr[j] -= f * pr[j];
      tr[col] = 0.0;
    }
    basis_[row] = col;
  }

  std::size_t rows_;
  std::size_t cols_;
  std::size_t width_ = 0;
  LpOptions opts_;
  std::vector<std::vector<double>> t_;
  std::vector<std::size_t> basis_;
  std::vector<double> cost_;
  std::size_t pivots_ = 0;
};

}  // namespace detail

/// Optimal basic occupancy measure and the policy u_ia = x_ia / sum_b x_ib.
/// States without occupancy get their first feasible action and are flagged
/// unvisited.
inline LpSolution solve_occupancy_lp(const OccupancyLP& lp, const LpOptions& opts = {}) {
  const std::size_t n = lp.num_states;
  const std::size_t m = lp.variables.size();
  if (n == 0 || m == 0) throw LpConstructionError("empty occupancy LP");

  std::vector<std::vector<double>> a(n + 1, std::vector<double>(m, 0.0));
  std::vector<double> b(n + 1, 0.0);
  std::vector<double> c(m, 0.0);
  b[0] = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    const auto& v = lp.variables[k];
    if (v.state >= n) throw LpConstructionError("LP variable refers to an unknown state");
    c[k] = v.cost;
    a[0][k] = 1.0;
    a[1 + v.state][k] += 1.0;
    for (const auto& t : v.row) a[1 + t.next][k] -= t.probability;
  }

  detail::Tableau tab(std::move(a), std::move(b), std::move(c), opts);
  tab.solve();

  LpSolution sol;
  sol.occupancy = tab.primal();
  sol.pivots = tab.pivots();
  sol.state_mass.assign(n, 0.0);
  std::vector<double> tx_mass(n, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& v = lp.variables[k];
    sol.objective += v.cost * sol.occupancy[k];
    sol.state_mass[v.state] += sol.occupancy[k];
    if (v.action == Action::Transmit) tx_mass[v.state] += sol.occupancy[k];
  }
  sol.policy.transmit_prob.assign(n, 0.0);
  sol.policy.unvisited.assign(n, false);
  for (std::size_t s = 0; s < n; ++s) {
    if (sol.state_mass[s] > 0.0) {
      sol.policy.transmit_prob[s] = tx_mass[s] / sol.state_mass[s];
      continue;
    }
    sol.policy.unvisited[s] = true;
    for (const auto& v : lp.variables) {
      if (v.state == s) {
        sol.policy.transmit_prob[s] = v.action == Action::Transmit ? 1.0 : 0.0;
        break;
      }
    }
  }
  return sol;
}

}  // namespace ncwait
