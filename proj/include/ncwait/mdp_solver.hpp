#pragma once

// Exact solution of the relay MDP on a truncated state space: discounted value
// iteration, relative value iteration for the long-run average cost, and
// threshold-structure extraction from a solved policy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ncwait/errors.hpp"
#include "ncwait/relay_model.hpp"

namespace ncwait {

/// All valid states with q1 <= cap and q2 <= cap (4*cap of them for cap >= 1).
/// An arrival into a full coordinate is dropped.
class TruncatedSpace {
 public:
  explicit TruncatedSpace(int cap) : cap_(cap) {
    if (cap < 0) throw ParameterError("truncation cap must be >= 0");
    const auto side = static_cast<std::size_t>(cap + 1);
    index_.assign(side * side, kNone);
    for (int i = 0; i <= cap; ++i) {
      for (int j = 0; j <= cap; ++j) {
        if (std::min(i, j) > 1) continue;
        index_[slot(i, j)] = states_.size();
        states_.emplace_back(i, j);
      }
    }
  }

  int cap() const noexcept { return cap_; }
  std::size_t size() const noexcept { return states_.size(); }
  std::span<const QState> states() const noexcept { return states_; }
  QState state(std::size_t idx) const { return states_.at(idx); }

  bool contains(QState s) const noexcept { return s.q1() <= cap_ && s.q2() <= cap_; }

  std::size_t index_of(QState s) const {
    if (!contains(s)) throw ContractViolation("state " + to_string(s) + " lies outside the truncated space");
    return index_[slot(s.q1(), s.q2())];
  }

  QState clamp(QState s) const { return QState(std::min(s.q1(), cap_), std::min(s.q2(), cap_)); }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t slot(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cap_ + 1) + static_cast<std::size_t>(j);
  }

  int cap_;
  std::vector<QState> states_;
  std::vector<std::size_t> index_;
};

struct Transition {
  std::size_t next;
  double probability;
};

struct StateAction {
  Action action;
  double cost;
  std::vector<Transition> outcomes;
};

/// Cost and clamped transition rows for every feasible (state, action) pair.
class SpaceModel {
 public:
  SpaceModel(const RelayParams& params, const TruncatedSpace& space) : space_(space) {
    params.validate();
    choices_.resize(space.size());
    for (std::size_t s = 0; s < space.size(); ++s) {
      const QState st = space.state(s);
      for (Action a : feasible_actions(st)) {
        StateAction sa{a, stage_cost(st, a, params), {}};
        for (const auto& o : transition_distribution(st, a, params)) {
          const std::size_t nxt = space.index_of(space.clamp(o.next));
          auto it = std::find_if(sa.outcomes.begin(), sa.outcomes.end(),
                                 [&](const Transition& t) { return t.next == nxt; });
          if (it != sa.outcomes.end()) {
            it->probability += o.probability;
          } else {
            sa.outcomes.push_back({nxt, o.probability});
          }
        }
        choices_[s].push_back(std::move(sa));
      }
    }
  }

  const TruncatedSpace& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return choices_.size(); }
  std::span<const StateAction> choices(std::size_t s) const { return choices_.at(s); }

  const StateAction& choice(std::size_t s, Action a) const {
    for (const auto& c : choices_.at(s)) {
      if (c.action == a) return c;
    }
    throw ContractViolation(std::string("action ") + to_string(a) + " is infeasible in state " +
                            to_string(space_.state(s)));
  }

  double expected(const StateAction& sa, std::span<const double> values) const noexcept {
    double acc = 0.0;
    for (const auto& t : sa.outcomes) acc += t.probability * values[t.next];
    return acc;
  }

  /// States reachable from (0,0) under some sequence of feasible actions.
  std::vector<bool> reachable_from_empty() const {
    std::vector<bool> seen(size(), false);
    std::deque<std::size_t> frontier{space_.index_of(QState(0, 0))};
    seen[frontier.front()] = true;
    while (!frontier.empty()) {
      const auto s = frontier.front();
      frontier.pop_front();
      for (const auto& c : choices_[s]) {
        for (const auto& t : c.outcomes) {
          if (!seen[t.next]) {
            seen[t.next] = true;
            frontier.push_back(t.next);
          }
        }
      }
    }
    return seen;
  }

 private:
  TruncatedSpace space_;
  std::vector<std::vector<StateAction>> choices_;
};

/// Per-state action choice; transmit_prob is 0 or 1 for deterministic policies.
struct PolicyTable {
  std::vector<double> transmit_prob;
  std::vector<bool> unvisited;  // set by the LP for states that carry no occupancy

  static PolicyTable deterministic(std::vector<Action> actions) {
    PolicyTable p;
    p.transmit_prob.reserve(actions.size());
    for (Action a : actions) p.transmit_prob.push_back(a == Action::Transmit ? 1.0 : 0.0);
    p.unvisited.assign(actions.size(), false);
    return p;
  }

  std::size_t size() const noexcept { return transmit_prob.size(); }
  Action action(std::size_t s) const { return transmit_prob.at(s) > 0.5 ? Action::Transmit : Action::Wait; }

  bool is_deterministic(double tol = 0.0) const noexcept {
    return std::all_of(transmit_prob.begin(), transmit_prob.end(),
                       [tol](double q) { return q <= tol || q >= 1.0 - tol; });
  }
};

/// Queue-threshold policy on a truncated space (forced actions respected).
inline PolicyTable threshold_policy(const TruncatedSpace& space, ThresholdPair t) {
  std::vector<Action> acts;
  acts.reserve(space.size());
  for (QState s : space.states()) {
    if (s.total() == 0) {
      acts.push_back(Action::Wait);
    } else if (s.q1() > 0 && s.q2() > 0) {
      acts.push_back(Action::Transmit);
    } else if (s.q1() > 0) {
      acts.push_back(s.q1() > t.l1 ? Action::Transmit : Action::Wait);
    } else {
      acts.push_back(s.q2() > t.l2 ? Action::Transmit : Action::Wait);
    }
  }
  return PolicyTable::deterministic(std::move(acts));
}

struct SolverOptions {
  double tol = 1e-9;
  std::size_t max_iterations = 2'000'000;
  /// Action values closer than this (relative to max(1,|Q|)) count as a tie,
  /// resolved in favour of Wait.
  double tie_tolerance = 1e-7;
};

struct ValueTable {
  std::vector<double> values;
  double discount = 0.0;
};

struct DiscountedResult {
  ValueTable value;
  PolicyTable policy;
  std::size_t iterations = 0;
  double residual = 0.0;  // sup-norm of the last value update
};

struct AverageCostResult {
  double gain = 0.0;
  std::vector<double> bias;  // h((0,0)) = 0
  PolicyTable policy;
  std::size_t iterations = 0;
  double residual = 0.0;  // span of the last value update
  std::vector<bool> active;  // states the iteration ran over (reachable from (0,0))
};

namespace detail {

inline Action greedy_action(const SpaceModel& model, std::size_t s, std::span<const double> values, double discount,
                            double tie_tol, double* best_out = nullptr) {
  double q_wait = std::numeric_limits<double>::infinity();
  double q_tx = std::numeric_limits<double>::infinity();
  for (const auto& c : model.choices(s)) {
    const double q = c.cost + discount * model.expected(c, values);
    (c.action == Action::Wait ? q_wait : q_tx) = q;
  }
  const double best = std::min(q_wait, q_tx);
  if (best_out) *best_out = best;
  if (std::isfinite(q_wait) && q_wait <= best + tie_tol * std::max(1.0, std::abs(best))) return Action::Wait;
  return Action::Transmit;
}

inline double bellman_min(const SpaceModel& model, std::size_t s, std::span<const double> values, double discount) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : model.choices(s)) best = std::min(best, c.cost + discount * model.expected(c, values));
  return best;
}

}  // namespace detail

/// Value iteration for the beta-discounted cost. On return
/// sup|T V - V| <= tol and the policy is greedy for V.
inline DiscountedResult discounted_value_iteration(const RelayParams& params, double beta, const TruncatedSpace& space,
                                                   const SolverOptions& opts = {}) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ParameterError("discount factor must lie in [0,1)");
  if (!(opts.tol > 0.0)) throw ParameterError("tolerance must be positive");
  const SpaceModel model(params, space);
  const std::size_t n = model.size();
  std::vector<double> v(n, 0.0);
  std::vector<double> next(n, 0.0);

  DiscountedResult res;
  res.value.discount = beta;
  double diff = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  while (it < opts.max_iterations) {
    ++it;
    diff = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      next[s] = detail::bellman_min(model, s, v, beta);
      diff = std::max(diff, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (diff <= opts.tol) break;
  }
  if (diff > opts.tol) throw ConvergenceError("discounted value iteration did not converge", diff);

  // One more sweep gives the residual of the returned table.
  double resid = 0.0;
  std::vector<Action> acts(n);
  for (std::size_t s = 0; s < n; ++s) {
    double best = 0.0;
    acts[s] = detail::greedy_action(model, s, v, beta, opts.tie_tolerance, &best);
    resid = std::max(resid, std::abs(best - v[s]));
  }
  res.value.values = std::move(v);
  res.policy = PolicyTable::deterministic(std::move(acts));
  res.iterations = it;
  res.residual = resid;
  return res;
}

namespace detail {

// Relative value iteration over the states marked active. `fixed` restricts
// every state to one action (policy evaluation) when non-null.
inline AverageCostResult relative_value_iteration_impl(const SpaceModel& model, const PolicyTable* fixed,
                                                       const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw ParameterError("tolerance must be positive");
  const std::size_t n = model.size();
  const std::size_t ref = model.space().index_of(QState(0, 0));
  const std::vector<bool> active = model.reachable_from_empty();

  std::vector<double> h(n, 0.0);
  std::vector<double> th(n, 0.0);
  std::deque<double> history;
  double span = std::numeric_limits<double>::infinity();
  double gain = 0.0;
  std::size_t it = 0;

  auto backup = [&](std::size_t s) {
    if (fixed) {
      const auto& c = model.choice(s, fixed->action(s));
      return c.cost + model.expected(c, h);
    }
    return bellman_min(model, s, h, 1.0);
  };

  while (it < opts.max_iterations) {
    ++it;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < n; ++s) {
      if (!active[s]) continue;
      th[s] = backup(s);
      const double d = th[s] - h[s];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    span = hi - lo;
    gain = 0.5 * (hi + lo);
    const double shift = th[ref];
    for (std::size_t s = 0; s < n; ++s) {
      if (active[s]) h[s] = th[s] - shift;
    }
    history.push_back(span);
    if (history.size() > 16) history.pop_front();
    if (span <= opts.tol) break;
  }
  if (!(span <= opts.tol)) {
    throw ConvergenceError("relative value iteration did not converge", span,
                           std::vector<double>(history.begin(), history.end()));
  }

  AverageCostResult res;
  res.gain = gain;
  res.iterations = it;
  res.residual = span;
  res.active = active;
  std::vector<Action> acts(n, Action::Wait);
  for (std::size_t s = 0; s < n; ++s) {
    if (fixed) {
      acts[s] = fixed->action(s);
    } else {
      acts[s] = greedy_action(model, s, h, 1.0, opts.tie_tolerance);
    }
  }
  res.bias = std::move(h);
  res.policy = PolicyTable::deterministic(std::move(acts));
  return res;
}

}  // namespace detail

/// Average-cost optimality via relative value iteration with reference state
/// (0,0). The iteration runs over the states reachable from the empty relay,
/// which is where the long-run average cost is defined.
inline AverageCostResult relative_value_iteration(const RelayParams& params, const TruncatedSpace& space,
                                                  const SolverOptions& opts = {}) {
  const SpaceModel model(params, space);
  return detail::relative_value_iteration_impl(model, nullptr, opts);
}

/// Long-run average cost and bias of a fixed deterministic policy.
inline AverageCostResult evaluate_policy(const RelayParams& params, const TruncatedSpace& space,
                                         const PolicyTable& policy, const SolverOptions& opts = {}) {
  if (policy.size() != space.size()) throw ContractViolation("policy table does not match the state space");
  const SpaceModel model(params, space);
  for (std::size_t s = 0; s < space.size(); ++s) model.choice(s, policy.action(s));
  return detail::relative_value_iteration_impl(model, &policy, opts);
}

/// Max over states of |(T h)(s) - h(s) - g|, i.e. how well (g, h) solves the
/// average-cost optimality equation on the active states.
inline double average_cost_residual(const RelayParams& params, const TruncatedSpace& space,
                                    const AverageCostResult& r) {
  const SpaceModel model(params, space);
  double worst = 0.0;
  for (std::size_t s = 0; s < model.size(); ++s) {
    if (!r.active.empty() && !r.active[s]) continue;
    worst = std::max(worst, std::abs(detail::bellman_min(model, s, r.bias, 1.0) - r.bias[s] - r.gain));
  }
  return worst;
}

/// sup_s |(T V)(s) - V(s)| for the discounted operator.
inline double discounted_residual(const RelayParams& params, const TruncatedSpace& space, const ValueTable& v) {
  const SpaceModel model(params, space);
  double worst = 0.0;
  for (std::size_t s = 0; s < model.size(); ++s) {
    worst = std::max(worst, std::abs(detail::bellman_min(model, s, v.values, v.discount) - v.values[s]));
  }
  return worst;
}

enum class BoundaryScan {
  /// Every boundary state in the table must follow the threshold rule.
  Full,
  /// States past the first Transmit on each axis are ignored: the policy can
  /// never reach them from the empty relay.
  ReachableOnly,
};

struct ThresholdExtraction {
  std::optional<ThresholdPair> thresholds;
  /// A Transmit state followed by a Wait state further out on the same axis.
  std::optional<std::pair<QState, QState>> witness;
  /// Axes on which no Transmit occurs up to the cap (threshold reported as cap).
  bool capped1 = false;
  bool capped2 = false;

  explicit operator bool() const noexcept { return thresholds.has_value(); }
};

/// Reads (L1, L2) off a policy: Wait at (i,0) for i <= L1 and Transmit at
/// (L1+1,0), likewise on the (0,j) axis.
inline ThresholdExtraction extract_thresholds(const PolicyTable& policy, const TruncatedSpace& space,
                                              BoundaryScan scan = BoundaryScan::Full) {
  if (policy.size() != space.size()) throw ContractViolation("policy table does not match the state space");
  ThresholdExtraction out;
  auto scan_axis = [&](bool first_axis, int& threshold, bool& capped) -> bool {
    std::optional<int> first_tx;
    for (int k = 1; k <= space.cap(); ++k) {
      const QState s = first_axis ? QState(k, 0) : QState(0, k);
      const Action a = policy.action(space.index_of(s));
      if (!first_tx) {
        if (a == Action::Transmit) first_tx = k;
        continue;
      }
      if (scan == BoundaryScan::ReachableOnly) break;
      if (a == Action::Wait) {
        const QState tx = first_axis ? QState(*first_tx, 0) : QState(0, *first_tx);
        out.witness = std::make_pair(tx, s);
        return false;
      }
    }
    if (first_tx) {
      threshold = *first_tx - 1;
    } else {
      threshold = space.cap();
      capped = true;
    }
    return true;
  };
  ThresholdPair t;
  if (!scan_axis(true, t.l1, out.capped1)) return out;
  if (!scan_axis(false, t.l2, out.capped2)) return out;
  out.thresholds = t;
  return out;
}

}  // namespace ncwait
