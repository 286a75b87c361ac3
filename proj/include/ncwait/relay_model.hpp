#pragma once

// MDP primitives of the two-queue XOR coding relay: states, actions, stage
// costs and the one-slot transition law. Everything here is a pure function of
// immutable values.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ncwait/errors.hpp"

namespace ncwait {

struct RelayParams {
  double p1 = 0.0;          // type-1 arrival probability per slot
  double p2 = 0.0;          // type-2 arrival probability per slot
  double c_transmit = 0.0;  // cost per transmission (coded or not)
  double c_hold = 0.0;      // cost per packet per slot held

  void validate() const {
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(p1) || !prob_ok(p2)) {
      throw ParameterError("arrival probabilities must lie in [0,1], got p1=" + std::to_string(p1) +
                           " p2=" + std::to_string(p2));
    }
    if (!(c_transmit >= 0.0) || !(c_hold >= 0.0)) {
      throw ParameterError("cost coefficients must be nonnegative");
    }
  }
};

/// Queue-length pair observed at a transmission opportunity. At most one of the
/// two queues may hold more than one packet.
class QState {
 public:
  constexpr QState() = default;
  constexpr QState(int q1, int q2) : q1_(q1), q2_(q2) {
    if (q1 < 0 || q2 < 0) throw ContractViolation("queue lengths must be nonnegative");
    if (std::min(q1, q2) > 1) {
      throw ContractViolation("invalid relay state (" + std::to_string(q1) + "," + std::to_string(q2) +
                              "): min(q1,q2) must be <= 1");
    }
  }

  constexpr int q1() const noexcept { return q1_; }
  constexpr int q2() const noexcept { return q2_; }
  constexpr int total() const noexcept { return q1_ + q2_; }

  friend constexpr auto operator<=>(const QState&, const QState&) = default;

 private:
  int q1_ = 0;
  int q2_ = 0;
};

inline std::string to_string(QState s) {
  return "(" + std::to_string(s.q1()) + "," + std::to_string(s.q2()) + ")";
}

enum class Action : std::uint8_t { Wait = 0, Transmit = 1 };

inline constexpr int as_int(Action a) noexcept { return static_cast<int>(a); }

inline const char* to_string(Action a) noexcept { return a == Action::Wait ? "wait" : "transmit"; }

namespace detail {
inline constexpr std::array<Action, 1> kWaitOnly{Action::Wait};
inline constexpr std::array<Action, 1> kTransmitOnly{Action::Transmit};
inline constexpr std::array<Action, 2> kBoth{Action::Wait, Action::Transmit};
}  // namespace detail

/// Actions allowed in `s`: an empty relay can only wait, a relay holding both
/// packet types always sends the XOR.
inline std::span<const Action> feasible_actions(QState s) noexcept {
  if (s.total() == 0) return detail::kWaitOnly;
  if (s.q1() > 0 && s.q2() > 0) return detail::kTransmitOnly;
  return detail::kBoth;
}

inline bool is_feasible(QState s, Action a) noexcept {
  auto acts = feasible_actions(s);
  return std::find(acts.begin(), acts.end(), a) != acts.end();
}

namespace detail {
inline void require_feasible(QState s, Action a) {
  if (!is_feasible(s, a)) {
    throw ContractViolation(std::string("action ") + to_string(a) + " is infeasible in state " + to_string(s));
  }
}
}  // namespace detail

/// C_h([q1-a]^+ + [q2-a]^+) + C_t a
inline double stage_cost(QState s, Action a, const RelayParams& params) {
  detail::require_feasible(s, a);
  const int act = as_int(a);
  const int held = std::max(s.q1() - act, 0) + std::max(s.q2() - act, 0);
  return params.c_hold * held + params.c_transmit * act;
}

struct ArrivalPattern {
  bool a1 = false;
  bool a2 = false;
};

inline constexpr std::array<ArrivalPattern, 4> kArrivalPatterns{
    ArrivalPattern{false, false}, ArrivalPattern{true, false}, ArrivalPattern{false, true},
    ArrivalPattern{true, true}};

/// Probability of an arrival pattern; over kArrivalPatterns these are
/// (1-p1)(1-p2), p1(1-p2), (1-p1)p2, p1 p2.
inline double pattern_probability(ArrivalPattern arr, const RelayParams& params) noexcept {
  const double f1 = arr.a1 ? params.p1 : 1.0 - params.p1;
  const double f2 = arr.a2 ? params.p2 : 1.0 - params.p2;
  return f1 * f2;
}

/// One slot of the sample path: serve according to `a`, then admit arrivals.
inline QState apply_slot(QState s, Action a, ArrivalPattern arr) {
  detail::require_feasible(s, a);
  const int act = as_int(a);
  return QState(std::max(s.q1() - act, 0) + (arr.a1 ? 1 : 0), std::max(s.q2() - act, 0) + (arr.a2 ? 1 : 0));
}

struct Outcome {
  QState next;
  double probability = 0.0;
};

/// Next-state distribution under action `a`. Zero-probability outcomes are
/// dropped and coincident next states are merged.
inline std::vector<Outcome> transition_distribution(QState s, Action a, const RelayParams& params) {
  detail::require_feasible(s, a);
  std::vector<Outcome> out;
  out.reserve(4);
  for (const auto& arr : kArrivalPatterns) {
    const double p = pattern_probability(arr, params);
    if (p <= 0.0) continue;
    const QState next = apply_slot(s, a, arr);
    auto it = std::find_if(out.begin(), out.end(), [&](const Outcome& o) { return o.next == next; });
    if (it != out.end()) {
      it->probability += p;
    } else {
      out.push_back({next, p});
    }
  }
  return out;
}

/// Queue-length thresholds: wait in (i,0) while i <= l1, likewise for (0,j).
struct ThresholdPair {
  int l1 = 0;
  int l2 = 0;

  void validate() const {
    if (l1 < 0 || l2 < 0) throw ParameterError("thresholds must be nonnegative");
  }
  friend constexpr bool operator==(const ThresholdPair&, const ThresholdPair&) = default;
};

}  // namespace ncwait
