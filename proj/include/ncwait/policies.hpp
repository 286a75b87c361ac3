#pragma once

// The five wait-vs-transmit decision rules compared in the experiments. All of
// them share the forced actions: an empty relay waits, a relay holding both
// packet types sends the XOR.

#include <charconv>
#include <cstdint>
#include <string>
#include <type_traits>
#include <variant>

#include "ncwait/errors.hpp"
#include "ncwait/relay_model.hpp"

namespace ncwait {

struct Observation {
  int q1 = 0;
  int q2 = 0;
  long long hol_wait1 = 0;  // slots the head-of-line packet of queue 1 has waited
  long long hol_wait2 = 0;
  long long slot_index = 0;

  void validate() const {
    if (q1 < 0 || q2 < 0 || hol_wait1 < 0 || hol_wait2 < 0) throw ContractViolation("negative observation field");
    if ((q1 == 0 && hol_wait1 != 0) || (q2 == 0 && hol_wait2 != 0)) {
      throw ContractViolation("head-of-line wait reported for an empty queue");
    }
  }
};

namespace policy {

/// Code when possible, otherwise send immediately.
struct Opportunistic {};

/// Wait while the lone nonempty queue holds at most L packets.
struct QThreshold {
  int l1 = 0;
  int l2 = 0;
};

/// Above the threshold, transmit with probability transmit_prob.
struct RandomizedQThreshold {
  int l1 = 0;
  int l2 = 0;
  double transmit_prob = 1.0;
};

/// Transmit once the head-of-line packet has waited at least W slots.
struct WaitThreshold {
  long long w1 = 0;
  long long w2 = 0;
};

/// Transmit when either the queue or the head-of-line wait crosses its threshold.
struct QueueOrWait {
  int l1 = 0;
  int l2 = 0;
  long long w1 = 0;
  long long w2 = 0;
};

}  // namespace policy

using PolicySpec = std::variant<policy::Opportunistic, policy::QThreshold, policy::RandomizedQThreshold,
                                policy::WaitThreshold, policy::QueueOrWait>;

inline void validate(const PolicySpec& spec) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, policy::QThreshold>) {
          if (p.l1 < 0 || p.l2 < 0) throw ParameterError("queue thresholds must be nonnegative");
        } else if constexpr (std::is_same_v<T, policy::RandomizedQThreshold>) {
          if (p.l1 < 0 || p.l2 < 0) throw ParameterError("queue thresholds must be nonnegative");
          if (!(p.transmit_prob >= 0.0 && p.transmit_prob <= 1.0)) {
            throw ParameterError("transmit probability must lie in [0,1]");
          }
        } else if constexpr (std::is_same_v<T, policy::WaitThreshold>) {
          if (p.w1 < 0 || p.w2 < 0) throw ParameterError("waiting-time thresholds must be nonnegative");
        } else if constexpr (std::is_same_v<T, policy::QueueOrWait>) {
          if (p.l1 < 0 || p.l2 < 0 || p.w1 < 0 || p.w2 < 0) throw ParameterError("thresholds must be nonnegative");
        }
      },
      spec);
}

/// Uniform double in [0,1) from the top 53 bits of one engine draw.
template <class Rng>
double uniform01(Rng& rng) {
  static_assert(sizeof(typename Rng::result_type) >= 8, "needs a 64-bit engine");
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Chooses the action for one transmission opportunity. Only the randomized
/// rule draws from `rng`, and only once, when it is above its threshold.
template <class Rng>
Action decide(const PolicySpec& spec, const Observation& obs, Rng& rng) {
  if (obs.q1 == 0 && obs.q2 == 0) return Action::Wait;
  if (obs.q1 > 0 && obs.q2 > 0) return Action::Transmit;
  const bool first = obs.q1 > 0;
  const int q = first ? obs.q1 : obs.q2;
  const long long hol = first ? obs.hol_wait1 : obs.hol_wait2;

  return std::visit(
      [&](const auto& p) -> Action {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, policy::Opportunistic>) {
          return Action::Transmit;
        } else if constexpr (std::is_same_v<T, policy::QThreshold>) {
          return q > (first ? p.l1 : p.l2) ? Action::Transmit : Action::Wait;
        } else if constexpr (std::is_same_v<T, policy::RandomizedQThreshold>) {
          if (q <= (first ? p.l1 : p.l2)) return Action::Wait;
          return uniform01(rng) < p.transmit_prob ? Action::Transmit : Action::Wait;
        } else if constexpr (std::is_same_v<T, policy::WaitThreshold>) {
          return hol >= (first ? p.w1 : p.w2) ? Action::Transmit : Action::Wait;
        } else {
          const bool over_q = q > (first ? p.l1 : p.l2);
          const bool over_w = hol >= (first ? p.w1 : p.w2);
          return over_q || over_w ? Action::Transmit : Action::Wait;
        }
      },
      spec);
}

/// True for rules that are deterministic functions of the queue lengths alone.
inline bool decide_is_stationary(const PolicySpec& spec) noexcept {
  return std::holds_alternative<policy::Opportunistic>(spec) || std::holds_alternative<policy::QThreshold>(spec);
}

/// SD (stationary deterministic), SR (stationary randomized) or HR (history dependent).
inline const char* policy_class(const PolicySpec& spec) noexcept {
  if (decide_is_stationary(spec)) return "SD";
  if (std::holds_alternative<policy::RandomizedQThreshold>(spec)) return "SR";
  return "HR";
}

inline const char* family_name(const PolicySpec& spec) noexcept {
  switch (spec.index()) {
    case 0: return "opportunistic";
    case 1: return "q_threshold";
    case 2: return "randomized_q_threshold";
    case 3: return "wait_threshold";
    default: return "queue_or_wait";
  }
}

namespace detail {
inline std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}
}  // namespace detail

inline std::string describe(const PolicySpec& spec) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, policy::Opportunistic>) {
          return "opportunistic";
        } else if constexpr (std::is_same_v<T, policy::QThreshold>) {
          return "q_threshold(L1=" + std::to_string(p.l1) + ",L2=" + std::to_string(p.l2) + ")";
        } else if constexpr (std::is_same_v<T, policy::RandomizedQThreshold>) {
          return "randomized_q_threshold(L1=" + std::to_string(p.l1) + ",L2=" + std::to_string(p.l2) +
                 ",q=" + detail::shortest(p.transmit_prob) + ")";
        } else if constexpr (std::is_same_v<T, policy::WaitThreshold>) {
          return "wait_threshold(W1=" + std::to_string(p.w1) + ",W2=" + std::to_string(p.w2) + ")";
        } else {
          return "queue_or_wait(L1=" + std::to_string(p.l1) + ",L2=" + std::to_string(p.l2) +
                 ",W1=" + std::to_string(p.w1) + ",W2=" + std::to_string(p.w2) + ")";
        }
      },
      spec);
}

}  // namespace ncwait
