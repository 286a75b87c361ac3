#pragma once

// Closed-form performance of queue-length threshold policies.
//
// The threshold-controlled chain is observed at the start of a slot, before
// arrivals. Its states are (0,0), (1,0)..(L1,0) and (0,1)..(0,L2); the
// stationary law is geometric in alpha = (1-p2)p1 / ((1-p1)p2) along each arm.

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "ncwait/errors.hpp"
#include "ncwait/relay_model.hpp"

namespace ncwait {

/// Below this distance from 1 the normalizer switches to its alpha -> 1 limit.
inline constexpr double kAlphaUnitTolerance = 1e-9;

namespace detail {
inline bool degenerate_rates(double p1, double p2) noexcept {
  return (p1 == 0.0 && p2 == 0.0) || (p1 == 1.0 && p2 == 1.0);
}
}  // namespace detail

/// Ratio governing the stationary law. Returns +infinity when only the
/// denominator vanishes (p2 = 0 or p1 = 1).
inline double alpha(const RelayParams& params) {
  params.validate();
  const double p1 = params.p1;
  const double p2 = params.p2;
  if (detail::degenerate_rates(p1, p2)) {
    throw DegenerateParameters("alpha is 0/0 for p1=p2=0 or p1=p2=1; the relay is either always empty "
                               "or always holds a coding pair");
  }
  const double num = (1.0 - p2) * p1;
  const double den = (1.0 - p1) * p2;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

struct StationaryDistribution {
  double alpha = 1.0;
  double pi_00 = 1.0;
  std::vector<double> pi_i0;  // pi_i0[i-1] = P{(i,0)}, i = 1..L1
  std::vector<double> pi_0j;  // pi_0j[j-1] = P{(0,j)}, j = 1..L2

  int l1() const noexcept { return static_cast<int>(pi_i0.size()); }
  int l2() const noexcept { return static_cast<int>(pi_0j.size()); }

  /// P{(i,0)} for 0 <= i <= L1 (i = 0 is the empty state).
  double arm1(int i) const { return i == 0 ? pi_00 : pi_i0.at(static_cast<std::size_t>(i - 1)); }
  double arm2(int j) const { return j == 0 ? pi_00 : pi_0j.at(static_cast<std::size_t>(j - 1)); }

  double total_mass() const noexcept {
    double s = pi_00;
    for (double v : pi_i0) s += v;
    for (double v : pi_0j) s += v;
    return s;
  }
};

inline StationaryDistribution stationary_distribution(const RelayParams& params, ThresholdPair t) {
  t.validate();
  const double a = alpha(params);
  StationaryDistribution d;
  d.alpha = a;
  d.pi_i0.assign(static_cast<std::size_t>(t.l1), 0.0);
  d.pi_0j.assign(static_cast<std::size_t>(t.l2), 0.0);

  if (std::isinf(a)) {
    // Queue 2 never holds a packet at slot start; queue 1 climbs to L1 and stays.
    d.pi_00 = t.l1 == 0 ? 1.0 : 0.0;
    if (t.l1 > 0) d.pi_i0.back() = 1.0;
    return d;
  }
  if (a == 0.0) {
    d.pi_00 = t.l2 == 0 ? 1.0 : 0.0;
    if (t.l2 > 0) d.pi_0j.back() = 1.0;
    return d;
  }

  if (std::abs(a - 1.0) < kAlphaUnitTolerance) {
    d.pi_00 = 1.0 / static_cast<double>(t.l1 + t.l2 + 1);
  } else {
    const double arm1 = (1.0 - std::pow(a, t.l1 + 1)) / (1.0 - a);
    const double inv = 1.0 / a;
    const double arm2 = (1.0 - std::pow(inv, t.l2 + 1)) / (1.0 - inv);
    d.pi_00 = 1.0 / (arm1 + arm2 - 1.0);
  }
  for (int i = 1; i <= t.l1; ++i) d.pi_i0[static_cast<std::size_t>(i - 1)] = std::pow(a, i) * d.pi_00;
  for (int j = 1; j <= t.l2; ++j) d.pi_0j[static_cast<std::size_t>(j - 1)] = d.pi_00 / std::pow(a, j);
  return d;
}

/// Expected transmissions per slot; a coded and an uncoded transmission both
/// count as one. The boundary terms use pi_{0,0} when a threshold is zero.
inline double transmissions_per_slot(const RelayParams& params, ThresholdPair t, const StationaryDistribution& dist) {
  const double p1 = params.p1;
  const double p2 = params.p2;
  double sum1 = 0.0;
  for (int i = 1; i <= t.l1; ++i) sum1 += dist.arm1(i);
  double sum2 = 0.0;
  for (int j = 1; j <= t.l2; ++j) sum2 += dist.arm2(j);
  return p1 * p2 * dist.pi_00 + p2 * sum1 + p1 * sum2 + p1 * (1.0 - p2) * dist.arm1(t.l1) +
         p2 * (1.0 - p1) * dist.arm2(t.l2);
}

/// Expected number of packets at the start of a slot.
inline double mean_queue(ThresholdPair t, const StationaryDistribution& dist) {
  double lambda = 0.0;
  for (int i = 1; i <= t.l1; ++i) lambda += i * dist.arm1(i);
  for (int j = 1; j <= t.l2; ++j) lambda += j * dist.arm2(j);
  return lambda;
}

struct PerformancePoint {
  double tau = 0.0;              // transmissions per slot
  double lambda = 0.0;           // packets held per slot
  double cost_per_slot = 0.0;    // C_t tau + C_h lambda
  double cost_per_packet = 0.0;  // cost_per_slot / (p1 + p2)
  double mean_delay = 0.0;       // lambda / (p1 + p2), slots per packet
};

inline PerformancePoint average_cost(const RelayParams& params, ThresholdPair t) {
  const auto dist = stationary_distribution(params, t);
  PerformancePoint pt;
  pt.tau = transmissions_per_slot(params, t, dist);
  pt.lambda = mean_queue(t, dist);
  pt.cost_per_slot = params.c_transmit * pt.tau + params.c_hold * pt.lambda;
  const double rate = params.p1 + params.p2;
  pt.cost_per_packet = pt.cost_per_slot / rate;
  pt.mean_delay = pt.lambda / rate;
  return pt;
}

/// Largest threshold worth examining: waiting longer than C_t/C_h slots always
/// costs more than one transmission.
inline int threshold_search_bound(const RelayParams& params) {
  if (!(params.c_hold > 0.0)) {
    throw ParameterError("threshold search needs c_hold > 0: with free waiting the optimal thresholds diverge");
  }
  return static_cast<int>(std::ceil(params.c_transmit / params.c_hold));
}

struct ThresholdOptimum {
  ThresholdPair thresholds;
  PerformancePoint performance;
};

/// Exhaustive search over {0..bound}^2 (bound defaults to ceil(C_t/C_h)).
/// Ties go to the smaller L1+L2, then the smaller L1.
inline ThresholdOptimum optimize_thresholds(const RelayParams& params, int bound = -1) {
  params.validate();
  if (bound < 0) bound = threshold_search_bound(params);
  // Costs within this relative gap are treated as equal so ties resolve by the rule above.
  constexpr double kTieTolerance = 1e-12;
  ThresholdOptimum best;
  bool have = false;
  for (int sum = 0; sum <= 2 * bound; ++sum) {
    for (int l1 = std::max(0, sum - bound); l1 <= std::min(sum, bound); ++l1) {
      const ThresholdPair t{l1, sum - l1};
      const auto pt = average_cost(params, t);
      const double scale = std::max(1.0, std::abs(best.performance.cost_per_slot));
      if (!have || pt.cost_per_slot < best.performance.cost_per_slot - kTieTolerance * scale) {
        best = {t, pt};
        have = true;
      }
    }
  }
  return best;
}

struct TradeoffPoint {
  ThresholdPair thresholds;
  PerformancePoint performance;
};

/// average_cost over the grid {0..max_threshold}^2, row-major in L1.
inline std::vector<TradeoffPoint> tradeoff_curve(const RelayParams& params, int max_threshold) {
  if (max_threshold < 0) throw ParameterError("max_threshold must be >= 0");
  std::vector<TradeoffPoint> out;
  out.reserve(static_cast<std::size_t>((max_threshold + 1) * (max_threshold + 1)));
  for (int l1 = 0; l1 <= max_threshold; ++l1) {
    for (int l2 = 0; l2 <= max_threshold; ++l2) {
      const ThresholdPair t{l1, l2};
      out.push_back({t, average_cost(params, t)});
    }
  }
  return out;
}

}  // namespace ncwait
