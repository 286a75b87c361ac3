#pragma once

// Slotted simulation of the coding relay (single relay with Bernoulli inputs)
// and of the 4-node reverse-carpooling line n1 - n2 - n3 - n4, where the two
// relays feed each other.
//
// Slot timeline at a relay: arrivals are admitted, the policy observes the
// queues, the relay transmits (instantaneously) or waits, and every packet
// still queued is charged one slot of holding.

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <vector>

#include "ncwait/errors.hpp"
#include "ncwait/policies.hpp"
#include "ncwait/relay_model.hpp"

namespace ncwait {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent seed for stream `stream` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851F42D4C957F2DULL));
}

using Engine = std::mt19937_64;

struct SimConfig {
  long long num_slots = 1'000'000;
  long long warmup_slots = -1;  // negative: 10% of num_slots
  std::uint64_t seed = 1;
  int batches = 20;

  long long effective_warmup() const noexcept { return warmup_slots < 0 ? num_slots / 10 : warmup_slots; }
  long long measured_slots() const noexcept { return num_slots - effective_warmup(); }

  void validate() const {
    if (num_slots <= 0) throw ParameterError("num_slots must be positive");
    if (effective_warmup() >= num_slots) throw ParameterError("warmup_slots must be smaller than num_slots");
    if (batches < 2) throw ParameterError("batch means needs at least two batches");
    if (measured_slots() < batches) throw ParameterError("fewer measured slots than batches");
  }
};

struct CostParams {
  double c_transmit = 0.0;
  double c_hold = 0.0;
};

enum class Scenario { SingleRelay, LineNetwork };

struct RelayCounters {
  long long transmissions = 0;
  long long coded_transmissions = 0;
  long long holding_packet_slots = 0;
  long long departures = 0;  // packets sent (two per coded transmission)
  double cost = 0.0;
  double mean_queue = 0.0;  // holding_packet_slots / measured slots
  double mean_hop_wait = 0.0;
};

struct SimReport {
  Scenario scenario = Scenario::SingleRelay;
  long long measured_slots = 0;
  int batches = 0;

  long long transmissions_total = 0;
  long long coded_transmissions = 0;
  long long delivered_packets = 0;
  long long arrivals = 0;  // source arrivals inside the measured window
  double avg_delay_per_packet = 0.0;     // summed per-relay waiting slots
  double avg_end_to_end_latency = 0.0;   // line only: waits plus one slot per inter-relay hop
  double avg_cost_per_slot = 0.0;
  double avg_cost_per_packet = 0.0;
  double transmissions_per_slot = 0.0;
  double transmissions_per_delivered_packet = 0.0;
  double cost_per_slot_se = 0.0;    // batch means
  double cost_per_packet_se = 0.0;  // batch means of per-batch ratios

  std::map<QState, double> empirical_state_freq;  // single relay only
  std::vector<RelayCounters> per_relay;

  // Whole-run bookkeeping (warmup included) for conservation checks.
  long long total_arrivals = 0;
  long long total_delivered = 0;
  long long final_queued = 0;
  long long final_in_flight = 0;
};

/// Post-action state frequencies of a single-relay run.
inline const std::map<QState, double>& empirical_state_distribution(const SimReport& report) {
  if (report.scenario != Scenario::SingleRelay) {
    throw UnsupportedMetric("state frequencies are only recorded for single-relay runs");
  }
  return report.empirical_state_freq;
}

/// Per-slot trace hook for the single relay; `post` is the state after the
/// transmission opportunity, i.e. the next slot's state before arrivals.
struct SlotEvent {
  long long slot = 0;
  ArrivalPattern arrivals;
  QState pre;
  Action action = Action::Wait;
  QState post;
};

struct NoObserver {
  void operator()(const SlotEvent&) const noexcept {}
};

namespace detail {

struct Packet {
  int flow = 1;
  long long created = 0;
  long long arrived_here = 0;
  long long waited = 0;  // slots spent queued at relays so far
};

struct BatchMeans {
  explicit BatchMeans(long long measured, int batches)
      : measured(measured), cost(static_cast<std::size_t>(batches), 0.0),
        delivered(static_cast<std::size_t>(batches), 0.0), slots(static_cast<std::size_t>(batches), 0.0) {}

  std::size_t batch_of(long long k) const noexcept {
    return static_cast<std::size_t>((static_cast<__int128>(k) * static_cast<__int128>(cost.size())) / measured);
  }

  void add_slot(long long k, double c) {
    const auto b = batch_of(k);
    cost[b] += c;
    slots[b] += 1.0;
  }
  void add_delivery(long long k, double count) { delivered[batch_of(k)] += count; }

  static double standard_error(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0) / n);
  }

  double cost_per_slot_se() const {
    std::vector<double> m;
    for (std::size_t b = 0; b < cost.size(); ++b) m.push_back(cost[b] / slots[b]);
    return standard_error(m);
  }

  double cost_per_packet_se() const {
    std::vector<double> m;
    for (std::size_t b = 0; b < cost.size(); ++b) {
      if (delivered[b] <= 0.0) return 0.0;
      m.push_back(cost[b] / delivered[b]);
    }
    return standard_error(m);
  }

  long long measured;
  std::vector<double> cost;
  std::vector<double> delivered;
  std::vector<double> slots;
};

inline Observation observe(const std::array<std::deque<Packet>, 2>& q, long long slot) {
  Observation obs;
  obs.q1 = static_cast<int>(q[0].size());
  obs.q2 = static_cast<int>(q[1].size());
  obs.hol_wait1 = q[0].empty() ? 0 : slot - q[0].front().arrived_here;
  obs.hol_wait2 = q[1].empty() ? 0 : slot - q[1].front().arrived_here;
  obs.slot_index = slot;
  return obs;
}

inline void finalize_rates(SimReport& r, double total_cost, double delay_sum, const BatchMeans& bm) {
  const double slots = static_cast<double>(r.measured_slots);
  r.avg_cost_per_slot = total_cost / slots;
  r.transmissions_per_slot = static_cast<double>(r.transmissions_total) / slots;
  if (r.delivered_packets > 0) {
    const double d = static_cast<double>(r.delivered_packets);
    r.avg_cost_per_packet = total_cost / d;
    r.avg_delay_per_packet = delay_sum / d;
    r.transmissions_per_delivered_packet = static_cast<double>(r.transmissions_total) / d;
  }
  r.cost_per_slot_se = bm.cost_per_slot_se();
  r.cost_per_packet_se = bm.cost_per_packet_se();
}

}  // namespace detail

/// Single relay with Bernoulli(p1), Bernoulli(p2) arrivals. Arrivals and policy
/// randomization use separate streams, so runs with the same seed see the
/// same arrival sequence whatever the policy.
template <class Observer = NoObserver>
SimReport run_single_relay(const PolicySpec& spec, const RelayParams& params, const SimConfig& config,
                           Observer&& observer = {}) {
  params.validate();
  config.validate();
  validate(spec);

  Engine arrivals_rng(derive_seed(config.seed, 0));
  Engine policy_rng(derive_seed(config.seed, 1));
  const long long warmup = config.effective_warmup();

  SimReport r;
  r.scenario = Scenario::SingleRelay;
  r.measured_slots = config.measured_slots();
  r.batches = config.batches;
  r.per_relay.resize(1);
  auto& relay = r.per_relay[0];

  std::array<std::deque<detail::Packet>, 2> q;
  detail::BatchMeans bm(r.measured_slots, config.batches);
  std::vector<long long> arm1_counts(1, 0);  // index i: post-action state (i,0); index 0 is (0,0)
  std::vector<long long> arm2_counts(1, 0);  // index j >= 1: (0,j)
  double total_cost = 0.0;
  double delay_sum = 0.0;
  double wait_sum = 0.0;

  for (long long t = 0; t < config.num_slots; ++t) {
    const bool measured = t >= warmup;
    const long long k = t - warmup;

    ArrivalPattern arr;
    arr.a1 = uniform01(arrivals_rng) < params.p1;
    arr.a2 = uniform01(arrivals_rng) < params.p2;
    if (arr.a1) q[0].push_back({1, t, t, 0});
    if (arr.a2) q[1].push_back({2, t, t, 0});
    const long long arrived = (arr.a1 ? 1 : 0) + (arr.a2 ? 1 : 0);
    r.total_arrivals += arrived;

    const Observation obs = detail::observe(q, t);
    const QState pre(obs.q1, obs.q2);
    const Action action = decide(spec, obs, policy_rng);
    assert(is_feasible(pre, action));

    long long departed = 0;
    if (action == Action::Transmit) {
      for (auto& queue : q) {
        if (queue.empty()) continue;
        const auto& pkt = queue.front();
        if (measured) {
          delay_sum += static_cast<double>(t - pkt.arrived_here);
          wait_sum += static_cast<double>(t - pkt.arrived_here);
        }
        queue.pop_front();
        ++departed;
      }
    }
    r.total_delivered += departed;

    const QState post(static_cast<int>(q[0].size()), static_cast<int>(q[1].size()));
    observer(SlotEvent{t, arr, pre, action, post});

    if (!measured) continue;
    const long long held = post.total();
    const bool tx = action == Action::Transmit;
    const double slot_cost = params.c_transmit * (tx ? 1.0 : 0.0) + params.c_hold * static_cast<double>(held);
    total_cost += slot_cost;
    bm.add_slot(k, slot_cost);
    bm.add_delivery(k, static_cast<double>(departed));
    r.arrivals += arrived;
    r.delivered_packets += departed;
    relay.departures += departed;
    relay.holding_packet_slots += held;
    if (tx) {
      ++r.transmissions_total;
      ++relay.transmissions;
      if (departed == 2) {
        ++r.coded_transmissions;
        ++relay.coded_transmissions;
      }
    }
    if (post.q1() > 0) {
      if (arm1_counts.size() <= static_cast<std::size_t>(post.q1())) arm1_counts.resize(post.q1() + 1, 0);
      ++arm1_counts[static_cast<std::size_t>(post.q1())];
    } else if (post.q2() > 0) {
      if (arm2_counts.size() <= static_cast<std::size_t>(post.q2())) arm2_counts.resize(post.q2() + 1, 0);
      ++arm2_counts[static_cast<std::size_t>(post.q2())];
    } else {
      ++arm1_counts[0];
    }
  }

  r.coded_transmissions = relay.coded_transmissions;
  r.transmissions_total = relay.transmissions;
  r.final_queued = static_cast<long long>(q[0].size() + q[1].size());
  relay.cost = total_cost;
  relay.mean_queue = static_cast<double>(relay.holding_packet_slots) / static_cast<double>(r.measured_slots);
  relay.mean_hop_wait = relay.departures > 0 ? wait_sum / static_cast<double>(relay.departures) : 0.0;
  detail::finalize_rates(r, total_cost, delay_sum, bm);

  const double slots = static_cast<double>(r.measured_slots);
  for (std::size_t i = 0; i < arm1_counts.size(); ++i) {
    if (arm1_counts[i] > 0) r.empirical_state_freq[QState(static_cast<int>(i), 0)] = arm1_counts[i] / slots;
  }
  for (std::size_t j = 1; j < arm2_counts.size(); ++j) {
    if (arm2_counts[j] > 0) r.empirical_state_freq[QState(0, static_cast<int>(j))] = arm2_counts[j] / slots;
  }
  return r;
}

struct ArrivalRates {
  double p1 = 0.0;  // flow 1 enters at n2 from n1
  double p2 = 0.0;  // flow 2 enters at n3 from n4
};

/// Line n1 - n2 - n3 - n4 with flow 1 left-to-right and flow 2 right-to-left.
/// Relay 0 is n2, relay 1 is n3; each keeps one queue per flow. A packet sent
/// from one relay to the other joins the downstream queue at the next slot.
inline SimReport run_line_network(ArrivalRates rates, const std::array<PolicySpec, 2>& specs,
                                  const std::array<CostParams, 2>& costs, const SimConfig& config) {
  RelayParams{rates.p1, rates.p2, 0.0, 0.0}.validate();
  for (const auto& c : costs) RelayParams{0.0, 0.0, c.c_transmit, c.c_hold}.validate();
  for (const auto& s : specs) validate(s);
  config.validate();

  Engine arrivals_rng(derive_seed(config.seed, 0));
  std::array<Engine, 2> policy_rng{Engine(derive_seed(config.seed, 1)), Engine(derive_seed(config.seed, 2))};
  const long long warmup = config.effective_warmup();

  SimReport r;
  r.scenario = Scenario::LineNetwork;
  r.measured_slots = config.measured_slots();
  r.batches = config.batches;
  r.per_relay.resize(2);

  // relays[0].q[0]: flow 1 at n2 (from source n1); relays[0].q[1]: flow 2 at n2 (from n3).
  // relays[1].q[0]: flow 1 at n3 (from n2);        relays[1].q[1]: flow 2 at n3 (from source n4).
  std::array<std::array<std::deque<detail::Packet>, 2>, 2> relays;
  std::vector<detail::Packet> to_n3;  // flow 1 in flight from n2
  std::vector<detail::Packet> to_n2;  // flow 2 in flight from n3
  detail::BatchMeans bm(r.measured_slots, config.batches);
  double total_cost = 0.0;
  double delay_sum = 0.0;
  double latency_sum = 0.0;
  std::array<double, 2> wait_sums{0.0, 0.0};

  for (long long t = 0; t < config.num_slots; ++t) {
    const bool measured = t >= warmup;
    const long long k = t - warmup;

    const bool a1 = uniform01(arrivals_rng) < rates.p1;
    const bool a2 = uniform01(arrivals_rng) < rates.p2;
    if (a1) relays[0][0].push_back({1, t, t, 0});
    if (a2) relays[1][1].push_back({2, t, t, 0});
    const long long arrived = (a1 ? 1 : 0) + (a2 ? 1 : 0);
    r.total_arrivals += arrived;
    for (auto& p : to_n3) {
      p.arrived_here = t;
      relays[1][0].push_back(p);
    }
    for (auto& p : to_n2) {
      p.arrived_here = t;
      relays[0][1].push_back(p);
    }
    to_n3.clear();
    to_n2.clear();

    std::array<Action, 2> actions{};
    for (std::size_t n = 0; n < 2; ++n) {
      actions[n] = decide(specs[n], detail::observe(relays[n], t), policy_rng[n]);
    }

    double slot_cost = 0.0;
    long long delivered = 0;
    for (std::size_t n = 0; n < 2; ++n) {
      auto& q = relays[n];
      auto& ctr = r.per_relay[n];
      long long departed = 0;
      if (actions[n] == Action::Transmit) {
        assert(!q[0].empty() || !q[1].empty());
        for (std::size_t f = 0; f < 2; ++f) {
          if (q[f].empty()) continue;
          detail::Packet p = q[f].front();
          q[f].pop_front();
          const long long w = t - p.arrived_here;
          p.waited += w;
          ++departed;
          if (measured) wait_sums[n] += static_cast<double>(w);
          // Flow 1 moves n2 -> n3 -> n4, flow 2 moves n3 -> n2 -> n1.
          const bool leaves_line = (n == 0 && f == 1) || (n == 1 && f == 0);
          if (leaves_line) {
            ++delivered;
            ++r.total_delivered;
            if (measured) {
              delay_sum += static_cast<double>(p.waited);
              latency_sum += static_cast<double>(t - p.created);
            }
          } else if (n == 0) {
            to_n3.push_back(p);
          } else {
            to_n2.push_back(p);
          }
        }
      } else {
        assert(q[0].empty() || q[1].empty());
      }
      if (!measured) continue;
      const long long held = static_cast<long long>(q[0].size() + q[1].size());
      const bool tx = actions[n] == Action::Transmit;
      const double c = costs[n].c_transmit * (tx ? 1.0 : 0.0) + costs[n].c_hold * static_cast<double>(held);
      slot_cost += c;
      ctr.cost += c;
      ctr.holding_packet_slots += held;
      ctr.departures += departed;
      if (tx) {
        ++ctr.transmissions;
        if (departed == 2) ++ctr.coded_transmissions;
      }
    }
    if (!measured) continue;
    total_cost += slot_cost;
    bm.add_slot(k, slot_cost);
    bm.add_delivery(k, static_cast<double>(delivered));
    r.arrivals += arrived;
    r.delivered_packets += delivered;
  }

  for (std::size_t n = 0; n < 2; ++n) {
    auto& ctr = r.per_relay[n];
    r.transmissions_total += ctr.transmissions;
    r.coded_transmissions += ctr.coded_transmissions;
    ctr.mean_queue = static_cast<double>(ctr.holding_packet_slots) / static_cast<double>(r.measured_slots);
    ctr.mean_hop_wait = ctr.departures > 0 ? wait_sums[n] / static_cast<double>(ctr.departures) : 0.0;
    r.final_queued += static_cast<long long>(relays[n][0].size() + relays[n][1].size());
  }
  r.final_in_flight = static_cast<long long>(to_n2.size() + to_n3.size());
  detail::finalize_rates(r, total_cost, delay_sum, bm);
  if (r.delivered_packets > 0) r.avg_end_to_end_latency = latency_sum / static_cast<double>(r.delivered_packets);
  return r;
}

}  // namespace ncwait
