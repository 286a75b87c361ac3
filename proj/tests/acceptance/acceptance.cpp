// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cfloat>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ncwait/ncwait.hpp"
#include "oracles/threshold_chain_oracle.hpp"

namespace {

using namespace ncwait;

// Two-sided Student t quantiles with 19 degrees of freedom (20 batches).
constexpr double kT19_95 = 2.093;
constexpr double kT19_99 = 2.861;

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] %2d %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", id, title, v.detail.c_str(), secs);
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SimConfig million_slots(std::uint64_t seed) {
  SimConfig c;
  c.num_slots = 1'100'000;
  c.warmup_slots = 100'000;
  c.seed = seed;
  return c;
}

double total_variation(const StationaryDistribution& d, const std::map<QState, double>& freq) {
  auto f = [&](QState s) {
    auto it = freq.find(s);
    return it == freq.end() ? 0.0 : it->second;
  };
  double tv = 0.0;
  double covered = 0.0;
  for (int i = 0; i <= d.l1(); ++i) {
    tv += std::abs(f(QState(i, 0)) - d.arm1(i));
    covered += f(QState(i, 0));
  }
  for (int j = 1; j <= d.l2(); ++j) {
    tv += std::abs(f(QState(0, j)) - d.arm2(j));
    covered += f(QState(0, j));
  }
  return 0.5 * (tv + (1.0 - covered));
}

// ---- 1 ---------------------------------------------------------------------------

Verdict closed_form_exactness() {
  std::mt19937_64 rng(20261015);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_tau = 0.0;
  for (int k = 0; k < 20; ++k) {
    double p1 = 0.0, p2 = 0.0;
    while (p1 <= 0.0 || p1 >= 1.0) p1 = u(rng);
    while (p2 <= 0.0 || p2 >= 1.0) p2 = u(rng);
    const RelayParams p{p1, p2, 1.0, 1.0};
    const double tau = average_cost(p, {0, 0}).tau;
    worst_tau = std::max(worst_tau, std::abs(tau - (p1 + p2 - p1 * p2)));
  }
  double worst_pi = 0.0;
  for (double q : {0.1, 0.5, 0.85}) {
    for (int l1 = 0; l1 <= 5; ++l1) {
      for (int l2 = 0; l2 <= 5; ++l2) {
        const auto d = stationary_distribution({q, q, 1.0, 1.0}, {l1, l2});
        const double target = 1.0 / (l1 + l2 + 1);
        for (int i = 0; i <= l1; ++i) worst_pi = std::max(worst_pi, std::abs(d.arm1(i) - target));
        for (int j = 1; j <= l2; ++j) worst_pi = std::max(worst_pi, std::abs(d.arm2(j) - target));
      }
    }
  }
  const double tol = 4 * DBL_EPSILON;
  return {worst_tau <= tol && worst_pi <= tol,
          fmt("20 random pairs max|tau(0,0)-(p1+p2-p1p2)|=%.2e; alpha=1, L<=5: max|pi-1/(L1+L2+1)|=%.2e; tol %.1e",
              worst_tau, worst_pi, tol)};
}

// ---- 2 ---------------------------------------------------------------------------

Verdict stationary_oracle() {
  struct Combo {
    double p1, p2;
    int l1, l2;
  };
  const std::vector<Combo> combos{{0.6, 0.3, 1, 1}, {0.5, 0.5, 1, 1}, {0.5, 0.5, 3, 2}, {0.2, 0.7, 2, 4},
                                  {0.7, 0.2, 4, 2}, {0.35, 0.65, 0, 3}, {0.8, 0.8, 2, 2}, {0.15, 0.25, 5, 5},
                                  {0.9, 0.4, 3, 0}, {0.45, 0.55, 6, 1}, {0.3, 0.3, 0, 0}, {0.65, 0.35, 2, 5}};
  double worst_eig = 0.0;
  double worst_tv = 0.0;
  std::uint64_t seed = 7000;
  for (const auto& c : combos) {
    const RelayParams p{c.p1, c.p2, 5.0, 1.0};
    const auto d = stationary_distribution(p, {c.l1, c.l2});
    const Eigen::MatrixXd P = oracle::threshold_chain_matrix(c.p1, c.p2, c.l1, c.l2);
    const Eigen::EigenSolver<Eigen::MatrixXd> es(P.transpose());
    Eigen::Index dom = 0;
    for (Eigen::Index k = 1; k < es.eigenvalues().size(); ++k) {
      if (std::abs(es.eigenvalues()[k] - 1.0) < std::abs(es.eigenvalues()[dom] - 1.0)) dom = k;
    }
    Eigen::VectorXd v = es.eigenvectors().col(dom).real();
    v /= v.sum();
    const oracle::ChainStates cs{c.l1, c.l2};
    for (int i = 0; i <= c.l1; ++i) worst_eig = std::max(worst_eig, std::abs(v[cs.index(i, 0)] - d.arm1(i)));
    for (int j = 1; j <= c.l2; ++j) worst_eig = std::max(worst_eig, std::abs(v[cs.index(0, j)] - d.arm2(j)));

    const auto r = run_single_relay(policy::QThreshold{c.l1, c.l2}, p, million_slots(seed++));
    worst_tv = std::max(worst_tv, total_variation(d, empirical_state_distribution(r)));
  }
  return {worst_eig <= 1e-10 && worst_tv <= 0.02,
          fmt("12 combos: max eigenvector gap %.2e (tol 1e-10), max simulated TV %.4f over 1e6 slots (tol 0.02)",
              worst_eig, worst_tv)};
}

// ---- 3, 4, 9 -----------------------------------------------------------------------

struct GridPoint {
  RelayParams params;
  double rvi_gain = 0.0;
  double lp_objective = 0.0;
  double closed_form = 0.0;
  ThresholdExtraction structure;
  double worst_share = 1.0;  // smallest dominant-action share over states with mass > 1e-6
};

std::vector<GridPoint> solve_grid() {
  const double rates[] = {0.2, 0.35, 0.5, 0.65, 0.8};
  std::vector<GridPoint> out;
  const TruncatedSpace big(40), small(15);
  for (double p1 : rates) {
    for (double p2 : rates) {
      for (double ratio : {1.0, 2.0, 5.0, 10.0}) {
        GridPoint g;
        g.params = {p1, p2, ratio, 1.0};
        const auto rvi = relative_value_iteration(g.params, big, SolverOptions{1e-9});
        g.rvi_gain = rvi.gain;
        g.structure = extract_thresholds(rvi.policy, big, BoundaryScan::ReachableOnly);
        const auto sol = solve_occupancy_lp(build_occupancy_lp(g.params, small, 1e-6));
        g.lp_objective = sol.objective;
        const auto& lp = build_occupancy_lp(g.params, small, 1e-6);
        std::vector<double> wait(small.size(), 0.0), tx(small.size(), 0.0);
        for (std::size_t k = 0; k < lp.variables.size(); ++k) {
          (lp.variables[k].action == Action::Transmit ? tx : wait)[lp.variables[k].state] += sol.occupancy[k];
        }
        for (std::size_t s = 0; s < small.size(); ++s) {
          const double mass = wait[s] + tx[s];
          if (mass > 1e-6) g.worst_share = std::min(g.worst_share, std::max(wait[s], tx[s]) / mass);
        }
        g.closed_form = optimize_thresholds(g.params).performance.cost_per_slot;
        out.push_back(g);
      }
    }
  }
  return out;
}

// ---- 5 ---------------------------------------------------------------------------

Verdict simulation_fidelity() {
  struct Combo {
    RelayParams p;
    ThresholdPair t;
  };
  const std::vector<Combo> combos{{{0.5, 0.5, 5, 1}, {1, 1}}, {{0.6, 0.3, 4, 1}, {1, 1}},
                                  {{0.6, 0.3, 10, 1}, {3, 2}}, {{0.2, 0.8, 5, 1}, {0, 3}},
                                  {{0.35, 0.35, 2, 0.5}, {2, 2}}, {{0.8, 0.65, 10, 1}, {4, 1}},
                                  {{0.25, 0.45, 8, 2}, {0, 0}}, {{0.7, 0.15, 6, 1}, {5, 0}}};
  double worst_rel = 0.0;
  double worst_z = 0.0;
  std::uint64_t seed = 5000;
  for (const auto& c : combos) {
    const double analytic = average_cost(c.p, c.t).cost_per_slot;
    const auto r = run_single_relay(policy::QThreshold{c.t.l1, c.t.l2}, c.p, million_slots(seed++));
    worst_rel = std::max(worst_rel, std::abs(r.avg_cost_per_slot - analytic) / analytic);
    worst_z = std::max(worst_z, std::abs(r.avg_cost_per_slot - analytic) / r.cost_per_slot_se);
  }
  return {worst_rel <= 0.01 && worst_z <= kT19_99,
          fmt("8 combos, 1e6 slots: max relative error %.4f%% (tol 1%%), max |error|/SE %.2f (99%% CI half-width %.3f SE)",
              100 * worst_rel, worst_z, kT19_99)};
}

// ---- 6 ---------------------------------------------------------------------------

Verdict tradeoff_shape() {
  const RelayParams p{0.5, 0.5, 5, 1};
  std::string trace;
  bool ok = true;
  PerformancePoint prev;
  for (int l = 0; l <= 5; ++l) {
    const auto pt = average_cost(p, {l, l});
    if (l > 0) ok = ok && pt.tau < prev.tau && pt.lambda > prev.lambda;
    trace += fmt("%s(%.4f,%.4f)", l ? " " : "", pt.tau, pt.lambda);
    prev = pt;
  }
  return {ok, "(tau,lambda) for L=0..5: " + trace};
}

// ---- 7 ---------------------------------------------------------------------------

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::string label;
};

std::vector<PolicySpec> family_grid(const std::string& family, int b) {
  std::vector<PolicySpec> out;
  if (family == "opportunistic") {
    out.emplace_back(policy::Opportunistic{});
  } else if (family == "q_threshold") {
    for (int l1 = 0; l1 <= b; ++l1)
      for (int l2 = 0; l2 <= b; ++l2) out.emplace_back(policy::QThreshold{l1, l2});
  } else if (family == "randomized_q_threshold") {
    for (int l = 0; l <= b; ++l)
      for (double q : {0.25, 0.5, 0.75, 0.9}) out.emplace_back(policy::RandomizedQThreshold{l, l, q});
  } else if (family == "wait_threshold") {
    for (int w = 0; w <= 2 * b; ++w) out.emplace_back(policy::WaitThreshold{w, w});
  } else {
    for (int l = 0; l <= b; ++l)
      for (int w = 1; w <= 2 * b; ++w) out.emplace_back(policy::QueueOrWait{l, l, w, w});
  }
  return out;
}

Verdict single_relay_ordering() {
  const char* families[] = {"opportunistic", "q_threshold", "randomized_q_threshold", "wait_threshold", "queue_or_wait"};
  bool ok = true;
  std::string detail;
  for (double ratio : {2.0, 5.0, 10.0}) {
    const RelayParams p{0.5, 0.5, ratio, 1.0};
    const int b = threshold_search_bound(p);
    std::map<std::string, Estimate> best;
    for (const char* fam : families) {
      for (const auto& spec : family_grid(fam, b)) {
        // Same seed for every policy: common random numbers across the comparison.
        const auto r = run_single_relay(spec, p, million_slots(777));
        auto& e = best[fam];
        if (e.label.empty() || r.avg_cost_per_packet < e.mean) e = {r.avg_cost_per_packet, r.cost_per_packet_se, describe(spec)};
      }
    }
    const auto& sd = best["q_threshold"];
    std::string worst_rival;
    for (const auto& [fam, e] : best) {
      if (fam == "q_threshold" || sd.mean <= e.mean) continue;
      const bool overlap = sd.mean - kT19_95 * sd.se <= e.mean + kT19_95 * e.se;
      ok = ok && overlap;
      worst_rival += fmt("%s%s %.4f%s", worst_rival.empty() ? "" : ", ", e.label.c_str(), e.mean, overlap ? " (CI overlap)" : " (SEPARATED)");
    }
    detail += fmt("%sCt/Ch=%g: SD %s %.4f, next best %s", detail.empty() ? "" : "; ", ratio, sd.label.c_str(), sd.mean,
                  worst_rival.empty() ? "none lower" : worst_rival.c_str());
  }
  return {ok, detail};
}

// ---- 8 ---------------------------------------------------------------------------

Verdict line_ordering() {
  bool ok = true;
  std::string detail;
  for (double ratio : {2.0, 5.0, 10.0}) {
    const RelayParams single{0.5, 0.5, ratio, 1.0};
    const auto t = optimize_thresholds(single).thresholds;
    const std::array<CostParams, 2> costs{CostParams{ratio, 1.0}, CostParams{ratio, 1.0}};
    SimConfig cfg = million_slots(888);
    const auto sd = run_line_network({0.5, 0.5}, {policy::QThreshold{t.l1, t.l2}, policy::QThreshold{t.l1, t.l2}}, costs, cfg);
    const auto opp = run_line_network({0.5, 0.5}, {policy::Opportunistic{}, policy::Opportunistic{}}, costs, cfg);
    const bool pass = sd.avg_cost_per_packet <= opp.avg_cost_per_packet ||
                      sd.avg_cost_per_packet - kT19_95 * sd.cost_per_packet_se <=
                          opp.avg_cost_per_packet + kT19_95 * opp.cost_per_packet_se;
    ok = ok && pass;
    detail += fmt("%sCt/Ch=%g: SD(%d,%d) %.4f+-%.4f vs opportunistic %.4f+-%.4f", detail.empty() ? "" : "; ", ratio,
                  t.l1, t.l2, sd.avg_cost_per_packet, kT19_95 * sd.cost_per_packet_se, opp.avg_cost_per_packet,
                  kT19_95 * opp.cost_per_packet_se);
  }
  return {ok, detail};
}

// ---- 10 --------------------------------------------------------------------------

Verdict discounted_bound() {
  const TruncatedSpace space(40);
  const double rates[] = {0.2, 0.5, 0.8};
  double worst = -std::numeric_limits<double>::infinity();
  int checked = 0;
  for (double beta : {0.9, 0.99}) {
    for (double p1 : rates) {
      for (double p2 : rates) {
        for (double ratio : {1.0, 5.0, 10.0}) {
          const RelayParams p{p1, p2, ratio, 1.0};
          SolverOptions opts;
          opts.tol = 1e-9;
          const auto r = discounted_value_iteration(p, beta, space, opts);
          // The iterate is within beta/(1-beta)*tol of the true value.
          const double slack = beta / (1 - beta) * opts.tol;
          for (std::size_t s = 0; s < space.size(); ++s) {
            const QState q = space.state(s);
            const double bound =
                (p.c_hold * (std::max(q.q1() - 1, 0) + std::max(q.q2() - 1, 0)) + p.c_transmit) / (1 - beta);
            worst = std::max(worst, r.value.values[s] - bound - slack);
            ++checked;
          }
        }
      }
    }
  }
  return {worst <= 0.0, fmt("%d (state, beta, params) checks; max V - bound = %.4g", checked, worst)};
}

}  // namespace

int main() {
  report(1, "closed-form exactness", closed_form_exactness);
  report(2, "stationary distribution oracle", stationary_oracle);

  std::vector<GridPoint> grid;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    grid = solve_grid();
  } catch (const std::exception& e) {
    std::printf("grid solve failed: %s\n", e.what());
  }
  const double grid_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  report(3, "triple-oracle optimal cost", [&]() -> Verdict {
    if (grid.size() != 100) return {false, "grid solve incomplete"};
    double worst = 0.0;
    std::string where;
    for (const auto& g : grid) {
      const double gap = std::max({std::abs(g.rvi_gain - g.lp_objective), std::abs(g.rvi_gain - g.closed_form),
                                   std::abs(g.lp_objective - g.closed_form)});
      if (gap > worst) {
        worst = gap;
        where = fmt("p=(%g,%g) Ct/Ch=%g", g.params.p1, g.params.p2, g.params.c_transmit);
      }
    }
    return {worst <= 1e-3, fmt("100 points (RVI N=40, LP N=15 eps=1e-6, closed form): max pairwise gap %.2e at %s "
                               "(tol 1e-3); grid solved in %.1fs",
                               worst, where.c_str(), grid_secs)};
  });

  report(4, "threshold structure", [&]() -> Verdict {
    if (grid.size() != 100) return {false, "grid solve incomplete"};
    int extracted = 0, bounded = 0;
    std::string bad;
    for (const auto& g : grid) {
      if (!g.structure) {
        bad += fmt(" no-threshold p=(%g,%g) Ct/Ch=%g", g.params.p1, g.params.p2, g.params.c_transmit);
        continue;
      }
      ++extracted;
      const double ratio = g.params.c_transmit / g.params.c_hold;
      if (g.structure.thresholds->l1 < ratio && g.structure.thresholds->l2 < ratio) {
        ++bounded;
      } else {
        bad += fmt(" L*=(%d,%d) at p=(%g,%g) Ct/Ch=%g", g.structure.thresholds->l1, g.structure.thresholds->l2,
                   g.params.p1, g.params.p2, ratio);
      }
    }
    return {extracted == 100 && bounded == 100,
            fmt("%d/100 threshold-type, %d/100 with L1*,L2* < Ct/Ch", extracted, bounded) + bad};
  });

  report(5, "simulation fidelity", simulation_fidelity);
  report(6, "tradeoff shape", tradeoff_shape);
  report(7, "single-relay policy ordering", single_relay_ordering);
  report(8, "line-network policy ordering", line_ordering);

  report(9, "LP determinism", [&]() -> Verdict {
    if (grid.size() != 100) return {false, "grid solve incomplete"};
    double worst = 1.0;
    for (const auto& g : grid) worst = std::min(worst, g.worst_share);
    return {worst >= 1 - 1e-6, fmt("100 LPs: smallest dominant-action share %.9f (tol 1-1e-6)", worst)};
  });

  report(10, "discounted value bound", discounted_bound);

  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAILED" : "PASSED", failures);
  return failures ? 1 : 0;
}
