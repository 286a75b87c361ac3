#pragma once

// The four subcommands. Each compute_* function is pure given its config and
// returns the documents to write; run_command handles files and exit codes.

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ncwait_cli/config.hpp"

namespace ncwait::cli {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kInvalidInput = 2, kNoConvergence = 3, kPartialSweep = 4 };

// ---- formatting --------------------------------------------------------------

/// Shortest round-trip decimal form ("0.75", "3", "1e-07").
inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw ContractViolation("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_field(cells[i]);
    }
    out_ << "\r\n";
  }

  std::string str() const { return out_.str(); }

 private:
  std::size_t width_;
  std::ostringstream out_;
};

/// JSON has no infinity; such values are written as null.
inline json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json state_json(QState s) { return json::array({s.q1(), s.q2()}); }

inline json params_json(const RelayParams& p) {
  return {{"p1", p.p1}, {"p2", p.p2}, {"c_transmit", p.c_transmit}, {"c_hold", p.c_hold}};
}

inline json performance_json(const PerformancePoint& pt) {
  return {{"tau", pt.tau},
          {"lambda", pt.lambda},
          {"cost_per_slot", pt.cost_per_slot},
          {"cost_per_packet", pt.cost_per_packet},
          {"mean_delay", pt.mean_delay}};
}

struct CommandOutput {
  std::string primary_name;  // e.g. "summary.json"
  json document;
  std::vector<std::pair<std::string, std::string>> csv;  // file name, contents
  std::vector<std::uint64_t> seeds;
};

// ---- analyze -------------------------------------------------------------------

inline CommandOutput compute_analyze(const json& cfg) {
  const auto params = relay_params(cfg);
  const int max_t = value_or(cfg, "max_threshold", 10);
  const auto curve = tradeoff_curve(params, max_t);
  const auto best = optimize_thresholds(params);

  CsvWriter csv({"L1", "L2", "tau", "lambda", "cost_per_slot", "cost_per_packet", "mean_delay"});
  for (const auto& pt : curve) {
    const auto& f = pt.performance;
    csv.row({std::to_string(pt.thresholds.l1), std::to_string(pt.thresholds.l2), fmt_num(f.tau), fmt_num(f.lambda),
             fmt_num(f.cost_per_slot), fmt_num(f.cost_per_packet), fmt_num(f.mean_delay)});
  }

  const auto dist = stationary_distribution(params, best.thresholds);
  json pi = json::array();
  for (int i = best.thresholds.l1; i >= 1; --i) pi.push_back({{"state", state_json(QState(i, 0))}, {"p", dist.arm1(i)}});
  pi.push_back({{"state", state_json(QState(0, 0))}, {"p", dist.pi_00}});
  for (int j = 1; j <= best.thresholds.l2; ++j) pi.push_back({{"state", state_json(QState(0, j))}, {"p", dist.arm2(j)}});

  CommandOutput out;
  out.primary_name = "summary.json";
  out.document = {{"command", "analyze"},
                  {"params", params_json(params)},
                  {"alpha", num_or_null(dist.alpha)},
                  {"max_threshold", max_t},
                  {"search_bound", threshold_search_bound(params)},
                  {"optimum",
                   {{"L1", best.thresholds.l1}, {"L2", best.thresholds.l2}, {"performance", performance_json(best.performance)}}},
                  {"stationary_distribution", pi},
                  {"tradeoff_csv", "tradeoff.csv"}};
  out.csv.emplace_back("tradeoff.csv", csv.str());
  return out;
}

// ---- solve ---------------------------------------------------------------------

inline json extraction_json(const ThresholdExtraction& ex) {
  json j{{"threshold_type", static_cast<bool>(ex)}};
  if (ex.thresholds) {
    j["L1"] = ex.thresholds->l1;
    j["L2"] = ex.thresholds->l2;
    j["capped1"] = ex.capped1;
    j["capped2"] = ex.capped2;
  }
  j["witness"] = ex.witness ? json::array({state_json(ex.witness->first), state_json(ex.witness->second)}) : json(nullptr);
  return j;
}

inline CommandOutput compute_solve(const json& cfg) {
  const auto params = relay_params(cfg);
  const auto method = value_or<std::string>(cfg, "method", "rvi");
  SolverOptions opts;
  opts.tol = value_or(cfg, "tol", opts.tol);
  opts.max_iterations = value_or<std::size_t>(cfg, "max_iterations", opts.max_iterations);

  json doc{{"command", "solve"}, {"method", method}, {"params", params_json(params)}};
  json states = json::array();
  PolicyTable policy;
  BoundaryScan scan = BoundaryScan::ReachableOnly;
  std::optional<TruncatedSpace> space;

  if (method == "rvi") {
    space.emplace(value_or(cfg, "N", 40));
    const auto r = relative_value_iteration(params, *space, opts);
    doc["gain"] = r.gain;
    doc["iterations"] = r.iterations;
    doc["residual"] = r.residual;
    policy = r.policy;
    for (std::size_t s = 0; s < space->size(); ++s) {
      states.push_back({{"state", state_json(space->state(s))},
                        {"action", to_string(policy.action(s))},
                        {"bias", r.bias[s]},
                        {"active", static_cast<bool>(r.active[s])}});
    }
  } else if (method == "dvi") {
    space.emplace(value_or(cfg, "N", 40));
    const double beta = required<double>(cfg, "beta");
    const auto r = discounted_value_iteration(params, beta, *space, opts);
    doc["beta"] = beta;
    doc["iterations"] = r.iterations;
    doc["residual"] = r.residual;
    policy = r.policy;
    scan = BoundaryScan::Full;
    for (std::size_t s = 0; s < space->size(); ++s) {
      states.push_back({{"state", state_json(space->state(s))},
                        {"action", to_string(policy.action(s))},
                        {"value", r.value.values[s]}});
    }
  } else if (method == "lp") {
    space.emplace(value_or(cfg, "N", 15));
    const double eps = value_or(cfg, "epsilon", 1e-6);
    const auto lp = build_occupancy_lp(params, *space, eps);
    const auto sol = solve_occupancy_lp(lp);
    doc["gain"] = sol.objective;
    doc["epsilon"] = eps;
    doc["pivots"] = sol.pivots;
    doc["deterministic"] = sol.policy.is_deterministic(1e-6);
    policy = sol.policy;
    for (std::size_t s = 0; s < space->size(); ++s) {
      states.push_back({{"state", state_json(space->state(s))},
                        {"action", to_string(policy.action(s))},
                        {"transmit_prob", policy.transmit_prob[s]},
                        {"mass", sol.state_mass[s]},
                        {"unvisited", static_cast<bool>(policy.unvisited[s])}});
    }
  } else {
    throw ParameterError("unknown solve method '" + method + "' (expected rvi, lp or dvi)");
  }

  doc["N"] = space->cap();
  doc["num_states"] = space->size();
  doc["states"] = std::move(states);
  doc["structure"] = extraction_json(extract_thresholds(policy, *space, scan));
  doc["structure"]["scan"] = scan == BoundaryScan::Full ? "full" : "reachable";
  doc["full_scan"] = extraction_json(extract_thresholds(policy, *space, BoundaryScan::Full));

  CommandOutput out;
  out.primary_name = "solve.json";
  out.document = std::move(doc);
  return out;
}

// ---- simulate ------------------------------------------------------------------

struct ReplicatedSummary {
  double cost_per_slot = 0.0, cost_per_slot_se = 0.0;
  double cost_per_packet = 0.0, cost_per_packet_se = 0.0;
  double transmissions_per_slot = 0.0, delay = 0.0, latency = 0.0, tx_per_delivered = 0.0;
};

inline json report_json(const SimReport& r) {
  json j{{"measured_slots", r.measured_slots},
         {"batches", r.batches},
         {"transmissions_total", r.transmissions_total},
         {"coded_transmissions", r.coded_transmissions},
         {"delivered_packets", r.delivered_packets},
         {"arrivals", r.arrivals},
         {"avg_delay_per_packet", r.avg_delay_per_packet},
         {"avg_end_to_end_latency", r.avg_end_to_end_latency},
         {"avg_cost_per_slot", r.avg_cost_per_slot},
         {"avg_cost_per_packet", r.avg_cost_per_packet},
         {"transmissions_per_slot", r.transmissions_per_slot},
         {"transmissions_per_delivered_packet", r.transmissions_per_delivered_packet},
         {"cost_per_slot_se", r.cost_per_slot_se},
         {"cost_per_packet_se", r.cost_per_packet_se}};
  if (r.scenario == Scenario::SingleRelay) {
    json freq = json::array();
    for (const auto& [s, f] : r.empirical_state_freq) freq.push_back({{"state", state_json(s)}, {"freq", f}});
    j["empirical_state_freq"] = std::move(freq);
  }
  json relays = json::array();
  for (const auto& c : r.per_relay) {
    relays.push_back({{"transmissions", c.transmissions},
                      {"coded_transmissions", c.coded_transmissions},
                      {"holding_packet_slots", c.holding_packet_slots},
                      {"departures", c.departures},
                      {"cost", c.cost},
                      {"mean_queue", c.mean_queue},
                      {"mean_hop_wait", c.mean_hop_wait}});
  }
  j["per_relay"] = std::move(relays);
  return j;
}

/// Replication means; the standard error comes from batch means for a single
/// replication and from the spread of replication means otherwise.
inline ReplicatedSummary summarize(const std::vector<SimReport>& reps) {
  ReplicatedSummary s;
  const double n = static_cast<double>(reps.size());
  for (const auto& r : reps) {
    s.cost_per_slot += r.avg_cost_per_slot / n;
    s.cost_per_packet += r.avg_cost_per_packet / n;
    s.transmissions_per_slot += r.transmissions_per_slot / n;
    s.delay += r.avg_delay_per_packet / n;
    s.latency += r.avg_end_to_end_latency / n;
    s.tx_per_delivered += r.transmissions_per_delivered_packet / n;
  }
  if (reps.size() == 1) {
    s.cost_per_slot_se = reps[0].cost_per_slot_se;
    s.cost_per_packet_se = reps[0].cost_per_packet_se;
  } else {
    double v1 = 0.0, v2 = 0.0;
    for (const auto& r : reps) {
      v1 += std::pow(r.avg_cost_per_slot - s.cost_per_slot, 2);
      v2 += std::pow(r.avg_cost_per_packet - s.cost_per_packet, 2);
    }
    s.cost_per_slot_se = std::sqrt(v1 / (n - 1) / n);
    s.cost_per_packet_se = std::sqrt(v2 / (n - 1) / n);
  }
  return s;
}

struct SimCase {
  std::string label;
  std::string family;
  std::string policy_class;
  std::vector<PolicySpec> specs;  // one per relay
};

inline std::vector<SimCase> simulation_cases(const json& cfg, const RelayParams& params, bool line) {
  const json entries = value_or(cfg, "policies", json::array({{{"family", "opportunistic"}}}));
  if (!entries.is_array() || entries.empty()) throw ParameterError("'policies' must be a non-empty array");
  std::vector<SimCase> cases;
  for (const auto& e : entries) {
    if (e.contains("relays")) {
      if (!line) throw ParameterError("per-relay policy lists are only valid for the line scenario");
      const auto& rl = e.at("relays");
      if (!rl.is_array() || rl.size() != 2) throw ParameterError("'relays' must list exactly two policies");
      for (const auto& a : expand_policy(rl[0], params)) {
        for (const auto& b : expand_policy(rl[1], params)) {
          const std::string fa = family_name(a), fb = family_name(b);
          const std::string ca = policy_class(a), cb = policy_class(b);
          cases.push_back({describe(a) + " | " + describe(b), fa == fb ? fa : fa + "+" + fb,
                           ca == cb ? ca : ca + "+" + cb, {a, b}});
        }
      }
      continue;
    }
    for (const auto& s : expand_policy(e, params)) {
      SimCase c{describe(s), family_name(s), policy_class(s), {s}};
      if (line) c.specs.push_back(s);
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

inline CommandOutput compute_simulate(const json& cfg) {
  const auto scenario = value_or<std::string>(cfg, "scenario", "relay");
  if (scenario != "relay" && scenario != "line") throw ParameterError("scenario must be 'relay' or 'line'");
  const bool line = scenario == "line";
  const auto params = relay_params(cfg);
  const auto base = sim_config(cfg);
  const int reps = value_or(cfg, "replications", 1);
  if (reps < 1) throw ParameterError("replications must be >= 1");

  std::array<CostParams, 2> relay_costs{CostParams{params.c_transmit, params.c_hold},
                                        CostParams{params.c_transmit, params.c_hold}};
  if (cfg.contains("relay_costs")) {
    if (!line) throw ParameterError("'relay_costs' only applies to the line scenario");
    const auto& rc = cfg.at("relay_costs");
    if (!rc.is_array() || rc.size() != 2) throw ParameterError("'relay_costs' must be [[c_t, c_h], [c_t, c_h]]");
    for (int k = 0; k < 2; ++k) relay_costs[k] = {rc[k].at(0).get<double>(), rc[k].at(1).get<double>()};
  }

  // Replication r uses the same seed for every policy (common random numbers).
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < reps; ++r) seeds.push_back(reps == 1 ? base.seed : derive_seed(base.seed, 1000 + r));

  CsvWriter csv({"policy", "family", "class", "replications", "avg_cost_per_slot", "cost_per_slot_se",
                 "avg_cost_per_packet", "cost_per_packet_se", "transmissions_per_slot", "avg_delay_per_packet",
                 "avg_end_to_end_latency", "transmissions_per_delivered_packet"});
  json runs = json::array();
  for (const auto& c : simulation_cases(cfg, params, line)) {
    std::vector<SimReport> out;
    json rep_docs = json::array();
    for (std::uint64_t seed : seeds) {
      SimConfig sc = base;
      sc.seed = seed;
      out.push_back(line ? run_line_network({params.p1, params.p2}, {c.specs[0], c.specs[1]}, relay_costs, sc)
                         : run_single_relay(c.specs[0], params, sc));
      json rj = report_json(out.back());
      rj["seed"] = seed;
      rep_docs.push_back(std::move(rj));
    }
    const auto s = summarize(out);
    csv.row({c.label, c.family, c.policy_class, std::to_string(reps), fmt_num(s.cost_per_slot),
             fmt_num(s.cost_per_slot_se), fmt_num(s.cost_per_packet), fmt_num(s.cost_per_packet_se),
             fmt_num(s.transmissions_per_slot), fmt_num(s.delay), fmt_num(s.latency), fmt_num(s.tx_per_delivered)});
    json relays = json::array();
    for (const auto& sp : c.specs) relays.push_back(describe(sp));
    runs.push_back({{"policy", c.label},
                    {"family", c.family},
                    {"class", c.policy_class},
                    {"relays", relays},
                    {"summary",
                     {{"avg_cost_per_slot", s.cost_per_slot},
                      {"cost_per_slot_se", s.cost_per_slot_se},
                      {"avg_cost_per_packet", s.cost_per_packet},
                      {"cost_per_packet_se", s.cost_per_packet_se},
                      {"transmissions_per_slot", s.transmissions_per_slot},
                      {"avg_delay_per_packet", s.delay},
                      {"avg_end_to_end_latency", s.latency},
                      {"transmissions_per_delivered_packet", s.tx_per_delivered}}},
                    {"replications", std::move(rep_docs)}});
  }

  CommandOutput out;
  out.primary_name = "simulate.json";
  out.seeds = seeds;
  out.document = {{"command", "simulate"},
                  {"scenario", scenario},
                  {"params", params_json(params)},
                  {"num_slots", base.num_slots},
                  {"warmup_slots", base.effective_warmup()},
                  {"batches", base.batches},
                  {"runs", std::move(runs)},
                  {"comparison_csv", "comparison.csv"}};
  out.csv.emplace_back("comparison.csv", csv.str());
  return out;
}

// ---- files, manifests, exit codes ----------------------------------------------

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << contents;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

inline json make_manifest(const std::string& command, const json& cfg, const std::vector<std::uint64_t>& seeds,
                          const std::vector<std::string>& outputs) {
  return {{"tool", "ncwait"},
          {"version", kToolVersion},
          {"command", command},
          {"parameters", cfg},
          {"seeds", seeds},
          {"timestamp", utc_timestamp()},
          {"outputs", outputs}};
}

/// Runs `fn`, mapping library errors onto the exit-code convention.
template <class Fn>
int guarded(Fn&& fn, std::ostream& err, json* diagnostics = nullptr) {
  try {
    return fn();
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    if (diagnostics) {
      *diagnostics = {{"error", e.what()}, {"residual", e.residual()}, {"residual_history", e.residual_history()}};
    }
    return kNoConvergence;
  } catch (const LpConstructionError& e) {
    err << "error: " << e.what() << '\n';
    if (diagnostics) *diagnostics = {{"error", e.what()}};
    return kNoConvergence;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const json::exception& e) {
    err << "error: bad config value: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

inline CommandOutput compute(const std::string& command, const json& cfg) {
  if (command == "analyze") return compute_analyze(cfg);
  if (command == "solve") return compute_solve(cfg);
  if (command == "simulate") return compute_simulate(cfg);
  throw ParameterError("unknown command '" + command + "'");
}

/// analyze / solve / simulate: writes the primary JSON, CSVs and manifest.json
/// into `dir`. On solver failure writes error.json with residual diagnostics.
inline int run_command(const std::string& command, const json& cfg, const fs::path& dir, std::ostream& err) {
  json diag;
  const int rc = guarded(
      [&] {
        check_keys(cfg);
        CommandOutput out = compute(command, cfg);
        if (out.seeds.empty()) out.seeds.push_back(seed_of(cfg));
        fs::create_directories(dir);
        std::vector<std::string> files{out.primary_name};
        for (const auto& [name, body] : out.csv) files.push_back(name);
        out.document["manifest"] = "manifest.json";
        write_file(dir / out.primary_name, out.document.dump(2) + "\n");
        for (const auto& [name, body] : out.csv) write_file(dir / name, body);
        write_file(dir / "manifest.json", make_manifest(command, cfg, out.seeds, files).dump(2) + "\n");
        return int{kOk};
      },
      err, &diag);
  if (!diag.is_null()) {
    fs::create_directories(dir);
    write_file(dir / "error.json", diag.dump(2) + "\n");
  }
  return rc;
}

// ---- sweep ---------------------------------------------------------------------

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct SweepPoint {
  json cfg;
  std::string status = "ok";
  std::string message;
  int exit_code = kOk;
  std::vector<std::string> files;
};

inline std::vector<std::pair<double, double>> pairs_of(const json& grid, const char* key) {
  std::vector<std::pair<double, double>> out;
  if (!grid.contains(key)) return out;
  for (const auto& p : grid.at(key)) {
    if (!p.is_array() || p.size() != 2) throw ParameterError(std::string("grid '") + key + "' entries must be pairs");
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

/// Runs `command` at every (rates, costs) grid point, concurrently. Point k's
/// seed is derived from the hash of its own canonical config, so results do
/// not depend on execution order or thread count.
inline int run_sweep(const json& cfg, const fs::path& dir, std::ostream& err) {
  std::vector<SweepPoint> points;
  std::string command;
  std::uint64_t base_seed = 1;
  unsigned threads = 1;
  const int rc = guarded(
      [&] {
        check_keys(cfg);
        command = value_or<std::string>(cfg, "command", "analyze");
        if (command != "analyze" && command != "solve" && command != "simulate") {
          throw ParameterError("sweep command must be analyze, solve or simulate");
        }
        const json grid = value_or(cfg, "grid", json::object());
        if (!grid.is_object()) throw ParameterError("'grid' must be an object");
        base_seed = seed_of(cfg);
        threads = static_cast<unsigned>(
            std::max(1, value_or(cfg, "threads", static_cast<int>(std::thread::hardware_concurrency()))));
        for (const auto& [p1, p2] : pairs_of(grid, "rates")) {
          for (const auto& [ct, ch] : pairs_of(grid, "costs")) {
            json pc = cfg;
            for (const char* k : {"command", "grid", "threads"}) pc.erase(k);
            pc["p1"] = p1;
            pc["p2"] = p2;
            pc["c_transmit"] = ct;
            pc["c_hold"] = ch;
            pc.erase("seed");
            pc["seed"] = derive_seed(base_seed, fnv1a(pc.dump()));
            SweepPoint sp;
            sp.cfg = std::move(pc);
            points.push_back(std::move(sp));
          }
        }
        return int{kOk};
      },
      err);
  if (rc != kOk) return rc;

  fs::create_directories(dir);
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      auto& pt = points[k];
      char stem[32];
      std::snprintf(stem, sizeof stem, "point_%04zu", k);
      std::ostringstream msg;
      json diag;
      pt.exit_code = guarded(
          [&] {
            CommandOutput out = compute(command, pt.cfg);
            out.document["point"] = k;
            out.document["config"] = pt.cfg;
            out.document["manifest"] = "manifest.json";
            pt.files.push_back(std::string(stem) + ".json");
            for (const auto& [name, body] : out.csv) {
              pt.files.push_back(std::string(stem) + "_" + name);
              write_file(dir / pt.files.back(), body);
            }
            write_file(dir / pt.files.front(), out.document.dump(2) + "\n");
            return int{kOk};
          },
          msg, &diag);
      if (pt.exit_code != kOk) {
        pt.status = "error";
        pt.message = msg.str();
        while (!pt.message.empty() && pt.message.back() == '\n') pt.message.pop_back();
        std::lock_guard lock(err_mutex);
        err << stem << ": " << pt.message << '\n';
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(threads, std::max<std::size_t>(points.size(), 1)); ++t) pool.emplace_back(worker);
  pool.clear();

  CsvWriter index({"point", "p1", "p2", "c_transmit", "c_hold", "seed", "status", "exit_code", "files", "message"});
  json point_docs = json::array();
  std::vector<std::uint64_t> seeds;
  bool failed = false;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& pt = points[k];
    const auto seed = pt.cfg.at("seed").get<std::uint64_t>();
    seeds.push_back(seed);
    failed = failed || pt.exit_code != kOk;
    std::string files;
    for (const auto& f : pt.files) files += (files.empty() ? "" : ";") + f;
    index.row({std::to_string(k), fmt_num(pt.cfg.at("p1").get<double>()), fmt_num(pt.cfg.at("p2").get<double>()),
               fmt_num(pt.cfg.at("c_transmit").get<double>()), fmt_num(pt.cfg.at("c_hold").get<double>()),
               std::to_string(seed), pt.status, std::to_string(pt.exit_code), files, pt.message});
  }
  write_file(dir / "index.csv", index.str());
  std::vector<std::string> outputs{"index.csv"};
  for (const auto& pt : points) outputs.insert(outputs.end(), pt.files.begin(), pt.files.end());
  write_file(dir / "manifest.json", make_manifest("sweep", cfg, seeds, outputs).dump(2) + "\n");
  return failed ? kPartialSweep : kOk;
}

}  // namespace ncwait::cli
