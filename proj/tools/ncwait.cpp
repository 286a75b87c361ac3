// ncwait: closed-form analysis, MDP solving and simulation of a network-coding
// relay deciding whether to wait for a coding partner.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ncwait_cli/commands.hpp"

namespace {

using ncwait::cli::json;

struct Common {
  std::string config_path;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<double> p1, p2, c_transmit, c_hold;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "flat JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--output", c.output, "output directory")->required();
  sub->add_option("--seed", c.seed, "RNG seed (overrides the config)");
  sub->add_option("--p1", c.p1, "arrival probability of flow 1");
  sub->add_option("--p2", c.p2, "arrival probability of flow 2");
  sub->add_option("--ct", c.c_transmit, "cost per transmission");
  sub->add_option("--ch", c.c_hold, "holding cost per packet per slot");
}

json load(const Common& c) {
  json cfg = json::object();
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    cfg = json::parse(in);
  }
  if (c.seed) cfg["seed"] = *c.seed;
  if (c.p1) cfg["p1"] = *c.p1;
  if (c.p2) cfg["p2"] = *c.p2;
  if (c.c_transmit) cfg["c_transmit"] = *c.c_transmit;
  if (c.c_hold) cfg["c_hold"] = *c.c_hold;
  return cfg;
}

template <class T>
void put(json& cfg, const char* key, const std::optional<T>& v) {
  if (v) cfg[key] = *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wait-or-transmit analysis for a network-coding relay"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ncwait::cli::kToolVersion);

  Common common;
  std::optional<int> max_threshold, cap, threads, replications;
  std::optional<std::string> method, scenario, sweep_command;
  std::optional<double> beta, epsilon, tol;
  std::optional<long long> slots, warmup;
  std::vector<std::string> families;

  auto* analyze = app.add_subcommand("analyze", "closed-form threshold tradeoff and optimum");
  add_common(analyze, common);
  analyze->add_option("--max-threshold", max_threshold, "largest L1/L2 in the tradeoff grid");

  auto* solve = app.add_subcommand("solve", "numerical MDP solution on a truncated space");
  add_common(solve, common);
  solve->add_option("--method", method, "rvi, lp or dvi")->check(CLI::IsMember({"rvi", "lp", "dvi"}));
  solve->add_option("--N", cap, "truncation cap");
  solve->add_option("--beta", beta, "discount factor (dvi)");
  solve->add_option("--epsilon", epsilon, "LP perturbation");
  solve->add_option("--tol", tol, "stopping tolerance");

  auto* simulate = app.add_subcommand("simulate", "slotted simulation of one relay or the line network");
  add_common(simulate, common);
  simulate->add_option("--scenario", scenario, "relay or line")->check(CLI::IsMember({"relay", "line"}));
  simulate->add_option("--slots", slots, "slots per replication");
  simulate->add_option("--warmup", warmup, "warmup slots (default 10%)");
  simulate->add_option("--replications", replications, "independent replications");
  simulate->add_option("--family", families, "policy family with default parameters (repeatable)");

  auto* sweep = app.add_subcommand("sweep", "run a command over a grid of rates and costs");
  add_common(sweep, common);
  sweep->add_option("--command", sweep_command, "analyze, solve or simulate");
  sweep->add_option("--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ncwait::cli::kInvalidInput;
  }

  json cfg;
  try {
    cfg = load(common);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot read config: " << e.what() << '\n';
    return ncwait::cli::kInvalidInput;
  }
  put(cfg, "max_threshold", max_threshold);
  put(cfg, "method", method);
  put(cfg, "N", cap);
  put(cfg, "beta", beta);
  put(cfg, "epsilon", epsilon);
  put(cfg, "tol", tol);
  put(cfg, "scenario", scenario);
  put(cfg, "num_slots", slots);
  put(cfg, "warmup_slots", warmup);
  put(cfg, "replications", replications);
  put(cfg, "command", sweep_command);
  put(cfg, "threads", threads);
  if (!families.empty()) {
    json list = json::array();
    for (const auto& f : families) list.push_back({{"family", f}});
    cfg["policies"] = list;
  }

  if (*sweep) return ncwait::cli::run_sweep(cfg, common.output, std::cerr);
  const std::string name = app.get_subcommands().front()->get_name();
  return ncwait::cli::run_command(name, cfg, common.output, std::cerr);
}
