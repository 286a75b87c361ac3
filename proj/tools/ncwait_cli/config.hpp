#pragma once

// Flat JSON run configuration shared by every subcommand. Unknown keys are
// rejected so that a typo cannot silently fall back to a default.

#include <algorithm>
#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncwait/ncwait.hpp"

namespace ncwait::cli {

using nlohmann::json;

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "p1",          "p2",          "c_transmit",   "c_hold",       "max_threshold", "method",
      "N",           "beta",        "epsilon",      "tol",          "max_iterations", "scenario",
      "policies",    "num_slots",   "warmup_slots", "batches",      "replications",   "relay_costs",
      "seed",        "command",     "grid",         "threads"};
  return keys;
}

inline void check_keys(const json& cfg) {
  if (!cfg.is_object()) throw ParameterError("config must be a JSON object");
  for (const auto& [k, v] : cfg.items()) {
    if (!known_keys().contains(k)) throw ParameterError("unknown config key '" + k + "'");
  }
}

template <class T>
T value_or(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return fallback;
  return cfg.at(key).get<T>();
}

template <class T>
T required(const json& cfg, const char* key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) throw ParameterError(std::string("missing config key '") + key + "'");
  return cfg.at(key).get<T>();
}

inline RelayParams relay_params(const json& cfg) {
  RelayParams p{required<double>(cfg, "p1"), required<double>(cfg, "p2"), value_or(cfg, "c_transmit", 5.0),
                value_or(cfg, "c_hold", 1.0)};
  p.validate();
  return p;
}

inline std::uint64_t seed_of(const json& cfg) { return value_or<std::uint64_t>(cfg, "seed", 1); }

inline SimConfig sim_config(const json& cfg) {
  SimConfig c;
  c.num_slots = value_or<long long>(cfg, "num_slots", 1'000'000);
  c.warmup_slots = value_or<long long>(cfg, "warmup_slots", -1);
  c.batches = value_or(cfg, "batches", 20);
  c.seed = seed_of(cfg);
  c.validate();
  return c;
}

// ---- policy entries --------------------------------------------------------

namespace detail {

// Scalar or array of scalars -> list of candidate values.
inline std::vector<double> axis(const json& entry, const char* key, double fallback) {
  if (!entry.contains(key)) return {fallback};
  const json& v = entry.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) throw ParameterError(std::string("policy parameter '") + key + "' must be a number or a non-empty array");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x.get<double>());
  return out;
}

inline int as_int(double v, const char* key) {
  if (v != static_cast<double>(static_cast<long long>(v))) {
    throw ParameterError(std::string("policy parameter '") + key + "' must be an integer");
  }
  return static_cast<int>(v);
}

inline void allow_only(const json& entry, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : entry.items()) {
    if (k == "family") continue;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
      throw ParameterError("policy family '" + entry.at("family").get<std::string>() + "' has no parameter '" + k + "'");
    }
  }
}

}  // namespace detail

/// Expands one family entry into concrete specs (Cartesian product over array
/// parameters). "sd_optimal" resolves to the closed-form optimal thresholds.
inline std::vector<PolicySpec> expand_policy(const json& entry, const RelayParams& params) {
  if (!entry.is_object() || !entry.contains("family")) throw ParameterError("policy entry needs a 'family'");
  const auto family = entry.at("family").get<std::string>();
  std::vector<PolicySpec> out;
  using detail::axis;
  using detail::as_int;
  if (family == "opportunistic") {
    detail::allow_only(entry, {});
    out.emplace_back(policy::Opportunistic{});
  } else if (family == "sd_optimal") {
    detail::allow_only(entry, {});
    const auto t = optimize_thresholds(params).thresholds;
    out.emplace_back(policy::QThreshold{t.l1, t.l2});
  } else if (family == "q_threshold") {
    detail::allow_only(entry, {"l1", "l2"});
    for (double l1 : axis(entry, "l1", 0))
      for (double l2 : axis(entry, "l2", 0)) out.emplace_back(policy::QThreshold{as_int(l1, "l1"), as_int(l2, "l2")});
  } else if (family == "randomized_q_threshold") {
    detail::allow_only(entry, {"l1", "l2", "transmit_prob"});
    for (double l1 : axis(entry, "l1", 0))
      for (double l2 : axis(entry, "l2", 0))
        for (double q : axis(entry, "transmit_prob", 1.0))
          out.emplace_back(policy::RandomizedQThreshold{as_int(l1, "l1"), as_int(l2, "l2"), q});
  } else if (family == "wait_threshold") {
    detail::allow_only(entry, {"w1", "w2"});
    for (double w1 : axis(entry, "w1", 0))
      for (double w2 : axis(entry, "w2", 0)) out.emplace_back(policy::WaitThreshold{as_int(w1, "w1"), as_int(w2, "w2")});
  } else if (family == "queue_or_wait") {
    detail::allow_only(entry, {"l1", "l2", "w1", "w2"});
    for (double l1 : axis(entry, "l1", 0))
      for (double l2 : axis(entry, "l2", 0))
        for (double w1 : axis(entry, "w1", 0))
          for (double w2 : axis(entry, "w2", 0))
            out.emplace_back(policy::QueueOrWait{as_int(l1, "l1"), as_int(l2, "l2"), as_int(w1, "w1"), as_int(w2, "w2")});
  } else {
    throw ParameterError("unknown policy family '" + family + "'");
  }
  for (const auto& s : out) validate(s);
  return out;
}

}  // namespace ncwait::cli
