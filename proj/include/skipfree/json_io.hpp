#pragma once

#include <json.hpp>

#include "skipfree/branching.hpp"
#include "skipfree/chain.hpp"
#include "skipfree/compound_poisson.hpp"
#include "skipfree/simulate.hpp"

namespace skipfree {

using nlohmann::json;

// Scalars travel as JSON numbers or as "p/q" strings; rational mode reads
// both exactly (binary64 literals are dyadic rationals).
template <class S>
S scalar_from_json(const json& j, const std::string& where) {
  if (j.is_number()) {
    if constexpr (is_rational_v<S>)
      return Rational(j.get<double>());
    else
      return j.get<double>();
  }
  if (j.is_string()) return parse_scalar<S>(j.get<std::string>());
  throw ConfigError(where + ": expected a number or a \"p/q\" string");
}

inline json scalar_to_json(double v) { return json(v); }
inline json scalar_to_json(const Rational& v) { return json(v.str()); }

template <class S>
ProbMeasure<S> measure_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("probs") || !j["probs"].is_object())
    throw ConfigError(where + ": expected {\"probs\": {\"<point>\": weight, ...}}");
  std::map<int, S> probs;
  for (const auto& [key, value] : j["probs"].items()) {
    int point = 0;
    try {
      point = std::stoi(key);
    } catch (const std::exception&) {
      throw ConfigError(where + ".probs: support point '" + key + "' is not an integer");
    }
    probs[point] = scalar_from_json<S>(value, where + ".probs[" + key + "]");
  }
  return make_measure(probs);
}

template <class S>
json measure_to_json(const ProbMeasure<S>& m) {
  json probs = json::object();
  for (int j = 0; j <= m.max_support(); ++j)
    if (m(j) > S(0)) probs[std::to_string(j)] = scalar_to_json(m(j));
  return json{{"probs", probs}};
}

template <class S>
SkipFreeChain<S> chain_from_json(const json& j, const std::string& where) {
  for (const char* key : {"lo", "hi", "rows", "kill"})
    if (!j.contains(key)) throw ConfigError(where + ": missing field '" + std::string(key) + "'");
  SkipFreeChain<S> c;
  c.lo = j["lo"].get<int>();
  c.hi = j["hi"].get<int>();
  const int n = c.hi - c.lo + 1;
  if (n < 1) throw ConfigError(where + ": hi must be >= lo");
  const auto& rows = j["rows"];
  if (!rows.is_array() || static_cast<int>(rows.size()) != n)
    throw ConfigError(where + ".rows: expected " + std::to_string(n) + " rows");
  c.rates = Mat<S>(n, n);
  for (int i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n)
      throw ConfigError(where + ".rows[" + std::to_string(i) + "]: expected " + std::to_string(n) +
                        " entries");
    for (int k = 0; k < n; ++k)
      c.rates(i, k) = scalar_from_json<S>(rows[i][k], where + ".rows[" + std::to_string(i) + "][" +
                                                          std::to_string(k) + "]");
  }
  const auto& kill = j["kill"];
  if (!kill.is_array() || static_cast<int>(kill.size()) != n)
    throw ConfigError(where + ".kill: expected " + std::to_string(n) + " entries");
  c.kill = Vec<S>(n);
  for (int i = 0; i < n; ++i)
    c.kill[i] = scalar_from_json<S>(kill[i], where + ".kill[" + std::to_string(i) + "]");
  return c;
}

template <class S>
json chain_to_json(const SkipFreeChain<S>& c) {
  json rows = json::array();
  for (int i = 0; i < c.size(); ++i) {
    json row = json::array();
    for (int k = 0; k < c.size(); ++k) row.push_back(scalar_to_json(c.rates(i, k)));
    rows.push_back(std::move(row));
  }
  json kill = json::array();
  for (int i = 0; i < c.size(); ++i) kill.push_back(scalar_to_json(c.kill[i]));
  return json{{"lo", c.lo}, {"hi", c.hi}, {"rows", rows}, {"kill", kill}};
}

template <class S>
CppParams<S> cpp_params_from_json(const json& j, const std::string& where) {
  for (const char* key : {"alpha", "mu", "p"})
    if (!j.contains(key)) throw ConfigError(where + ": missing field '" + std::string(key) + "'");
  CppParams<S> p{scalar_from_json<S>(j["alpha"], where + ".alpha"),
                 measure_from_json<S>(j["mu"], where + ".mu"),
                 scalar_from_json<S>(j["p"], where + ".p")};
  validate_params(p);
  return p;
}

template <class S>
json cpp_params_to_json(const CppParams<S>& p) {
  return json{{"alpha", scalar_to_json(p.alpha)}, {"mu", measure_to_json(p.mu)},
              {"p", scalar_to_json(p.p)}};
}

template <class S>
MbiParams<S> mbi_params_from_json(const json& j, const std::string& where) {
  for (const char* key : {"alpha", "mu", "p", "beta", "q"})
    if (!j.contains(key)) throw ConfigError(where + ": missing field '" + std::string(key) + "'");
  MbiParams<S> p;
  p.alpha = scalar_from_json<S>(j["alpha"], where + ".alpha");
  p.mu = measure_from_json<S>(j["mu"], where + ".mu");
  p.p = scalar_from_json<S>(j["p"], where + ".p");
  p.beta = scalar_from_json<S>(j["beta"], where + ".beta");
  p.q = scalar_from_json<S>(j["q"], where + ".q");
  if (j.contains("nu"))
    p.nu = measure_from_json<S>(j["nu"], where + ".nu");
  else if (p.beta == S(0))
    p.nu = make_measure<S>({{1, S(1)}});
  else
    throw ConfigError(where + ": missing field 'nu' (required when beta > 0)");
  validate_params(p);
  return p;
}

template <class S>
json mbi_params_to_json(const MbiParams<S>& p) {
  return json{{"alpha", scalar_to_json(p.alpha)}, {"mu", measure_to_json(p.mu)},
              {"p", scalar_to_json(p.p)},         {"beta", scalar_to_json(p.beta)},
              {"nu", measure_to_json(p.nu)},      {"q", scalar_to_json(p.q)}};
}

inline SimConfig sim_config_from_json(const json& j, const std::string& where) {
  SimConfig cfg;
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n_paths")) cfg.n_paths = j["n_paths"].get<std::int64_t>();
  if (j.contains("max_jumps")) cfg.max_jumps = j["max_jumps"].get<std::int64_t>();
  if (j.contains("max_time")) cfg.max_time = j["max_time"].get<double>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
  if (cfg.n_paths < 1) throw ConfigError(where + ".n_paths: must be at least 1");
  if (cfg.max_jumps < 1) throw ConfigError(where + ".max_jumps: must be at least 1");
  return cfg;
}

inline json sim_config_to_json(const SimConfig& cfg) {
  return json{{"seed", cfg.seed},
              {"n_paths", cfg.n_paths},
              {"max_jumps", cfg.max_jumps},
              {"max_time", cfg.max_time},
              {"workers", cfg.workers}};
}

inline json estimate_to_json(const Estimate& e) {
  return json{{"p_hat", e.p_hat},
              {"std_err", e.std_err},
              {"n_capped", e.n_capped},
              {"bounds", json::array({e.lower, e.upper})}};
}

}  // namespace skipfree
