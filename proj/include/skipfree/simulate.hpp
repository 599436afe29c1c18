#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "skipfree/chain.hpp"
#include "skipfree/measure.hpp"

namespace skipfree {

struct SimConfig {
  std::uint64_t seed = 1;
  std::int64_t n_paths = 10000;
  std::int64_t max_jumps = 100000;
  double max_time = std::numeric_limits<double>::infinity();
  int workers = 1;
};

enum class Terminal { HitTargetA, CrossedB, Killed, Capped, TimedOut };

inline const char* to_string(Terminal t) {
  switch (t) {
    case Terminal::HitTargetA: return "HitTargetA";
    case Terminal::CrossedB: return "CrossedB";
    case Terminal::Killed: return "Killed";
    case Terminal::Capped: return "Capped";
    default: return "TimedOut";
  }
}

struct PathOutcome {
  Terminal terminal = Terminal::TimedOut;
  double hit_time = 0.0;
  double weight = 1.0;  // exp(-q T - p int_0^T X) under Feynman-Kac weighting
  std::int64_t jumps_used = 0;
  std::int64_t final_state = 0;
};

struct Estimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::int64_t n_capped = 0;  // paths that ended with the event still open
  double lower = 0.0;         // pending paths counted as failures
  double upper = 0.0;         // pending paths counted as successes
};

// Path events: down-target a, upper set [b, point target y, or either side
// of the interval (a, b). For PassageUp, `a` is an optional stopping floor
// (reaching it ends the path as a non-crossing); it defaults far below any
// reachable state.
struct EventSpec {
  enum class Kind { HitBeforeUpper, HitPoint, PassageUp, ExitInterval };
  static constexpr std::int64_t NO_FLOOR = std::numeric_limits<std::int64_t>::min() / 2;

  Kind kind = Kind::HitBeforeUpper;
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t y = 0;

  static EventSpec hit_before_upper(std::int64_t a, std::int64_t b) {
    return {Kind::HitBeforeUpper, a, b, 0};
  }
  static EventSpec hit_point(std::int64_t y) { return {Kind::HitPoint, 0, 0, y}; }
  static EventSpec passage_up(std::int64_t b) { return {Kind::PassageUp, NO_FLOOR, b, 0}; }
  static EventSpec exit_interval(std::int64_t a, std::int64_t b) {
    return {Kind::ExitInterval, a, b, 0};
  }
};

struct ChainSimModel {
  SkipFreeChain<double> chain;
};

struct CppSimModel {
  double alpha = 1.0;
  ProbMeasure<double> mu;
  double p = 0.0;
};

struct MbiSimModel {
  double alpha = 1.0;
  ProbMeasure<double> mu;
  double p = 0.0;
  double beta = 0.0;
  ProbMeasure<double> nu;
  double q = 0.0;
};

using SimModel = std::variant<ChainSimModel, CppSimModel, MbiSimModel>;

// Simulate under the killing-free version of the model and carry the
// pathwise weight exp(-q T - p int_0^T X_s ds) instead.
struct FeynmanKac {
  double p = 0.0;
  double q = 0.0;
};

struct EstimateOptions {
  std::optional<FeynmanKac> weights;
  // Optional payoff replacing the event indicator; receives the outcome of
  // each path. Brackets collapse to the point estimate in payoff mode.
  std::function<double(const PathOutcome&)> payoff;
  double max_pending_fraction = 0.01;
  // Time-horizon functionals: a path reaching max_time is a resolved sample,
  // not a pending one.
  bool timeout_resolves = false;
};

PathOutcome sample_path(const SimModel& model, std::int64_t x0, const EventSpec& event,
                        const SimConfig& cfg, std::int64_t stream_index,
                        const std::optional<FeynmanKac>& weights = std::nullopt);

Estimate estimate(const SimModel& model, std::int64_t x0, const EventSpec& event,
                  const SimConfig& cfg, const EstimateOptions& opts = {});

}  // namespace skipfree
