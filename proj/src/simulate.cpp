#include "skipfree/simulate.hpp"

#include <cmath>
#include <thread>

#include "skipfree/rng.hpp"

namespace skipfree {

namespace {

constexpr std::int64_t STATE_CAP = std::int64_t(1) << 62;

struct DiscreteSampler {
  std::vector<double> cum;
  std::vector<std::int64_t> value;

  explicit DiscreteSampler(const ProbMeasure<double>& m) {
    double acc = 0.0;
    for (int j = 0; j <= m.max_support(); ++j) {
      if (m(j) <= 0.0) continue;
      acc += m(j);
      cum.push_back(acc);
      value.push_back(j);
    }
  }

  std::int64_t operator()(double u) const {
    const double target = u * cum.back();
    for (size_t i = 0; i + 1 < cum.size(); ++i)
      if (target < cum[i]) return value[i];
    return value.back();
  }
};

struct PreparedChain {
  const SkipFreeChain<double>* chain;
  std::vector<double> total;
  std::vector<double> kill;
  std::vector<std::vector<std::pair<double, std::int64_t>>> moves;  // cumulative rate, target

  explicit PreparedChain(const ChainSimModel& m) : chain(&m.chain) {
    const int n = m.chain.size();
    total.resize(n);
    kill.resize(n);
    moves.resize(n);
    for (int i = 0; i < n; ++i) {
      total[i] = -m.chain.rates(i, i);
      kill[i] = m.chain.kill[i];
      double acc = kill[i];
      for (int j = 0; j < n; ++j) {
        if (j == i || m.chain.rates(i, j) <= 0.0) continue;
        acc += m.chain.rates(i, j);
        moves[i].emplace_back(acc, m.chain.lo + j);
      }
    }
  }
};

struct PreparedCpp {
  double alpha, p;
  DiscreteSampler mu;
  explicit PreparedCpp(const CppSimModel& m) : alpha(m.alpha), p(m.p), mu(m.mu) {}
};

struct PreparedMbi {
  double alpha, p, beta, q;
  DiscreteSampler mu, nu_or_dummy;
  bool has_immigration;
  explicit PreparedMbi(const MbiSimModel& m)
      : alpha(m.alpha), p(m.p), beta(m.beta), q(m.q), mu(m.mu),
        nu_or_dummy(m.beta > 0.0 ? m.nu : m.mu), has_immigration(m.beta > 0.0) {}
};

using Prepared = std::variant<PreparedChain, PreparedCpp, PreparedMbi>;

Prepared prepare(const SimModel& model) {
  return std::visit([](const auto& m) -> Prepared {
    using T = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<T, ChainSimModel>) return PreparedChain(m);
    else if constexpr (std::is_same_v<T, CppSimModel>) return PreparedCpp(m);
    else return PreparedMbi(m);
  }, model);
}

double total_rate(const Prepared& prep, std::int64_t x) {
  return std::visit([&](const auto& m) -> double {
    using T = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<T, PreparedChain>) {
      return m.total[m.chain->idx(static_cast<int>(x))];
    } else if constexpr (std::is_same_v<T, PreparedCpp>) {
      return m.alpha + m.p;
    } else {
      return (m.alpha + m.p) * static_cast<double>(x) + m.beta + m.q;
    }
  }, prep);
}

// One transition; returns the next state or nullopt for a jump to the
// cemetery.
std::optional<std::int64_t> step(const Prepared& prep, std::int64_t x, double rate, Pcg64& rng) {
  return std::visit([&](const auto& m) -> std::optional<std::int64_t> {
    using T = std::decay_t<decltype(m)>;
    const double u = rng.uniform() * rate;
    if constexpr (std::is_same_v<T, PreparedChain>) {
      const int i = m.chain->idx(static_cast<int>(x));
      if (u < m.kill[i]) return std::nullopt;
      for (const auto& [cum, target] : m.moves[i])
        if (u < cum) return target;
      if (!m.moves[i].empty()) return m.moves[i].back().second;
      return std::nullopt;
    } else if constexpr (std::is_same_v<T, PreparedCpp>) {
      if (u < m.p) return std::nullopt;
      return x + m.mu(rng.uniform()) - 1;
    } else {
      const double xd = static_cast<double>(x);
      if (u < m.p * xd + m.q) return std::nullopt;
      if (u < (m.p + m.alpha) * xd + m.q) return x + m.mu(rng.uniform()) - 1;
      return x + m.nu_or_dummy(rng.uniform());
    }
  }, prep);
}

enum class EventState { Pending, SuccessA, SuccessB };

EventState event_state(const EventSpec& e, std::int64_t x) {
  switch (e.kind) {
    case EventSpec::Kind::HitBeforeUpper:
      if (x <= e.a) return EventState::SuccessA;
      if (x >= e.b) return EventState::SuccessB;
      return EventState::Pending;
    case EventSpec::Kind::HitPoint:
      return x == e.y ? EventState::SuccessA : EventState::Pending;
    case EventSpec::Kind::PassageUp:
      if (x >= e.b) return EventState::SuccessB;
      if (x <= e.a) return EventState::SuccessA;  // stopping floor: a non-crossing
      return EventState::Pending;
    default:  // ExitInterval
      if (x <= e.a) return EventState::SuccessA;
      if (x >= e.b) return EventState::SuccessB;
      return EventState::Pending;
  }
}

PathOutcome run_path(const Prepared& prep, std::int64_t x0, const EventSpec& event,
                     const SimConfig& cfg, std::int64_t stream,
                     const std::optional<FeynmanKac>& weights) {
  Pcg64 rng(cfg.seed, static_cast<std::uint64_t>(stream));
  const double wp = weights ? weights->p : 0.0;
  const double wq = weights ? weights->q : 0.0;
  PathOutcome out;
  std::int64_t x = x0;
  double t = 0.0;
  double area = 0.0;  // int_0^t X_s ds
  std::int64_t jumps = 0;

  for (;;) {
    out.final_state = x;
    out.jumps_used = jumps;
    const EventState es = event_state(event, x);
    if (es != EventState::Pending) {
      out.terminal = es == EventState::SuccessA ? Terminal::HitTargetA : Terminal::CrossedB;
      out.hit_time = t;
      out.weight = std::exp(-wq * t - wp * area);
      return out;
    }
    if (jumps >= cfg.max_jumps || x >= STATE_CAP) {
      out.terminal = Terminal::Capped;
      out.hit_time = t;
      out.weight = std::exp(-wq * t - wp * area);
      return out;
    }
    const double rate = total_rate(prep, x);
    if (!(rate > 0.0)) {
      out.terminal = Terminal::TimedOut;
      out.hit_time = cfg.max_time;
      out.weight = 0.0;
      return out;
    }
    const double hold = rng.exponential(rate);
    if (t + hold >= cfg.max_time) {
      area += static_cast<double>(x) * (cfg.max_time - t);
      out.terminal = Terminal::TimedOut;
      out.hit_time = cfg.max_time;
      out.weight = std::exp(-wq * cfg.max_time - wp * area);
      return out;
    }
    t += hold;
    area += static_cast<double>(x) * hold;
    const auto next = step(prep, x, rate, rng);
    if (!next) {
      out.terminal = Terminal::Killed;
      out.hit_time = t;
      out.weight = std::exp(-wq * t - wp * area);
      out.jumps_used = jumps + 1;
      return out;
    }
    x = *next;
    ++jumps;
  }
}

bool event_success(const EventSpec& e, Terminal t) {
  switch (e.kind) {
    case EventSpec::Kind::HitBeforeUpper:
    case EventSpec::Kind::HitPoint:
      return t == Terminal::HitTargetA;
    case EventSpec::Kind::PassageUp:
      return t == Terminal::CrossedB;
    default:
      return t == Terminal::HitTargetA || t == Terminal::CrossedB;
  }
}

// A path is pending when its terminal leaves the event undecided: capped
// paths always, timed-out paths unless they sit in an absorbing state.
bool event_pending(const Prepared& prep, const EventSpec& e, const PathOutcome& o,
                   bool timeout_resolves) {
  if (o.terminal == Terminal::HitTargetA || o.terminal == Terminal::CrossedB ||
      o.terminal == Terminal::Killed)
    return false;
  if (o.terminal == Terminal::TimedOut &&
      (timeout_resolves || !(total_rate(prep, o.final_state) > 0.0)))
    return false;
  return true;
}

}  // namespace

namespace {

void check_start_state(const SimModel& model, std::int64_t x0) {
  if (const auto* cm = std::get_if<ChainSimModel>(&model)) {
    if (!cm->chain.contains(static_cast<int>(x0)))
      throw ConfigError("start state " + std::to_string(x0) + " outside the chain's state space");
  } else if (std::holds_alternative<MbiSimModel>(model) && x0 < 0) {
    throw ConfigError("branching models start from a nonnegative state");
  }
}

}  // namespace

PathOutcome sample_path(const SimModel& model, std::int64_t x0, const EventSpec& event,
                        const SimConfig& cfg, std::int64_t stream_index,
                        const std::optional<FeynmanKac>& weights) {
  check_start_state(model, x0);
  const Prepared prep = prepare(model);
  return run_path(prep, x0, event, cfg, stream_index, weights);
}

Estimate estimate(const SimModel& model, std::int64_t x0, const EventSpec& event,
                  const SimConfig& cfg, const EstimateOptions& opts) {
  if (cfg.n_paths < 1) throw ConfigError("n_paths must be at least 1");
  if (cfg.max_jumps < 1) throw ConfigError("max_jumps must be at least 1");
  check_start_state(model, x0);
  const Prepared prep = prepare(model);
  const std::int64_t n = cfg.n_paths;
  std::vector<double> values(n, 0.0);
  std::vector<unsigned char> pending(n, 0);

  const auto worker_body = [&](std::int64_t first, std::int64_t last) {
    for (std::int64_t i = first; i < last; ++i) {
      const PathOutcome out = run_path(prep, x0, event, cfg, i, opts.weights);
      pending[i] = event_pending(prep, event, out, opts.timeout_resolves) ? 1 : 0;
      if (opts.payoff) {
        values[i] = opts.payoff(out);
      } else if (event_success(event, out.terminal)) {
        values[i] = opts.weights ? out.weight : 1.0;
      }
    }
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    worker_body(0, n);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      const std::int64_t first = n * w / workers;
      const std::int64_t last = n * (w + 1) / workers;
      pool.emplace_back(worker_body, first, last);
    }
    for (auto& th : pool) th.join();
  }

  // sequential reduction in path order keeps results independent of the
  // worker count
  double sum = 0.0, sumsq = 0.0;
  std::int64_t n_pending = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    sum += values[i];
    sumsq += values[i] * values[i];
    n_pending += pending[i];
  }

  Estimate est;
  est.p_hat = sum / static_cast<double>(n);
  est.n_capped = n_pending;
  const bool indicator = !opts.weights && !opts.payoff;
  if (indicator) {
    est.std_err = std::sqrt(std::max(0.0, est.p_hat * (1.0 - est.p_hat) / static_cast<double>(n)));
  } else {
    const double var = std::max(0.0, sumsq / n - est.p_hat * est.p_hat);
    est.std_err = std::sqrt(var / static_cast<double>(n));
  }
  est.lower = est.p_hat;
  est.upper = opts.payoff ? est.p_hat
                          : (sum + static_cast<double>(n_pending)) / static_cast<double>(n);
  if (static_cast<double>(n_pending) > opts.max_pending_fraction * static_cast<double>(n))
    throw ExcessiveCapping("event undecided on " + std::to_string(n_pending) + " of " +
                           std::to_string(n) + " paths; the estimate would be biased");
  return est;
}

}  // namespace skipfree
