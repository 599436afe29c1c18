#include "skipfree/engine.hpp"

#include <cmath>
#include <sstream>

#include "skipfree/oracles.hpp"
#include "skipfree/random_models.hpp"

namespace skipfree {

namespace {


template <class S>
CppParams<double> as_double(const CppParams<S>& p) {
  if constexpr (is_rational_v<S>) return params_to_double(p);
  else return p;
}

template <class S>
MbiParams<double> as_double(const MbiParams<S>& p) {
  if constexpr (is_rational_v<S>) return params_to_double(p);
  else return p;
}

std::string fmt_args(const Query& q) {
  std::ostringstream out;
  if (q.kind == "hit" || q.kind == "resolvent") {
    out << "x=" << q.x << ";y=" << q.y;
  } else if (q.kind == "two_sided" || q.kind == "exit_interval") {
    out << "x=" << q.x << ";a=" << q.a << ";b=" << q.b;
  } else if (q.kind == "passage_up") {
    out << "x=" << q.x << ";b=" << q.b;
  } else {
    out << "x=" << q.x << ";t=" << q.t << ";s=" << q.s;
  }
  return out.str();
}

void finish_row(ReportRow& row, double tol) {
  row.pass = true;
  if (row.oracle) {
    row.abs_diff = std::abs(row.closed_value - *row.oracle);
    if (!(*row.abs_diff < tol)) row.pass = false;
  }
  if (row.mc) {
    const double slack = 3.0 * row.mc->std_err;
    if (std::abs(row.closed_value - row.mc->p_hat) > slack) row.pass = false;
  }
}

// ----- chain model ---------------------------------------------------------

template <class S>
Report run_chain(const RunConfig& cfg, const RunOptions& opts) {
  const auto chain = chain_from_json<S>(cfg.params, "config.params");
  const auto diag = validate_chain(chain);
  if (!diag.valid()) {
    std::string msg = "invalid chain:";
    for (const auto& v : diag.violations) msg += " " + v + ";";
    throw ModelError(msg);
  }
  if (chain.size() > 2000) throw ConfigError("chains are capped at 2000 states");
  const auto ref = default_reference(chain);
  std::optional<SimModel> sim;
  if (cfg.sim) {
    if constexpr (is_rational_v<S>)
      sim = sim_model(chain_to_double(chain));
    else
      sim = sim_model(chain);
  }

  Report report;
  for (const auto& q : cfg.queries) {
    ReportRow row;
    row.kind = q.kind;
    row.args = fmt_args(q);
    S closed(0);
    std::optional<EventSpec> event;
    std::int64_t x0 = q.x;
    if (q.kind == "hit") {
      closed = hit_prob(chain, ref, static_cast<int>(q.x), static_cast<int>(q.y));
      row.oracle = to_double(solve_hit_bv(chain, static_cast<int>(q.x), static_cast<int>(q.y)));
      event = EventSpec::hit_point(q.y);
    } else if (q.kind == "two_sided") {
      closed = two_sided_exit(chain, ref, static_cast<int>(q.x), static_cast<int>(q.a),
                              static_cast<int>(q.b));
      row.oracle = to_double(
          solve_two_sided_bv(chain, static_cast<int>(q.x), static_cast<int>(q.a), static_cast<int>(q.b)));
      event = EventSpec::hit_before_upper(q.a, q.b);
    } else if (q.kind == "exit_interval") {
      closed = dynkin_exit(chain, std::function<S(int)>([](int) { return S(1); }),
                           static_cast<int>(q.a), static_cast<int>(q.b), static_cast<int>(q.x));
      row.oracle = to_double(solve_exit_interval_bv(chain, static_cast<int>(q.x),
                                                    static_cast<int>(q.a), static_cast<int>(q.b)));
      event = EventSpec::exit_interval(q.a, q.b);
    } else if (q.kind == "passage_up") {
      closed = passage_up_prob(chain, static_cast<int>(q.x), static_cast<int>(q.b));
      row.oracle = to_double(solve_passage_up_bv(chain, static_cast<int>(q.x), static_cast<int>(q.b)));
      event = EventSpec::passage_up(q.b);
      event->a = chain.lo - 1;  // no interior floor: lo itself stays pending-capable
    } else if (q.kind == "resolvent") {
      const Mat<S> G = resolvent_raw(chain);
      closed = G(chain.idx(static_cast<int>(q.x)), chain.idx(static_cast<int>(q.y)));
    } else {
      throw ConfigError("query kind '" + q.kind + "' is not defined for the chain model");
    }
    row.closed_form = format_scalar(closed);
    row.closed_value = to_double(closed);
    if (sim && event) row.mc = estimate(*sim, x0, *event, *cfg.sim);
    finish_row(row, opts.tol);
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ----- compound Poisson model ----------------------------------------------

template <class S>
Report run_cpp(const RunConfig& cfg, const RunOptions& opts) {
  const auto params = cpp_params_from_json<S>(cfg.params, "config.params");
  int horizon = 64;
  for (const auto& q : cfg.queries)
    horizon = std::max<int>(horizon, 2 * static_cast<int>(std::max({q.b - q.a, q.y - q.x, q.b - q.x})) + 64);
  const auto tables = build_tables(params, horizon);
  std::optional<SimModel> sim;
  if (cfg.sim) sim = sim_model(as_double(params));

  Report report;
  for (const auto& q : cfg.queries) {
    ReportRow row;
    row.kind = q.kind;
    row.args = fmt_args(q);
    S closed(0);
    std::optional<EventSpec> event;
    if (q.kind == "hit") {
      closed = hit_prob(tables, q.x, q.y);
      if (tables.regime == CppRegime::TransientKilled ||
          (tables.params.p == S(0) && tables.m < S(1))) {
        event = EventSpec::hit_point(q.y);
      } else if (tables.m > S(1)) {
        event = EventSpec::hit_before_upper(q.y, std::max(q.x, q.y) + 256);
      }
    } else if (q.kind == "two_sided") {
      closed = two_sided_exit_down(tables, q.x, q.a, q.b);
      const auto win = window_chain(params, static_cast<int>(q.a), static_cast<int>(q.b));
      row.oracle = to_double(solve_two_sided_bv(win, static_cast<int>(q.x), static_cast<int>(q.a),
                                                static_cast<int>(q.b)));
      event = EventSpec::hit_before_upper(q.a, q.b);
    } else if (q.kind == "exit_interval") {
      closed = exit_interval_prob(tables, q.x, q.a, q.b);
      const auto win = window_chain(params, static_cast<int>(q.a), static_cast<int>(q.b));
      row.oracle = to_double(solve_exit_interval_bv(win, static_cast<int>(q.x),
                                                    static_cast<int>(q.a), static_cast<int>(q.b)));
      event = EventSpec::exit_interval(q.a, q.b);
    } else if (q.kind == "passage_up") {
      closed = passage_up_prob(tables, q.x, q.b);
      event = EventSpec::passage_up(q.b);
      // subcritical drift never resolves on its own; stop far below
      event->a = (tables.params.p == S(0) && tables.m < S(1)) ? q.x - 240
                                                              : std::numeric_limits<std::int64_t>::min() / 2;
      if (tables.regime == CppRegime::RecurrentCritical) event = std::nullopt;
    } else if (q.kind == "resolvent") {
      closed = resolvent_g(tables, q.x, q.y);
    } else {
      throw ConfigError("query kind '" + q.kind + "' is not defined for the cpp model");
    }
    row.closed_form = format_scalar(closed);
    row.closed_value = to_double(closed);
    if (sim && event) row.mc = estimate(*sim, q.x, *event, *cfg.sim);
    finish_row(row, opts.tol);
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ----- branching model ------------------------------------------------------

template <class S>
Report run_mbi(const RunConfig& cfg, const RunOptions& opts) {
  const auto params = mbi_params_from_json<S>(cfg.params, "config.params");
  int horizon = 64;
  for (const auto& q : cfg.queries)
    horizon = std::max<int>(horizon, 2 * static_cast<int>(std::max({q.b, q.y, q.x})) + 64);
  const auto tables = build_tables(params, horizon);
  std::optional<SimModel> sim;
  if (cfg.sim) sim = sim_model(as_double(params));

  Report report;
  for (const auto& q : cfg.queries) {
    ReportRow row;
    row.kind = q.kind;
    row.args = fmt_args(q);
    S closed(0);
    std::optional<EventSpec> event;
    if (q.kind == "hit") {
      closed = hit_prob(tables, q.x, q.y);
      if (tables.cls == MbiClass::Transient && tables.params.q > S(0))
        event = EventSpec::hit_point(q.y);
      else if (tables.cls != MbiClass::Recurrent)
        event = EventSpec::hit_before_upper(q.y, std::max(q.x, q.y) + 256);
    } else if (q.kind == "two_sided") {
      closed = two_sided_exit(tables, q.x, q.a, q.b);
      const auto win = window_chain(params, static_cast<int>(q.a), static_cast<int>(q.b));
      row.oracle = to_double(solve_two_sided_bv(win, static_cast<int>(q.x), static_cast<int>(q.a),
                                                static_cast<int>(q.b)));
      event = EventSpec::hit_before_upper(q.a, q.b);
    } else if (q.kind == "exit_interval") {
      closed = exit_interval_prob(tables, q.x, q.a, q.b);
      const auto win = window_chain(params, static_cast<int>(q.a), static_cast<int>(q.b));
      row.oracle = to_double(solve_exit_interval_bv(win, static_cast<int>(q.x),
                                                    static_cast<int>(q.a), static_cast<int>(q.b)));
      event = EventSpec::exit_interval(q.a, q.b);
    } else if (q.kind == "passage_up") {
      closed = passage_up_prob(tables, q.x, q.b);
      const bool mbp = params.beta == S(0) && params.q == S(0);
      const auto win = window_chain(params, 0, static_cast<int>(q.b), /*absorb_at_a=*/mbp);
      row.oracle = to_double(solve_passage_up_bv(win, static_cast<int>(q.x), static_cast<int>(q.b)));
      event = EventSpec::passage_up(q.b);
      event->a = -1;
    } else if (q.kind == "resolvent") {
      closed = resolvent_g(tables, q.x, q.y);
      if (params.q > S(0))
        row.oracle = mbi_resolvent_truncated(as_double(params), q.x, q.y, 1e-10);
    } else if (q.kind == "transient_gf") {
      if constexpr (is_rational_v<S>)
        throw NeedsFloatMode("transient_gf needs float mode");
      else
        closed = transient_gf(tables, q.x, q.t, q.s);
      if (sim && cfg.sim) {
        SimConfig scfg = *cfg.sim;
        scfg.max_time = q.t;
        EstimateOptions eopts;
        const double s = q.s;
        eopts.payoff = [s](const PathOutcome& out) {
          return out.terminal == Terminal::TimedOut
                     ? std::pow(s, static_cast<double>(out.final_state))
                     : 0.0;
        };
        eopts.timeout_resolves = true;
        row.mc = estimate(*sim, q.x, EventSpec::passage_up(std::numeric_limits<std::int64_t>::max() / 4),
                          scfg, eopts);
      }
    } else {
      throw ConfigError("query kind '" + q.kind + "' is not defined for the mbi model");
    }
    row.closed_form = format_scalar(closed);
    row.closed_value = to_double(closed);
    if (sim && event) row.mc = estimate(*sim, q.x, *event, *cfg.sim);
    finish_row(row, opts.tol);
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ----- randomized regression panel ------------------------------------------

template <class S>
SkipFreeChain<S> cast_chain(const SkipFreeChain<Rational>& c) {
  if constexpr (is_rational_v<S>) return c;
  else return chain_to_double(c);
}

template <class S>
CppParams<S> cast_params(const CppParams<Rational>& p) {
  if constexpr (is_rational_v<S>) return p;
  else return params_to_double(p);
}

template <class S>
MbiParams<S> cast_params(const MbiParams<Rational>& p) {
  if constexpr (is_rational_v<S>) return p;
  else return params_to_double(p);
}

ReportRow residual_row(const std::string& kind, const std::string& args, double residual,
                       double tol) {
  ReportRow row;
  row.kind = kind;
  row.args = args;
  row.closed_form = format_scalar(residual);
  row.closed_value = residual;
  row.oracle = 0.0;
  row.abs_diff = residual;
  row.pass = residual < tol;
  return row;
}

ReportRow compare_row(const std::string& kind, const std::string& args, double closed,
                      double oracle, double tol) {
  ReportRow row;
  row.kind = kind;
  row.args = args;
  row.closed_form = format_scalar(closed);
  row.closed_value = closed;
  row.oracle = oracle;
  row.abs_diff = std::abs(closed - oracle);
  row.pass = *row.abs_diff < tol;
  return row;
}

ReportRow mc_row(const std::string& kind, const std::string& args, double closed,
                 const Estimate& est) {
  ReportRow row;
  row.kind = kind;
  row.args = args;
  row.closed_form = format_scalar(closed);
  row.closed_value = closed;
  row.mc = est;
  row.abs_diff = std::abs(closed - est.p_hat);
  row.pass = *row.abs_diff <= 3.0 * est.std_err;
  return row;
}

template <class S>
void panel_chain_rows(std::vector<ReportRow>& rows, Pcg64& rng, int instance, int states,
                      const std::optional<SimConfig>& mc, double tol) {
  const auto chain_r = random_chain(rng, states);
  const auto chain = cast_chain<S>(chain_r);
  const auto ref = default_reference(chain);
  const std::string tag = "instance=" + std::to_string(instance);

  rows.push_back(residual_row("chain.factorization", tag,
                                to_double(resolvent_identity_residual(chain, ref)), tol));

  const int n = chain.size();
  const int x = static_cast<int>(draw_int(rng, 1, n - 1));
  const int y = static_cast<int>(draw_int(rng, 0, x));
  const int a = static_cast<int>(draw_int(rng, 0, n - 2));
  const int b = static_cast<int>(draw_int(rng, a + 1, n - 1));
  const int xin = static_cast<int>(draw_int(rng, a, b - 1));

  rows.push_back(compare_row("chain.hit", tag + ";x=" + std::to_string(x) + ";y=" + std::to_string(y),
                               to_double(hit_prob(chain, ref, x, y)),
                               to_double(solve_hit_bv(chain, x, y)), tol));
  rows.push_back(compare_row(
      "chain.two_sided", tag + ";x=" + std::to_string(xin) + ";a=" + std::to_string(a) + ";b=" + std::to_string(b),
      to_double(two_sided_exit(chain, ref, xin, a, b)),
      to_double(solve_two_sided_bv(chain, xin, a, b)), tol));
  rows.push_back(compare_row(
      "chain.exit_interval", tag,
      to_double(dynkin_exit(chain, std::function<S(int)>([](int) { return S(1); }), a, b, xin)),
      to_double(solve_exit_interval_bv(chain, xin, a, b)), tol));
  rows.push_back(compare_row("chain.passage_up", tag,
                               to_double(passage_up_prob(chain, xin, b)),
                               to_double(solve_passage_up_bv(chain, xin, b)), tol));

  if (mc) {
    SimConfig cfg = *mc;
    cfg.seed = mc->seed + 7919u * static_cast<std::uint64_t>(instance) + 1;
    const auto model = sim_model(cast_chain<double>(chain_r));
    const double closed = to_double(two_sided_exit(chain, ref, xin, a, b));
    rows.push_back(mc_row("chain.two_sided.mc", tag,
                          closed, estimate(model, xin, EventSpec::hit_before_upper(a, b), cfg)));
  }
}

template <class S>
void panel_cpp_rows(std::vector<ReportRow>& rows, Pcg64& rng, int instance,
                    const std::optional<SimConfig>& mc, double tol) {
  const auto params_r = random_cpp_params(rng);
  const auto params = cast_params<S>(params_r);
  const auto tables = build_tables(params, 220);
  const std::string tag = "instance=" + std::to_string(instance);

  // psi * W = delta_0 coefficient identity
  {
    Vec<S> delta = Vec<S>::Zero(1);
    delta[0] = S(1);
    const double worst =
        to_double(convolution_residual(tables.psi_coeffs, tables.w, delta, 200));
    rows.push_back(residual_row("cpp.gf_identity", tag, worst, tol));
  }

  const long long a = draw_int(rng, 0, 4);
  const long long b = a + draw_int(rng, 2, 12);
  const long long x = draw_int(rng, a, b - 1);
  const auto win = window_chain(params, static_cast<int>(a), static_cast<int>(b));
  const std::string args = tag + ";x=" + std::to_string(x) + ";a=" + std::to_string(a) +
                           ";b=" + std::to_string(b);
  rows.push_back(compare_row("cpp.two_sided", args,
                               to_double(two_sided_exit_down(tables, x, a, b)),
                               to_double(solve_two_sided_bv(win, static_cast<int>(x),
                                                            static_cast<int>(a), static_cast<int>(b))),
                               tol));
  rows.push_back(compare_row("cpp.exit_interval", args,
                               to_double(exit_interval_prob(tables, x, a, b)),
                               to_double(solve_exit_interval_bv(win, static_cast<int>(x),
                                                                static_cast<int>(a), static_cast<int>(b))),
                               tol));

  if (mc) {
    SimConfig cfg = *mc;
    cfg.seed = mc->seed + 7919u * static_cast<std::uint64_t>(instance) + 2;
    const auto model = sim_model(cast_params<double>(params_r));
    rows.push_back(mc_row("cpp.two_sided.mc", args,
                          to_double(two_sided_exit_down(tables, x, a, b)),
                          estimate(model, x, EventSpec::hit_before_upper(a, b), cfg)));
    // Laplace-transform route: killing rate p+q evaluated in closed form vs
    // pathwise weights e^{-(p+q) T} on the killing-free process
    auto heavier = cast_params<double>(params_r);
    const double q_extra = 0.25;
    heavier.p += q_extra;
    const auto heavy_tables = build_tables(heavier, static_cast<int>(b - a) + 8);
    CppParams<double> unkilled = cast_params<double>(params_r);
    const double total_kill = unkilled.p + q_extra;
    unkilled.p = 0.0;
    EstimateOptions wopts;
    wopts.weights = FeynmanKac{0.0, total_kill};
    cfg.seed += 1;
    rows.push_back(mc_row("cpp.two_sided.laplace", args,
                          two_sided_exit_down(heavy_tables, x, a, b),
                          estimate(sim_model(unkilled), x, EventSpec::hit_before_upper(a, b), cfg,
                                   wopts)));
  }
}

template <class S>
void panel_mbi_rows(std::vector<ReportRow>& rows, Pcg64& rng, int instance,
                    const std::optional<SimConfig>& mc, double tol) {
  const auto params_r = random_mbi_params(rng);
  const auto params = cast_params<S>(params_r);
  const auto tables = build_tables(params, 220);
  const std::string tag = "instance=" + std::to_string(instance);

  // Lemma 5.1 coefficient identities, cross-checked by direct convolution
  {
    Vec<S> dpi(201);  // (k+1) pi(k+1) target for the pi * kappa identity
    for (int k = 0; k <= 200; ++k) dpi[k] = S(k + 1) * tables.pi[k + 1];
    Vec<S> delta = Vec<S>::Zero(1);
    delta[0] = S(1);
    double worst = to_double(convolution_residual(tables.pi, tables.kappa, dpi, 200));
    worst = std::max(worst,
                     to_double(convolution_residual(tables.pi, tables.varpi, delta, 200)));
    worst = std::max(worst, to_double(convolution_residual(tables.psi_coeffs, tables.kappa,
                                                           tables.phi_coeffs, 200)));
    rows.push_back(residual_row("mbi.lemma_identities", tag, worst, tol));
    bool dominated = true;
    for (int k = 0; k <= 200; ++k)
      if (scalar_abs<S>(tables.varpi[k]) > tables.pi[k] + check_tol<S>(1e-12)) dominated = false;
    rows.push_back(residual_row("mbi.pi_dominates_varpi", tag, dominated ? 0.0 : 1.0, 0.5));
  }

  const long long a = draw_int(rng, 0, 3);
  const long long b = a + draw_int(rng, 2, 12);
  const long long x = draw_int(rng, a, b - 1);
  const auto win = window_chain(params, static_cast<int>(a), static_cast<int>(b));
  const std::string args = tag + ";x=" + std::to_string(x) + ";a=" + std::to_string(a) +
                           ";b=" + std::to_string(b);
  rows.push_back(compare_row("mbi.two_sided", args,
                               to_double(two_sided_exit(tables, x, a, b)),
                               to_double(solve_two_sided_bv(win, static_cast<int>(x),
                                                            static_cast<int>(a), static_cast<int>(b))),
                               tol));
  rows.push_back(compare_row("mbi.exit_interval", args,
                               to_double(exit_interval_prob(tables, x, a, b)),
                               to_double(solve_exit_interval_bv(win, static_cast<int>(x),
                                                                static_cast<int>(a), static_cast<int>(b))),
                               tol));

  if (mc) {
    SimConfig cfg = *mc;
    cfg.seed = mc->seed + 7919u * static_cast<std::uint64_t>(instance) + 3;
    const auto model = sim_model(cast_params<double>(params_r));
    rows.push_back(mc_row("mbi.two_sided.mc", args,
                          to_double(two_sided_exit(tables, x, a, b)),
                          estimate(model, x, EventSpec::hit_before_upper(a, b), cfg)));
    // Feynman-Kac route: killed identities vs pathwise weights on the
    // killing-free process
    auto unkilled = cast_params<double>(params_r);
    const FeynmanKac weights{unkilled.p, unkilled.q};
    unkilled.p = 0.0;
    unkilled.q = 0.0;
    if (weights.p > 0.0 || weights.q > 0.0) {
      EstimateOptions wopts;
      wopts.weights = weights;
      cfg.seed += 1;
      rows.push_back(mc_row("mbi.two_sided.weighted", args,
                            to_double(two_sided_exit(tables, x, a, b)),
                            estimate(sim_model(unkilled), x, EventSpec::hit_before_upper(a, b),
                                     cfg, wopts)));
    }
  }
}

}  // namespace

PanelSpec panel_from_json(const json& j) {
  PanelSpec spec;
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  const json families = j.value("families", json::array());
  if (!families.is_array()) throw ConfigError("panel.families: expected an array");
  for (const auto& f : families) {
    PanelFamily fam;
    fam.model = f.value("model", std::string());
    if (fam.model != "chain" && fam.model != "cpp" && fam.model != "mbi")
      throw ConfigError("panel.families[].model: expected chain | cpp | mbi");
    fam.count = f.value("count", 10);
    fam.states = f.value("states", 8);
    if (fam.count < 0) throw ConfigError("panel.families[].count: must be nonnegative");
    spec.families.push_back(fam);
  }
  if (j.contains("mc")) spec.mc = sim_config_from_json(j["mc"], "panel.mc");
  return spec;
}

Report run_panel(const PanelSpec& spec, const RunOptions& opts) {
  Report report;
  Pcg64 rng(spec.seed, 0x9a41);
  int instance = 0;
  for (const auto& fam : spec.families) {
    for (int i = 0; i < fam.count; ++i, ++instance) {
      const int states = fam.states > 0 ? fam.states : static_cast<int>(draw_int(rng, 4, 12));
      if (opts.mode == ScalarMode::Rational) {
        if (fam.model == "chain")
          panel_chain_rows<Rational>(report.rows, rng, instance, states, spec.mc, opts.tol);
        else if (fam.model == "cpp")
          panel_cpp_rows<Rational>(report.rows, rng, instance, spec.mc, opts.tol);
        else
          panel_mbi_rows<Rational>(report.rows, rng, instance, spec.mc, opts.tol);
      } else {
        if (fam.model == "chain")
          panel_chain_rows<double>(report.rows, rng, instance, states, spec.mc, opts.tol);
        else if (fam.model == "cpp")
          panel_cpp_rows<double>(report.rows, rng, instance, spec.mc, opts.tol);
        else
          panel_mbi_rows<double>(report.rows, rng, instance, spec.mc, opts.tol);
      }
    }
  }
  return report;
}

Report run_config(const RunConfig& cfg, const RunOptions& opts) {
  RunConfig effective = cfg;
  if (opts.seed_override && effective.sim) effective.sim->seed = *opts.seed_override;
  if (opts.mode == ScalarMode::Rational) {
    if (effective.model == "chain") return run_chain<Rational>(effective, opts);
    if (effective.model == "cpp") return run_cpp<Rational>(effective, opts);
    return run_mbi<Rational>(effective, opts);
  }
  if (effective.model == "chain") return run_chain<double>(effective, opts);
  if (effective.model == "cpp") return run_cpp<double>(effective, opts);
  return run_mbi<double>(effective, opts);
}

}  // namespace skipfree
