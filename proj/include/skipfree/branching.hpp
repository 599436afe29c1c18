#pragma once

#include <cmath>
#include <map>
#include <optional>

#include "skipfree/psi.hpp"
#include "skipfree/quadrature.hpp"

namespace skipfree {

// Markov branching process with immigration: each of x individuals branches
// at rate alpha into j children with law mu (j = 0 removes it, skip-free
// downward), immigrants arrive in batches of law nu at rate beta, and the
// whole population is killed at rate p x + q.
template <class S>
struct MbiParams {
  S alpha;
  ProbMeasure<S> mu;
  S p;
  S beta;
  ProbMeasure<S> nu;
  S q;
};

template <class S>
void validate_params(const MbiParams<S>& params) {
  if (!(params.alpha > S(0))) throw ConfigError("alpha must be positive");
  if (!(params.mu(0) > S(0))) throw ConfigError("mu(0) must be positive");
  if (!(params.mu(1) == S(0))) throw ConfigError("mu(1) must be zero");
  if (params.p < S(0)) throw ConfigError("p must be nonnegative");
  if (params.beta < S(0)) throw ConfigError("beta must be nonnegative");
  if (!(params.nu(0) == S(0))) throw ConfigError("nu must put no mass at 0");
  if (params.q < S(0)) throw ConfigError("q must be nonnegative");
}

// phi(s) = beta (1 - nu*[s]) + q.
template <class S>
Vec<S> phi_coefficients(const S& beta, const ProbMeasure<S>& nu, const S& q) {
  Vec<S> c = Vec<S>::Zero(std::max(1, nu.max_support()) + 1);
  c[0] = beta + q;
  for (int j = 1; j <= nu.max_support(); ++j) c[j] = -beta * nu(j);
  return c;
}

template <class S>
S phi_eval(const MbiParams<S>& params, const S& s) {
  return poly_eval(phi_coefficients(params.beta, params.nu, params.q), s);
}

enum class MbiClass { Transient, Recurrent, Mbp };

inline const char* to_string(MbiClass c) {
  switch (c) {
    case MbiClass::Transient: return "Transient";
    case MbiClass::Recurrent: return "Recurrent";
    default: return "MBP";
  }
}

struct IntegralValue {
  double value = 0.0;
  long long terms = 0;
  double tail_estimate = 0.0;
  bool converged = false;
};

struct ClassificationDiag {
  bool by_heuristic = false;  // beta > 0, q = 0 boundary decided by series probe
  bool overridden = false;
  IntegralValue probe;
};

struct MbiBuildOptions {
  std::optional<MbiClass> class_override;
  double class_tol = 1e-12;
  long long class_term_cap = 1000000;
};

template <class S>
struct MbiTables {
  MbiParams<S> params;
  Vec<S> psi_coeffs, phi_coeffs;
  S m;
  S s0;
  S psi_prime_s0;
  bool s0_exact = true;
  Vec<S> dw;        // Delta W
  Vec<S> w;         // running sums of Delta W
  Vec<S> w_prefix;  // prefix sums of W (for the MBP passage-up formula)
  Vec<S> kappa;     // beta (Delta W * nu-bar) + q W
  Vec<S> pi;        // stationary-measure coefficients, pi(0) = 1
  Vec<S> varpi;     // reciprocal GF coefficients, varpi(0) = 1
  Vec<S> w_varpi;   // W * varpi
  MbiClass cls = MbiClass::Transient;
  ClassificationDiag class_diag;

  int horizon() const { return static_cast<int>(w.size()) - 1; }
  S w_at(int k) const { return k < 0 ? S(0) : w[k]; }
  S w_sum(int k) const { return k < 0 ? S(0) : w_prefix[k]; }
};

namespace detail {

// Streaming evaluation of the scaled series
//   I(x) = sum_l (W * varpi)(l) s0^{x+l+1} / (x+l+1)
// using the coefficient recurrences implied by psi varpi*' = -phi varpi*
// and psi (W varpi)* = varpi*. Working with u(l) s0^l keeps everything
// bounded, so the stream never overflows even when W itself would.
inline IntegralValue integral_series(const Vec<double>& psi, const Vec<double>& phi, double s0,
                                     long long x, double tol, long long cap) {
  const int dp = static_cast<int>(psi.size()) - 1;
  const int df = static_cast<int>(phi.size()) - 1;
  Vec<double> psi_s(dp + 1), phi_s(df + 1);
  for (int k = 0; k <= dp; ++k) psi_s[k] = psi[k] * std::pow(s0, k);
  for (int k = 0; k <= df; ++k) phi_s[k] = phi[k] * std::pow(s0, k);

  std::vector<double> vp{1.0}, u;
  u.push_back(1.0 / psi_s[0]);
  const double head = std::pow(s0, static_cast<double>(x + 1));

  IntegralValue out;
  double sum = u[0] * head / static_cast<double>(x + 1);
  int quiet = 0;
  long long l = 0;
  double recent = std::abs(sum);
  while (l < cap) {
    // varpi(l+1) s0^{l+1}
    double acc = 0.0;
    for (int k = 0; k <= std::min<long long>(df, l); ++k) acc -= phi_s[k] * s0 * vp[l - k];
    for (int k = 1; k <= std::min<long long>(dp, l); ++k)
      acc -= psi_s[k] * static_cast<double>(l - k + 1) * vp[l - k + 1];
    vp.push_back(acc / (psi_s[0] * static_cast<double>(l + 1)));
    // u(l+1) s0^{l+1}
    double uacc = vp[l + 1];
    for (int k = 1; k <= std::min<long long>(dp, l + 1); ++k)
      uacc -= psi_s[k] * u[l + 1 - k];
    u.push_back(uacc / psi_s[0]);
    ++l;
    const double term = u[l] * head / static_cast<double>(x + l + 1);
    sum += term;
    recent = std::abs(term);
    if (std::abs(term) <= tol * std::max(std::abs(sum), 1e-300)) {
      if (++quiet >= 10) {
        out.converged = true;
        break;
      }
    } else {
      quiet = 0;
    }
  }
  out.value = sum;
  out.terms = l + 1;
  out.tail_estimate = recent;
  return out;
}

template <class S>
Vec<double> to_double_vec(const Vec<S>& v) {
  Vec<double> out(v.size());
  for (int k = 0; k < v.size(); ++k) out[k] = to_double(v[k]);
  return out;
}

// Extends all Lemma-5.1-style sequences to index `upto`, continuing from
// whatever is already stored.
template <class S>
void run_mbi_recursions(MbiTables<S>& t, int upto) {
  const auto& params = t.params;
  const S inv_amu = S(1) / (params.alpha * params.mu(0));
  const S inv_mu = S(1) / params.mu(0);
  const S p_over_alpha = params.p / params.alpha;
  const int mu_top = params.mu.max_support();
  const int nu_top = params.nu.max_support();
  const Vec<S> mu_bar = tail(params.mu, mu_top);
  const Vec<S> nu_bar = tail(params.nu, std::max(nu_top, 0));
  const int dp = static_cast<int>(t.psi_coeffs.size()) - 1;
  const int df = static_cast<int>(t.phi_coeffs.size()) - 1;
  const S psi0 = t.psi_coeffs[0];

  int from = static_cast<int>(t.w.size());
  t.dw.conservativeResize(upto + 1);
  t.w.conservativeResize(upto + 1);
  t.w_prefix.conservativeResize(upto + 1);
  t.kappa.conservativeResize(upto + 1);
  t.pi.conservativeResize(upto + 1);
  t.varpi.conservativeResize(upto + 1);
  t.w_varpi.conservativeResize(upto + 1);

  for (int k = from; k <= upto; ++k) {
    if (k == 0) {
      t.dw[0] = inv_amu;
      t.w[0] = inv_amu;
      t.w_prefix[0] = inv_amu;
      t.pi[0] = S(1);
      t.varpi[0] = S(1);
    } else {
      S acc(0);
      for (int i = 1; i <= std::min(mu_top - 1, k); ++i) acc += mu_bar[i] * t.dw[k - i];
      acc += p_over_alpha * t.w[k - 1];
      t.dw[k] = inv_mu * acc;
      t.w[k] = t.w[k - 1] + t.dw[k];
      t.w_prefix[k] = t.w_prefix[k - 1] + t.w[k];

      const int l = k - 1;
      S pacc(0), vacc(0);
      for (int j = 0; j <= std::min(df, l); ++j) {
        pacc += t.phi_coeffs[j] * t.pi[l - j];
        vacc -= t.phi_coeffs[j] * t.varpi[l - j];
      }
      for (int j = 1; j <= std::min(dp, l); ++j) {
        const S w = t.psi_coeffs[j] * S(l - j + 1);
        pacc -= w * t.pi[l - j + 1];
        vacc -= w * t.varpi[l - j + 1];
      }
      t.pi[k] = pacc / (psi0 * S(k));
      t.varpi[k] = vacc / (psi0 * S(k));
    }
    // kappa(k) = beta (Delta W * nu-bar)(k) + q W(k)
    S kacc(0);
    if (params.beta > S(0))
      for (int i = 0; i <= std::min(nu_top - 1, k); ++i) kacc += nu_bar[i] * t.dw[k - i];
    t.kappa[k] = params.beta * kacc + params.q * t.w[k];
    // (W * varpi)(k) through psi (W varpi)* = varpi*
    S uacc = t.varpi[k];
    for (int j = 1; j <= std::min(dp, k); ++j) uacc -= t.psi_coeffs[j] * t.w_varpi[k - j];
    t.w_varpi[k] = uacc / psi0;

    if constexpr (!is_rational_v<S>) {
      if (!std::isfinite(t.w[k]) || !std::isfinite(t.pi[k]) || !std::isfinite(t.varpi[k]))
        throw Overflow("branching tables overflowed at index " + std::to_string(k) +
                       "; reduce the horizon or use rational mode");
    }
  }
}

}  // namespace detail

template <class S>
MbiTables<S> build_tables(const MbiParams<S>& params, int K, const MbiBuildOptions& opt = {}) {
  validate_params(params);
  if (K < 0) throw ConfigError("horizon must be nonnegative");
  MbiTables<S> t;
  t.params = params;
  t.psi_coeffs = psi_coefficients(params.alpha, params.mu, params.p);
  t.phi_coeffs = phi_coefficients(params.beta, params.nu, params.q);
  t.m = params.mu.mean();
  const auto root = find_s0(params.alpha, params.mu, params.p);
  t.s0 = root.s0;
  t.psi_prime_s0 = root.psi_prime_s0;
  t.s0_exact = root.exact;
  detail::run_mbi_recursions(t, K);

  if (opt.class_override) {
    t.cls = *opt.class_override;
    t.class_diag.overridden = true;
  } else if (params.beta == S(0) && params.q == S(0)) {
    t.cls = MbiClass::Mbp;
  } else if (params.q > S(0)) {
    t.cls = MbiClass::Transient;
  } else {
    // beta > 0, q = 0: no closed classification; probe the resolvent mass
    // series at 0 and read divergence as recurrence.
    t.class_diag.by_heuristic = true;
    t.class_diag.probe = detail::integral_series(
        detail::to_double_vec(t.psi_coeffs), detail::to_double_vec(t.phi_coeffs),
        to_double(t.s0), 0, opt.class_tol, opt.class_term_cap);
    t.cls = t.class_diag.probe.converged ? MbiClass::Transient : MbiClass::Recurrent;
  }
  return t;
}

template <class S>
MbiTables<S> extend_tables(const MbiTables<S>& t, int K) {
  if (K <= t.horizon()) return t;
  MbiTables<S> out = t;
  detail::run_mbi_recursions(out, K);
  return out;
}

namespace detail {

template <class S>
const MbiTables<S>& with_horizon(const MbiTables<S>& t, int k, std::optional<MbiTables<S>>& local) {
  if (k <= t.horizon()) return t;
  local = extend_tables(t, 2 * k + 64);
  return *local;
}

template <class S>
void require_exact_s0(const MbiTables<S>& t) {
  if constexpr (is_rational_v<S>) {
    if (!t.s0_exact)
      throw NeedsFloatMode("s0 is not exactly representable for these parameters");
  }
}

}  // namespace detail

// ScriptH(y, x) = sum_{l=0}^{y-x-1} pi(y-x-1-l) (W * varpi)(l) / (l+x+1);
// zero when y <= x.
template <class S>
S script_h(const MbiTables<S>& t, long long x, long long y) {
  if (x < 0 || y < 0) throw ConfigError("script_h needs nonnegative states");
  if (y <= x) return S(0);
  std::optional<MbiTables<S>> local;
  const auto& tt = detail::with_horizon(t, static_cast<int>(y - x - 1), local);
  S acc(0);
  for (long long l = 0; l <= y - x - 1; ++l)
    acc += tt.pi[y - x - 1 - l] * tt.w_varpi[l] / S(l + x + 1);
  return acc;
}

// Memoizing wrapper for query-heavy callers.
template <class S>
struct ScriptH {
  MbiTables<S> tables;
  std::map<std::pair<long long, long long>, S> cache;

  const S& operator()(long long x, long long y) {
    auto it = cache.find({x, y});
    if (it == cache.end()) {
      if (y - x - 1 > tables.horizon()) tables = extend_tables(tables, 2 * static_cast<int>(y) + 64);
      it = cache.emplace(std::pair{x, y}, script_h(tables, x, y)).first;
    }
    return it->second;
  }
};

// I(x) = int_0^{s0} v^x / psi(v) exp(-int_0^v phi/psi) dv, evaluated as the
// coefficient series; defined (finite) exactly on the transient class.
inline IntegralValue integral_i(const MbiTables<double>& t, long long x, double tol = 1e-12,
                                long long cap = 1000000) {
  if (t.cls != MbiClass::Transient)
    throw RecurrentChain("integral I(x) is infinite unless all states are transient");
  IntegralValue v = detail::integral_series(t.psi_coeffs, t.phi_coeffs, t.s0, x, tol, cap);
  if (!v.converged)
    throw NonConvergent("integral series hit the term cap; near-critical or recurrent input");
  return v;
}

// Quadrature cross-check of I(x), fully independent of the series route.
// The exponent integrand phi/psi has a simple pole at s0 with residue
// -theta, theta = phi(s0)/|psi'(s0)|; subtracting it leaves a smooth
// remainder, and the outer endpoint behaviour (s0 - v)^{theta-1} is
// integrated in closed form over the last sliver.
inline double integral_i_quadrature(const MbiTables<double>& t, long long x, double tol = 1e-10) {
  const double s0 = t.s0;
  const auto psi = [&](double v) { return poly_eval(t.psi_coeffs, v); };
  const auto phi = [&](double v) { return poly_eval(t.phi_coeffs, v); };
  const double dpsi_s0 = poly_eval(poly_derivative(t.psi_coeffs), s0);
  if (!(dpsi_s0 < -1e-8))
    throw ModelError("quadrature cross-check needs a noncritical branching mechanism");
  const double theta = phi(s0) / -dpsi_s0;
  // phi/psi - theta/(s0-u) = -R(u)/psitilde(u) with N = phi (s0-u) - theta psi
  // vanishing to second order at s0; deflating keeps the remainder smooth.
  Vec<double> bign = Vec<double>::Zero(std::max(t.phi_coeffs.size() + 1, t.psi_coeffs.size()));
  for (int k = 0; k < bign.size(); ++k) {
    double v = 0.0;
    if (k < t.phi_coeffs.size()) v += s0 * t.phi_coeffs[k];
    if (k >= 1 && k - 1 < t.phi_coeffs.size()) v -= t.phi_coeffs[k - 1];
    if (k < t.psi_coeffs.size()) v -= theta * t.psi_coeffs[k];
    bign[k] = v;
  }
  const Vec<double> r_poly = poly_deflate(poly_deflate(bign, s0), s0);
  const Vec<double> psi_tilde = poly_deflate(t.psi_coeffs, s0);
  const auto remainder = [&](double u) { return -poly_eval(r_poly, u) / poly_eval(psi_tilde, u); };
  const auto inner_exponent = [&](double v) {
    return integrate(remainder, 0.0, v, 1e-12) + theta * std::log(s0 / (s0 - v));
  };
  const auto integrand = [&](double v) {
    return std::pow(v, static_cast<double>(x)) / psi(v) * std::exp(-inner_exponent(v));
  };
  const double delta = 1e-5 * s0;
  const double cut = s0 - delta;
  const double body = integrate(integrand, 0.0, cut, tol);
  // local model f(v) ~ C (s0 - v)^{theta - 1} on [cut, s0]
  const double correction = integrand(cut) * delta / std::max(theta, 1e-12);
  return body + correction;
}

// Theorem 5.4(1). Transient: G(x,y) = pi(y) I(x) - ScriptH(y,x). MBP:
// G(x,y) = (s0^x W(y-1) - W(y-x-1)) / y for y >= 1.
template <class S>
S resolvent_g(const MbiTables<S>& t, long long x, long long y) {
  if (t.cls == MbiClass::Recurrent)
    throw RecurrentChain("resolvent undefined: all states are recurrent");
  if (t.cls == MbiClass::Mbp) {
    if (y == 0) throw MbpAtZero("G(x,0) is infinite for a branching process without immigration");
    detail::require_exact_s0(t);
    std::optional<MbiTables<S>> local;
    const auto& tt = detail::with_horizon(t, static_cast<int>(y - 1), local);
    return (pow_int(tt.s0, x) * tt.w_at(static_cast<int>(y - 1)) -
            tt.w_at(static_cast<int>(y - x - 1))) / S(y);
  }
  if constexpr (is_rational_v<S>) {
    throw NeedsFloatMode("the transient resolvent integral has no exact rational value");
  } else {
    std::optional<MbiTables<S>> local;
    const auto& tt = detail::with_horizon(t, static_cast<int>(std::max(y, x + 1)), local);
    return tt.pi[y] * integral_i(tt, x).value - script_h(tt, x, y);
  }
}

// Theorem 5.4(2), all three classes.
template <class S>
S hit_prob(const MbiTables<S>& t, long long x, long long y) {
  if (t.cls == MbiClass::Recurrent) return S(1);
  if (t.cls == MbiClass::Mbp) {
    detail::require_exact_s0(t);
    if (y == 0) return pow_int(t.s0, x);
    std::optional<MbiTables<S>> local;
    const auto& tt = detail::with_horizon(t, static_cast<int>(y - 1), local);
    return (pow_int(tt.s0, x) * tt.w_at(static_cast<int>(y - 1)) -
            tt.w_at(static_cast<int>(y - x - 1))) /
           (pow_int(tt.s0, y) * tt.w_at(static_cast<int>(y - 1)));
  }
  if constexpr (is_rational_v<S>) {
    throw NeedsFloatMode("the transient hitting probability has no exact rational value");
  } else {
    std::optional<MbiTables<S>> local;
    const auto& tt = detail::with_horizon(t, static_cast<int>(std::max(x, y) + 1), local);
    const double ix = integral_i(tt, x).value;
    const double iy = integral_i(tt, y).value;
    if (x >= y) return ix / iy;
    return (tt.pi[y] * ix - script_h(tt, x, y)) / (tt.pi[y] * iy);
  }
}

// Theorem 5.4(3): P_x(T_a < T_{[b} ^ zeta) = ScriptH(b,x)/ScriptH(b,a),
// valid in any class.
template <class S>
S two_sided_exit(const MbiTables<S>& t, long long x, long long a, long long b) {
  if (!(0 <= a && a <= x && x <= b - 1)) throw ConfigError("two_sided_exit requires 0 <= a <= x <= b-1");
  std::optional<MbiTables<S>> local;
  const auto& tt = detail::with_horizon(t, static_cast<int>(b), local);
  return script_h(tt, x, b) / script_h(tt, a, b);
}

// Theorem 5.4(3) second display.
template <class S>
S exit_interval_prob(const MbiTables<S>& t, long long x, long long a, long long b) {
  if (!(0 <= a && a <= x && x <= b - 1)) throw ConfigError("exit_interval requires 0 <= a <= x <= b-1");
  std::optional<MbiTables<S>> local;
  const auto& tt = detail::with_horizon(t, static_cast<int>(b), local);
  const S ratio = script_h(tt, x, b) / script_h(tt, a, b);
  S acc(1);
  for (long long z = a + 1; z <= b - 1; ++z) {
    const S rate = tt.params.p * S(z) + tt.params.q;
    if (!(rate == S(0)))
      acc -= rate * (ratio * script_h(tt, a, z) - script_h(tt, x, z));
  }
  return acc;
}

// Theorem 5.4(3) third display, with the separate MBP branch.
template <class S>
S passage_up_prob(const MbiTables<S>& t, long long x, long long b) {
  if (!(0 <= x && x <= b - 1)) throw ConfigError("passage_up requires 0 <= x <= b-1");
  std::optional<MbiTables<S>> local;
  const auto& tt = detail::with_horizon(t, static_cast<int>(b), local);
  if (tt.params.beta == S(0) && tt.params.q == S(0)) {
    const S ratio = tt.w_at(static_cast<int>(b - x - 1)) / tt.w_at(static_cast<int>(b - 1));
    return S(1) + tt.params.p * tt.w_sum(static_cast<int>(b - x - 2)) -
           ratio * (S(1) + tt.params.p * tt.w_sum(static_cast<int>(b - 2)));
  }
  const S hb_x = script_h(tt, x, b);
  S acc(1);
  for (long long z = 0; z <= b - 1; ++z) {
    const S rate = tt.params.p * S(z) + tt.params.q;
    if (!(rate == S(0)))
      acc -= rate * (tt.pi[z] / tt.pi[b] * hb_x - script_h(tt, x, z));
  }
  return acc;
}

// Lambda(s) = int_0^s 1/psi, the additive time scale of the branching flow.
inline double lambda_scale(const MbiTables<double>& t, double s) {
  if (!(s >= 0.0 && s < t.s0)) throw ConfigError("lambda_scale needs s in [0, s0)");
  return integrate([&](double u) { return 1.0 / poly_eval(t.psi_coeffs, u); }, 0.0, s, 1e-13);
}

// Psi_t(s) = Lambda^{-1}(t + Lambda(s)): monotone bracketing toward s0, then
// bisection to 1e-12.
inline double flow_psi(const MbiTables<double>& t, double time, double s) {
  if (time < 0.0) throw ConfigError("flow_psi needs t >= 0");
  const double target = time + lambda_scale(t, s);
  double lo = s, hi = s;
  double gap = (t.s0 - s) * 0.5;
  while (lambda_scale(t, std::min(t.s0 - 1e-15, hi + gap)) < target) {
    hi = std::min(t.s0 - 1e-15, hi + gap);
    gap = (t.s0 - hi) * 0.5;
    if (gap < 1e-15) break;
  }
  hi = std::min(t.s0 - 1e-15, hi + gap);
  for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (lambda_scale(t, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

// Truncated series with a geometric tail certificate estimated from the last
// coefficient ratios. Fails (nullopt) when the stored horizon cannot certify
// the tolerance at this argument.
inline std::optional<double> series_eval_certified(const Vec<double>& coeffs, double v, double tol) {
  const int h = static_cast<int>(coeffs.size()) - 1;
  double sum = 0.0, power = 1.0;
  for (int l = 0; l <= h; ++l) {
    sum += coeffs[l] * power;
    power *= v;
  }
  double ratio = 0.0;
  for (int l = std::max(1, h - 8); l <= h; ++l)
    if (coeffs[l - 1] != 0.0) ratio = std::max(ratio, std::abs(coeffs[l] / coeffs[l - 1]) * v);
  if (ratio >= 0.999) return std::nullopt;
  const double last = std::abs(coeffs[h]) * power / std::max(v, 1e-300);
  const double tail = last * ratio / (1.0 - ratio);
  if (tail > tol * std::max(1.0, std::abs(sum))) return std::nullopt;
  return sum;
}

// Evaluates f against tables extended (locally, immutably) until the tail
// certificates hold, doubling the horizon a few times before giving up.
template <class F>
double with_certified_series(const MbiTables<double>& t, const F& f) {
  std::optional<MbiTables<double>> local;
  const MbiTables<double>* cur = &t;
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (auto value = f(*cur)) return *value;
    local = extend_tables(*cur, 2 * cur->horizon() + 64);
    cur = &*local;
  }
  throw SeriesTruncation("series horizon cannot certify this argument; s is too close to s0");
}

}  // namespace detail

// Lemma 5.2: E_x[s^{X_t}; t < zeta] = Psi_t(s)^x Phi_t(s) with
// Phi_t(s) = pi*[s] varpi*[Psi_t(s)].
inline double transient_gf(const MbiTables<double>& t, long long x, double time, double s,
                           double tail_tol = 1e-12) {
  if (!(s >= 0.0 && s < t.s0)) throw ConfigError("transient_gf needs s in [0, s0)");
  const double psi_t = flow_psi(t, time, s);
  return detail::with_certified_series(t, [&](const MbiTables<double>& tt) -> std::optional<double> {
    const auto pi_s = detail::series_eval_certified(tt.pi, s, tail_tol);
    const auto vp_psi = detail::series_eval_certified(tt.varpi, psi_t, tail_tol);
    if (!pi_s || !vp_psi) return std::nullopt;
    return std::pow(psi_t, static_cast<double>(x)) * *pi_s * *vp_psi;
  });
}

// Lemma 5.3 residual: max relative deviation of pi*[Psi_t(s)] Phi_t(s) from
// pi*[s] over the supplied grid.
inline double stationarity_residual(const MbiTables<double>& t, const std::vector<double>& times,
                                    const std::vector<double>& ss, double tail_tol = 1e-12) {
  if (t.cls == MbiClass::Mbp)
    throw ModelError("stationarity check rejected: pi is degenerate for an MBP");
  double worst = 0.0;
  for (const double s : ss) {
    for (const double time : times) {
      const double psi_t = flow_psi(t, time, s);
      const double dev = detail::with_certified_series(
          t, [&](const MbiTables<double>& tt) -> std::optional<double> {
            const auto pi_s = detail::series_eval_certified(tt.pi, s, tail_tol);
            const auto pi_flow = detail::series_eval_certified(tt.pi, psi_t, tail_tol);
            const auto vp_flow = detail::series_eval_certified(tt.varpi, psi_t, tail_tol);
            if (!pi_s || !pi_flow || !vp_flow) return std::nullopt;
            const double lhs = *pi_flow * *pi_s * *vp_flow;
            return std::abs(lhs - *pi_s) / std::max(1.0, std::abs(*pi_s));
          });
      worst = std::max(worst, dev);
    }
  }
  return worst;
}

// Example 5.6: beta = alpha m, nu(j) = (j+1) mu(j+1) / m, q = p - alpha(m-1),
// valid when 0 < m <= 1 + p/alpha; then phi = -psi'.
template <class S>
MbiParams<S> example_family(const S& alpha, const ProbMeasure<S>& mu, const S& p) {
  const S m = mu.mean();
  if (!(m > S(0))) throw InvalidFamily("family needs m > 0");
  if (m * alpha > alpha + p) throw InvalidFamily("family needs m <= 1 + p/alpha");
  std::map<int, S> nu;
  for (int j = 1; j < mu.max_support(); ++j)
    if (mu(j + 1) > S(0)) nu[j] = S(j + 1) * mu(j + 1) / m;
  return MbiParams<S>{alpha, mu, p, alpha * m, make_measure(nu), p - alpha * (m - S(1))};
}

}  // namespace skipfree
