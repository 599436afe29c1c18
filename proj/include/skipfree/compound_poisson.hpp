#pragma once

#include <cmath>
#include <optional>

#include "skipfree/psi.hpp"

namespace skipfree {

// Skip-free downward compound Poisson process killed at a constant rate:
// jumps arrive at rate alpha, a jump of law mu(j) moves the state by j - 1,
// and the path is sent to the cemetery at rate p.
template <class S>
struct CppParams {
  S alpha;
  ProbMeasure<S> mu;
  S p;
};

template <class S>
void validate_params(const CppParams<S>& params) {
  if (!(params.alpha > S(0))) throw ConfigError("alpha must be positive");
  if (!(params.mu(0) > S(0))) throw ConfigError("mu(0) must be positive");
  if (!(params.mu(1) == S(0))) throw ConfigError("mu(1) must be zero");
  if (params.p < S(0)) throw ConfigError("p must be nonnegative");
}

enum class CppRegime { TransientKilled, TransientDrift, RecurrentCritical };

inline const char* to_string(CppRegime r) {
  switch (r) {
    case CppRegime::TransientKilled: return "Transient-p>0";
    case CppRegime::TransientDrift: return "Transient-m!=1";
    default: return "Recurrent-critical";
  }
}

template <class S>
struct CppTables {
  CppParams<S> params;
  Vec<S> psi_coeffs;
  S m;
  S s0;
  S psi_prime_s0;
  bool s0_exact;
  Vec<S> w;         // scale sequence W(0..K)
  Vec<S> w_prefix;  // w_prefix[k] = W(0) + ... + W(k)
  CppRegime regime;

  int horizon() const { return static_cast<int>(w.size()) - 1; }
  S w_at(int k) const { return k < 0 ? S(0) : w[k]; }
  S w_sum(int k) const { return k < 0 ? S(0) : w_prefix[k]; }
};

namespace detail {

// Continues the scale recursion
//   W(x+1) = 1/(alpha mu(0)) + (1/mu(0)) sum_j W(j) (mu-bar(x-j+1) + p/alpha)
// from index `from` to `upto`. The tail factor vanishes past the support of
// mu, and the p/alpha part telescopes through the running prefix sum, so each
// step costs O(support).
template <class S>
void run_w_recursion(const CppParams<S>& params, Vec<S>& w, Vec<S>& w_prefix, int from, int upto) {
  const S inv_amu = S(1) / (params.alpha * params.mu(0));
  const S inv_mu = S(1) / params.mu(0);
  const S p_over_alpha = params.p / params.alpha;
  const int top = params.mu.max_support();
  const Vec<S> mu_bar = tail(params.mu, top);
  w.conservativeResize(upto + 1);
  w_prefix.conservativeResize(upto + 1);
  if (from == 0) {
    w[0] = inv_amu;
    w_prefix[0] = w[0];
    from = 1;
  }
  for (int x = from - 1; x + 1 <= upto; ++x) {
    S acc(0);
    for (int k = 1; k <= std::min(top - 1, x + 1); ++k) acc += w[x + 1 - k] * mu_bar[k];
    acc += p_over_alpha * w_prefix[x];
    w[x + 1] = inv_amu + inv_mu * acc;
    if constexpr (!is_rational_v<S>) {
      if (!std::isfinite(w[x + 1]))
        throw Overflow("scale sequence overflowed at index " + std::to_string(x + 1) +
                       "; reduce the horizon or use rational mode");
    }
    w_prefix[x + 1] = w_prefix[x] + w[x + 1];
  }
}

}  // namespace detail

template <class S>
CppTables<S> build_tables(const CppParams<S>& params, int K) {
  validate_params(params);
  if (K < 0) throw ConfigError("horizon must be nonnegative");
  CppTables<S> t;
  t.params = params;
  t.psi_coeffs = psi_coefficients(params.alpha, params.mu, params.p);
  t.m = params.mu.mean();
  const auto root = find_s0(params.alpha, params.mu, params.p);
  t.s0 = root.s0;
  t.psi_prime_s0 = root.psi_prime_s0;
  t.s0_exact = root.exact;
  if (params.p > S(0))
    t.regime = CppRegime::TransientKilled;
  else if (!(t.m == S(1)))
    t.regime = CppRegime::TransientDrift;
  else
    t.regime = CppRegime::RecurrentCritical;
  detail::run_w_recursion(params, t.w, t.w_prefix, 0, K);
  return t;
}

template <class S>
CppTables<S> extend_tables(const CppTables<S>& t, int K) {
  if (K <= t.horizon()) return t;
  CppTables<S> out = t;
  detail::run_w_recursion(out.params, out.w, out.w_prefix, t.horizon() + 1, K);
  return out;
}

template <class S>
S psi_eval(const CppParams<S>& params, const S& s) {
  return poly_eval(psi_coefficients(params.alpha, params.mu, params.p), s);
}

template <class S>
S psi_eval(const CppTables<S>& t, const S& s) {
  return poly_eval(t.psi_coeffs, s);
}

namespace detail {

template <class S>
const CppTables<S>& with_horizon(const CppTables<S>& t, int k, std::optional<CppTables<S>>& local) {
  if (k <= t.horizon()) return t;
  local = extend_tables(t, std::max(k, 2 * t.horizon()));
  return *local;
}

template <class S>
void require_exact_s0(const CppTables<S>& t) {
  if constexpr (is_rational_v<S>) {
    if (!t.s0_exact)
      throw NeedsFloatMode("s0 is not exactly representable for these parameters");
  }
}

}  // namespace detail

// G(x,y) = -s0^{x-y} / psi'(s0) - W(y-x-1), valid when all states are
// transient (p > 0 or m != 1).
template <class S>
S resolvent_g(const CppTables<S>& t, long long x, long long y) {
  if (t.regime == CppRegime::RecurrentCritical)
    throw RecurrentChain("resolvent undefined: p = 0 and m = 1");
  detail::require_exact_s0(t);
  std::optional<CppTables<S>> local;
  const auto& tt = detail::with_horizon(t, static_cast<int>(y - x - 1), local);
  return -pow_int(tt.s0, x - y) / tt.psi_prime_s0 - tt.w_at(static_cast<int>(y - x - 1));
}

// P_x(T_y < zeta) = s0^{x-y} + psi'(s0) W(y-x-1), all regimes.
template <class S>
S hit_prob(const CppTables<S>& t, long long x, long long y) {
  detail::require_exact_s0(t);
  std::optional<CppTables<S>> local;
  const auto& tt = detail::with_horizon(t, static_cast<int>(y - x - 1), local);
  return pow_int(tt.s0, x - y) + tt.psi_prime_s0 * tt.w_at(static_cast<int>(y - x - 1));
}

// P_x(T_a < T_{[b} ^ zeta) = W(b-x-1) / W(b-a-1) for a <= x <= b-1.
template <class S>
S two_sided_exit_down(const CppTables<S>& t, long long x, long long a, long long b) {
  if (!(a <= x && x <= b - 1)) throw ConfigError("two_sided_exit requires a <= x <= b-1");
  std::optional<CppTables<S>> local;
  const auto& tt = detail::with_horizon(t, static_cast<int>(b - a - 1), local);
  return tt.w_at(static_cast<int>(b - x - 1)) / tt.w_at(static_cast<int>(b - a - 1));
}

// P_x(T_{(a,b)^c} < zeta); equals 1 when p = 0.
template <class S>
S exit_interval_prob(const CppTables<S>& t, long long x, long long a, long long b) {
  if (!(a <= x && x <= b - 1)) throw ConfigError("exit_interval requires a <= x <= b-1");
  std::optional<CppTables<S>> local;
  const auto& tt = detail::with_horizon(t, static_cast<int>(b - a - 1), local);
  const S ratio = tt.w_at(static_cast<int>(b - x - 1)) / tt.w_at(static_cast<int>(b - a - 1));
  return S(1) + tt.params.p * tt.w_sum(static_cast<int>(b - x - 2)) -
         ratio * tt.params.p * tt.w_sum(static_cast<int>(b - a - 2));
}

// P_x(T_{[b} < zeta); two branches depending on whether W diverges.
template <class S>
S passage_up_prob(const CppTables<S>& t, long long x, long long b) {
  if (x >= b) return S(1);
  std::optional<CppTables<S>> local;
  const auto& tt = detail::with_horizon(t, static_cast<int>(b - x - 1), local);
  if (tt.params.p > S(0)) {
    detail::require_exact_s0(tt);
    return S(1) + tt.params.p * tt.w_sum(static_cast<int>(b - x - 2)) -
           tt.params.p * tt.s0 / (S(1) - tt.s0) * tt.w_at(static_cast<int>(b - x - 1));
  }
  if (tt.m > S(1)) return S(1);  // upward drift, no killing
  // p = 0 and m <= 1: s0 = 1 and the W-limit is -1/psi'(1)
  return S(1) + tt.psi_prime_s0 * tt.w_at(static_cast<int>(b - x - 1));
}

}  // namespace skipfree
