#pragma once

#include "skipfree/branching.hpp"
#include "skipfree/chain.hpp"
#include "skipfree/compound_poisson.hpp"

namespace skipfree {

// Boundary-value oracles: each probability is recomputed as the solution of
// the harmonicity system sum_y Q(x,y) h(y) = 0 with the appropriate boundary
// data, independent of the resolvent/H-function route.

// P_x(T_target < zeta): h(target) = 1, (Q h)(x) = 0 elsewhere.
template <class S>
S solve_hit_bv(const SkipFreeChain<S>& c, int x, int target) {
  const int n = c.size();
  Mat<S> A = Mat<S>::Zero(n, n);
  Vec<S> rhs = Vec<S>::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (c.lo + i == target) {
      A(i, i) = S(1);
      rhs[i] = S(1);
    } else {
      for (int j = 0; j < n; ++j) A(i, j) = c.rates(i, j);
    }
  }
  Eigen::FullPivLU<Mat<S>> lu(A);
  if constexpr (is_rational_v<S>) lu.setThreshold(S(0));
  if (!lu.isInvertible()) throw SingularGenerator("boundary-value system is singular");
  Vec<S> h = lu.solve(rhs);
  if constexpr (!is_rational_v<S>) h += lu.solve(rhs - A * h);  // iterative refinement
  return h[c.idx(x)];
}

// P_x(T_a < T_{[b} ^ zeta): h(a) = 1, h = 0 on [b, harmonic inside.
template <class S>
S solve_two_sided_bv(const SkipFreeChain<S>& c, int x, int a, int b) {
  if (x <= a) return S(1);
  if (x >= b) return S(0);
  const int n = b - a - 1;  // interior states a+1 .. b-1
  Mat<S> A = Mat<S>::Zero(n, n);
  Vec<S> rhs = Vec<S>::Zero(n);
  for (int i = 0; i < n; ++i) {
    const int z = a + 1 + i;
    for (int y = c.lo; y <= c.hi; ++y) {
      const S rate = c.rates(c.idx(z), c.idx(y));
      if (rate == S(0)) continue;
      if (y > a && y < b)
        A(i, y - a - 1) = rate;
      else if (y == a)
        rhs[i] -= rate;  // h(a) = 1
      // y >= b contributes h = 0
    }
  }
  Eigen::FullPivLU<Mat<S>> lu(A);
  if constexpr (is_rational_v<S>) lu.setThreshold(S(0));
  if (!lu.isInvertible()) throw SingularGenerator("boundary-value system is singular");
  Vec<S> h = lu.solve(rhs);
  if constexpr (!is_rational_v<S>) h += lu.solve(rhs - A * h);  // iterative refinement
  return h[x - a - 1];
}

// P_x(T_{(a,b)^c} < zeta): h = 1 outside (a,b), harmonic inside.
template <class S>
S solve_exit_interval_bv(const SkipFreeChain<S>& c, int x, int a, int b) {
  if (x <= a || x >= b) return S(1);
  const int n = b - a - 1;
  Mat<S> A = Mat<S>::Zero(n, n);
  Vec<S> rhs = Vec<S>::Zero(n);
  for (int i = 0; i < n; ++i) {
    const int z = a + 1 + i;
    for (int y = c.lo; y <= c.hi; ++y) {
      const S rate = c.rates(c.idx(z), c.idx(y));
      if (rate == S(0)) continue;
      if (y > a && y < b)
        A(i, y - a - 1) = rate;
      else
        rhs[i] -= rate;
    }
  }
  Eigen::FullPivLU<Mat<S>> lu(A);
  if constexpr (is_rational_v<S>) lu.setThreshold(S(0));
  if (!lu.isInvertible()) throw SingularGenerator("boundary-value system is singular");
  Vec<S> h = lu.solve(rhs);
  if constexpr (!is_rational_v<S>) h += lu.solve(rhs - A * h);  // iterative refinement
  return h[x - a - 1];
}

// P_x(T_{[b} < zeta): h = 1 on [b, harmonic below.
template <class S>
S solve_passage_up_bv(const SkipFreeChain<S>& c, int x, int b) {
  if (x >= b) return S(1);
  const int n = b - c.lo;  // states lo .. b-1
  Mat<S> A = Mat<S>::Zero(n, n);
  Vec<S> rhs = Vec<S>::Zero(n);
  for (int i = 0; i < n; ++i) {
    const int z = c.lo + i;
    for (int y = c.lo; y <= c.hi; ++y) {
      const S rate = c.rates(c.idx(z), c.idx(y));
      if (rate == S(0)) continue;
      if (y < b)
        A(i, y - c.lo) = rate;
      else
        rhs[i] -= rate;
    }
  }
  Eigen::FullPivLU<Mat<S>> lu(A);
  if constexpr (is_rational_v<S>) lu.setThreshold(S(0));
  if (!lu.isInvertible()) throw SingularGenerator("boundary-value system is singular");
  Vec<S> h = lu.solve(rhs);
  if constexpr (!is_rational_v<S>) h += lu.solve(rhs - A * h);  // iterative refinement
  return h[x - c.lo];
}

// Finite window [a, b] with the model's true rates on the interior, upward
// mass at or beyond b lumped into a cap state, and kill-only rows at both
// ends. Events decided strictly before leaving (a, b) have the same law as
// under the infinite model, so the chain_core identities on this window are
// exact oracles for the closed forms.
template <class S>
SkipFreeChain<S> window_chain(const CppParams<S>& params, int a, int b) {
  const int n = b - a + 1;
  SkipFreeChain<S> c;
  c.lo = a;
  c.hi = b;
  c.rates = Mat<S>::Zero(n, n);
  c.kill = Vec<S>::Zero(n);
  const Vec<S> mu_bar = tail(params.mu, params.mu.max_support());
  for (int z = a + 1; z <= b - 1; ++z) {
    const int i = z - a;
    c.rates(i, i - 1) = params.alpha * params.mu(0);
    for (int y = z + 1; y <= b - 1; ++y) c.rates(i, y - a) = params.alpha * params.mu(y - z + 1);
    if (b - z <= params.mu.max_support() - 1) c.rates(i, n - 1) = params.alpha * mu_bar[b - z];
    c.kill[i] = params.p;
    c.rates(i, i) = -(params.alpha + params.p);
  }
  c.rates(0, 0) = S(-1);
  c.kill[0] = S(1);
  c.rates(n - 1, n - 1) = S(-1);
  c.kill[n - 1] = S(1);
  return c;
}

// With absorb_at_a the bottom row is kill-only (events decided on arrival at
// a); with absorb_at_a = false (allowed only for a = 0) the true immigration
// row is kept, which is what passage-up questions need.
template <class S>
SkipFreeChain<S> window_chain(const MbiParams<S>& params, int a, int b, bool absorb_at_a = true) {
  if (!absorb_at_a && a != 0)
    throw ConfigError("the true bottom row is only available at a = 0");
  const int n = b - a + 1;
  SkipFreeChain<S> c;
  c.lo = a;
  c.hi = b;
  c.rates = Mat<S>::Zero(n, n);
  c.kill = Vec<S>::Zero(n);
  const Vec<S> mu_bar = tail(params.mu, params.mu.max_support());
  const Vec<S> nu_bar = tail(params.nu, params.nu.max_support());
  for (int z = a; z <= b - 1; ++z) {
    const int i = z - a;
    if (z == a && absorb_at_a) continue;
    const S branch_rate = params.alpha * S(z);
    if (z > a) c.rates(i, i - 1) = branch_rate * params.mu(0);
    for (int y = z + 1; y <= b - 1; ++y)
      c.rates(i, y - a) = branch_rate * params.mu(y - z + 1) + params.beta * params.nu(y - z);
    S lump(0);
    if (b - z <= params.mu.max_support() - 1) lump += branch_rate * mu_bar[b - z];
    if (b - z - 1 <= params.nu.max_support() - 1) lump += params.beta * nu_bar[b - z - 1];
    c.rates(i, n - 1) = lump;
    c.kill[i] = params.p * S(z) + params.q;
    c.rates(i, i) = -((params.alpha + params.p) * S(z) + params.beta + params.q);
  }
  if (absorb_at_a) {
    c.rates(0, 0) = S(-1);
    c.kill[0] = S(1);
  }
  c.rates(n - 1, n - 1) = S(-1);
  c.kill[n - 1] = S(1);
  return c;
}

// Truncated resolvent with a certified error bound: on the window [0, N]
// with a true bottom row, occupation before the cap undershoots G(x,y) by at
// most P_x(T_{[N} < zeta) / q, since the constant killing part bounds every
// remaining lifetime by Exp(q). Grows N until the bound meets tol.
inline double mbi_resolvent_truncated(const MbiParams<double>& params, long long x, long long y,
                                      double tol = 1e-10) {
  if (!(params.q > 0.0))
    throw ModelError("certified truncation needs a positive constant killing rate q");
  for (int cap = std::max<int>(2 * static_cast<int>(x + y) + 32, 64); cap <= (1 << 11); cap *= 2) {
    const auto win = window_chain(params, 0, cap, /*absorb_at_a=*/false);
    const double upcross = solve_passage_up_bv(win, static_cast<int>(x), cap);
    if (upcross / params.q < tol) {
      const Mat<double> G = killed_resolvent_raw(win, {cap});
      return G(win.idx(static_cast<int>(x)), win.idx(static_cast<int>(y)));
    }
  }
  throw ModelError("could not certify the truncation at a practical window size");
}

}  // namespace skipfree
