#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "skipfree/scalar.hpp"

namespace skipfree {

// Continuous-time skip-free downward chain on the integer interval [lo, hi],
// described by its generator restricted to E x E plus per-state killing
// rates. The diagonal carries the full exit rate: -rates(x,x) equals the sum
// of the off-diagonal row entries plus kill(x).
template <class S>
struct SkipFreeChain {
  int lo = 0;
  int hi = 0;
  Mat<S> rates;
  Vec<S> kill;

  int size() const { return hi - lo + 1; }
  int idx(int state) const { return state - lo; }
  bool contains(int state) const { return state >= lo && state <= hi; }
  S total_rate(int state) const { return -rates(idx(state), idx(state)); }
};

template <class S>
struct ReferenceData {
  int ref_point = 0;
  Vec<S> pi;
  // max positive entry of pi^T Q; a genuinely excessive measure has none.
  S excess_residual = S(0);

  bool is_excessive(double tol = 1e-10) const {
    return !(excess_residual > check_tol<S>(tol));
  }
};

template <class S>
struct ResolventMatrix {
  Mat<S> raw;      // G(x,y), expected occupation time of y from x
  Mat<S> density;  // g(x,y) = G(x,y) / pi(y)
};

struct ChainDiagnostics {
  bool shape_ok = false;
  bool rates_ok = false;
  bool skip_free_ok = false;
  bool row_sums_ok = false;
  bool transient = false;
  std::vector<std::string> violations;

  bool valid() const {
    return shape_ok && rates_ok && skip_free_ok && row_sums_ok && transient;
  }
};

// Mixed absolute/relative deviation: relative once the magnitudes exceed 1.
template <class S>
S rel_dev(const S& a, const S& b) {
  const S d = scalar_abs<S>(a - b);
  const S scale = std::max({S(1), scalar_abs<S>(a), scalar_abs<S>(b)});
  return d / scale;
}

// Inverse of -(generator block). Exact full-pivot elimination in rational
// mode; in float mode the inverse is validated against (-Q) G = I so a
// recurrent (singular) input is always reported.
template <class S>
Mat<S> negated_generator_inverse(const Mat<S>& rates) {
  const auto n = rates.rows();
  if (n == 0) return Mat<S>(0, 0);
  Mat<S> A = -rates;
  if constexpr (is_rational_v<S>) {
    Eigen::FullPivLU<Mat<S>> lu(A);
    lu.setThreshold(S(0));
    if (!lu.isInvertible())
      throw SingularGenerator("(-Q) is singular: not all states are transient");
    return lu.inverse();
  } else {
    Eigen::PartialPivLU<Mat<S>> lu(A);
    Mat<S> G = lu.inverse();
    Mat<S> R = Mat<S>::Identity(n, n) - A * G;
    G += G * R;  // one Newton refinement step squares the inverse residual
    const double resid = (A * G - Mat<S>::Identity(n, n)).cwiseAbs().maxCoeff();
    const double scale = 1.0 + G.cwiseAbs().maxCoeff();
    if (!std::isfinite(resid) || resid > 1e-9 * scale)
      throw SingularGenerator("(-Q) is numerically singular: residual " +
                              format_scalar(resid));
    return G;
  }
}

template <class S>
ChainDiagnostics validate_chain(const SkipFreeChain<S>& c) {
  ChainDiagnostics d;
  const int n = c.size();
  d.shape_ok = n >= 1 && c.rates.rows() == n && c.rates.cols() == n && c.kill.size() == n;
  if (!d.shape_ok) {
    d.violations.push_back("rates/kill dimensions do not match [lo, hi]");
    return d;
  }

  d.rates_ok = true;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (i != j && c.rates(i, j) < S(0)) {
        d.rates_ok = false;
        d.violations.push_back("negative rate Q(" + std::to_string(c.lo + i) + "," +
                               std::to_string(c.lo + j) + ")");
      }
    if (c.kill[i] < S(0)) {
      d.rates_ok = false;
      d.violations.push_back("negative killing rate at state " + std::to_string(c.lo + i));
    }
  }

  d.skip_free_ok = true;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && !(c.rates(i, i - 1) > S(0))) {
      d.skip_free_ok = false;
      d.violations.push_back("Q(" + std::to_string(c.lo + i) + "," +
                             std::to_string(c.lo + i - 1) + ") must be positive");
    }
    for (int j = 0; j + 2 <= i; ++j)
      if (!(c.rates(i, j) == S(0))) {
        d.skip_free_ok = false;
        d.violations.push_back("downward jump by more than one: Q(" +
                               std::to_string(c.lo + i) + "," + std::to_string(c.lo + j) + ")");
      }
  }

  d.row_sums_ok = true;
  for (int i = 0; i < n; ++i) {
    S off(0);
    for (int j = 0; j < n; ++j)
      if (j != i) off += c.rates(i, j);
    if (rel_dev<S>(off + c.kill[i], -c.rates(i, i)) > check_tol<S>(1e-12)) {
      d.row_sums_ok = false;
      d.violations.push_back("row sum mismatch at state " + std::to_string(c.lo + i));
    }
  }

  d.transient = false;
  if (d.rates_ok && d.row_sums_ok) {
    try {
      Mat<S> G = negated_generator_inverse(c.rates);
      d.transient = true;
      const S tol = check_tol<S>(1e-12) * std::max(S(1), G.cwiseAbs().maxCoeff());
      for (int i = 0; i < n && d.transient; ++i)
        for (int j = 0; j < n; ++j)
          if (G(i, j) < -tol) {
            d.transient = false;
            d.violations.push_back("(-Q)^{-1} has a negative entry; chain is not transient");
            break;
          }
    } catch (const SingularGenerator&) {
      d.violations.push_back("(-Q) is singular; not all states are transient");
    }
  }
  return d;
}

template <class S>
Mat<S> resolvent_raw(const SkipFreeChain<S>& c) {
  return negated_generator_inverse(c.rates);
}

// Resolvent of the chain killed on first entry to `avoid`: the generator is
// restricted to E \ avoid and the result is zero-extended back to E x E.
template <class S>
Mat<S> killed_resolvent_raw(const SkipFreeChain<S>& c, const std::set<int>& avoid) {
  const int n = c.size();
  std::vector<int> keep;
  keep.reserve(n);
  for (int s = c.lo; s <= c.hi; ++s)
    if (!avoid.count(s)) keep.push_back(c.idx(s));
  Mat<S> sub(keep.size(), keep.size());
  for (size_t i = 0; i < keep.size(); ++i)
    for (size_t j = 0; j < keep.size(); ++j) sub(i, j) = c.rates(keep[i], keep[j]);
  Mat<S> Gsub = negated_generator_inverse(sub);
  Mat<S> G = Mat<S>::Zero(n, n);
  for (size_t i = 0; i < keep.size(); ++i)
    for (size_t j = 0; j < keep.size(); ++j) G(keep[i], keep[j]) = Gsub(i, j);
  return G;
}

template <class S>
ReferenceData<S> make_reference(const SkipFreeChain<S>& c, int ref_point, Vec<S> pi) {
  if (!c.contains(ref_point)) throw ConfigError("reference point outside the state space");
  if (pi.size() != c.size()) throw ConfigError("reference measure has wrong length");
  for (int i = 0; i < pi.size(); ++i)
    if (!(pi[i] > S(0)))
      throw ConfigError("reference measure must be strictly positive everywhere");
  ReferenceData<S> ref{ref_point, std::move(pi), S(0)};
  Vec<S> piQ = c.rates.transpose() * ref.pi;
  for (int i = 0; i < piQ.size(); ++i) ref.excess_residual = std::max(ref.excess_residual, piQ[i]);
  return ref;
}

// pi(y) = sum_x 2^{-sigma(x)} G(x,y) with sigma counting E upward from lo.
// Excessive by construction: pi^T Q = -(weights) < 0.
template <class S>
ReferenceData<S> default_reference(const SkipFreeChain<S>& c, const Mat<S>& G) {
  const int n = c.size();
  Vec<S> w(n);
  if constexpr (is_rational_v<S>) {
    BigInt p(1);
    for (int i = 0; i < n; ++i) {
      p *= 2;
      w[i] = Rational(BigInt(1), p);
    }
  } else {
    for (int i = 0; i < n; ++i) w[i] = std::ldexp(1.0, -(i + 1));
  }
  Vec<S> pi = G.transpose() * w;
  for (int i = 0; i < n; ++i)
    if (!(pi[i] > S(0)))
      throw ModelError("default reference measure underflowed; supply one explicitly");
  return make_reference(c, c.lo, std::move(pi));
}

template <class S>
ReferenceData<S> default_reference(const SkipFreeChain<S>& c) {
  return default_reference(c, resolvent_raw(c));
}

template <class S>
ResolventMatrix<S> resolvent(const SkipFreeChain<S>& c, const ReferenceData<S>& ref) {
  ResolventMatrix<S> r;
  r.raw = resolvent_raw(c);
  r.density = r.raw;
  for (int j = 0; j < c.size(); ++j) r.density.col(j) /= ref.pi[j];
  return r;
}

template <class S>
ResolventMatrix<S> killed_resolvent(const SkipFreeChain<S>& c, const ReferenceData<S>& ref,
                                    const std::set<int>& avoid) {
  ResolventMatrix<S> r;
  r.raw = killed_resolvent_raw(c, avoid);
  r.density = r.raw;
  for (int j = 0; j < c.size(); ++j) r.density.col(j) /= ref.pi[j];
  return r;
}

// H(x) = G(x, lo) / G(o, lo); the normalized minimal excessive function whose
// ratios give downward hitting probabilities.
template <class S>
Vec<S> fundamental_h(const SkipFreeChain<S>& c, const ReferenceData<S>& ref, const Mat<S>& G) {
  const int l = 0;
  return G.col(l) / G(c.idx(ref.ref_point), l);
}

template <class S>
Vec<S> fundamental_h(const SkipFreeChain<S>& c, const ReferenceData<S>& ref) {
  return fundamental_h(c, ref, resolvent_raw(c));
}

// H-hat(y) = G-hat(y, hi) / G-hat(o, hi) for the pi-dual, evaluated through
// the switching identity G-hat(y,x) = pi(x) G(x,y) / pi(y).
template <class S>
Vec<S> dual_h_hat(const SkipFreeChain<S>& c, const ReferenceData<S>& ref, const Mat<S>& G) {
  const int r = c.size() - 1;
  const int o = c.idx(ref.ref_point);
  Vec<S> h(c.size());
  for (int y = 0; y < c.size(); ++y)
    h[y] = (G(r, y) / ref.pi[y]) / (G(r, o) / ref.pi[o]);
  return h;
}

template <class S>
Vec<S> dual_h_hat(const SkipFreeChain<S>& c, const ReferenceData<S>& ref) {
  return dual_h_hat(c, ref, resolvent_raw(c));
}

// H^{[b}(x) = G^{[b}(x, lo) / G(o, lo): the fundamental function of the chain
// killed on reaching [b. Vanishes for x >= b.
template <class S>
Vec<S> killed_fundamental_hb(const SkipFreeChain<S>& c, const ReferenceData<S>& ref, int b,
                             const Mat<S>& G) {
  std::set<int> avoid;
  for (int s = std::max(b, c.lo); s <= c.hi; ++s) avoid.insert(s);
  Mat<S> Gb = killed_resolvent_raw(c, avoid);
  return Gb.col(0) / G(c.idx(ref.ref_point), 0);
}

template <class S>
Vec<S> killed_fundamental_hb(const SkipFreeChain<S>& c, const ReferenceData<S>& ref, int b) {
  return killed_fundamental_hb(c, ref, b, resolvent_raw(c));
}

// Max deviation of g(x,y) from C H-hat(y) (H(x) - H^{[y}(x)) over E x E,
// with C = g(o,o). Zero in exact arithmetic.
template <class S>
S resolvent_identity_residual(const SkipFreeChain<S>& c, const ReferenceData<S>& ref) {
  const int n = c.size();
  const Mat<S> G = resolvent_raw(c);
  const Vec<S> H = fundamental_h(c, ref, G);
  const Vec<S> Hhat = dual_h_hat(c, ref, G);
  const int o = c.idx(ref.ref_point);
  const S C = G(o, o) / ref.pi[o];
  S worst(0);
  for (int y = 0; y < n; ++y) {
    const Vec<S> Hy = killed_fundamental_hb(c, ref, c.lo + y, G);
    for (int x = 0; x < n; ++x) {
      const S lhs = G(x, y) / ref.pi[y];
      const S rhs = C * Hhat[y] * (H[x] - Hy[x]);
      worst = std::max(worst, rel_dev(lhs, rhs));
    }
  }
  return worst;
}

// P_x(T_y < zeta) = (H(x) - H^{[y}(x)) / H(y).
template <class S>
S hit_prob(const SkipFreeChain<S>& c, const ReferenceData<S>& ref, int x, int y) {
  const Mat<S> G = resolvent_raw(c);
  const Vec<S> H = fundamental_h(c, ref, G);
  if (x >= y) return H[c.idx(x)] / H[c.idx(y)];
  const Vec<S> Hy = killed_fundamental_hb(c, ref, y, G);
  return (H[c.idx(x)] - Hy[c.idx(x)]) / H[c.idx(y)];
}

// P_x(T_a < T_{[b} ^ zeta) = H^{[b}(x) / H^{[b}(a) for x >= a, b > a.
template <class S>
S two_sided_exit(const SkipFreeChain<S>& c, const ReferenceData<S>& ref, int x, int a, int b) {
  const Mat<S> G = resolvent_raw(c);
  const Vec<S> Hb = killed_fundamental_hb(c, ref, b, G);
  return Hb[c.idx(x)] / Hb[c.idx(a)];
}

// E_x[ f(X_T) 1{T < zeta} ] for T the exit time of (a,b), via the Dynkin-type
// sum f(x) + sum_z Qf(z) G^{(a,b)^c}(x,z) over the interior states z.
template <class S>
S dynkin_exit(const SkipFreeChain<S>& c, const std::function<S(int)>& f, int a, int b, int x) {
  std::set<int> avoid;
  for (int s = c.lo; s <= c.hi; ++s)
    if (s <= a || s >= b) avoid.insert(s);
  const Mat<S> Gab = killed_resolvent_raw(c, avoid);
  S acc = f(x);
  for (int z = a + 1; z <= b - 1; ++z) {
    if (!c.contains(z)) continue;
    S qf(0);
    for (int y = 0; y < c.size(); ++y) {
      const S rate = c.rates(c.idx(z), y);
      if (!(rate == S(0))) qf += rate * f(c.lo + y);
    }
    acc += qf * Gab(c.idx(x), c.idx(z));
  }
  return acc;
}

// P_x(T_{[b} < zeta) = 1 - sum_{z<b} Q(z,cemetery) G^{[b}(x,z); 1 for x >= b.
template <class S>
S passage_up_prob(const SkipFreeChain<S>& c, int x, int b) {
  if (x >= b) return S(1);
  std::set<int> avoid;
  for (int s = std::max(b, c.lo); s <= c.hi; ++s) avoid.insert(s);
  const Mat<S> Gb = killed_resolvent_raw(c, avoid);
  S acc(1);
  for (int z = c.lo; z < b; ++z) acc -= c.kill[c.idx(z)] * Gb(c.idx(x), c.idx(z));
  return acc;
}

// Q-matrix of the pi-dual (skip-free upward) chain.
template <class S>
Mat<S> dual_q_matrix(const SkipFreeChain<S>& c, const ReferenceData<S>& ref) {
  const int n = c.size();
  Mat<S> qhat(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) qhat(y, x) = ref.pi[x] * c.rates(x, y) / ref.pi[y];
  return qhat;
}

// Largest |(Q h)(x)| over x > a, normalized by row magnitude: zero iff h is
// harmonic for the chain stopped at a.
template <class S>
S stopped_harmonicity_residual(const SkipFreeChain<S>& c, const Vec<S>& h, int a) {
  S worst(0);
  for (int x = a + 1; x <= c.hi; ++x) {
    S acc(0), scale(1);
    for (int y = 0; y < c.size(); ++y) {
      const S term = c.rates(c.idx(x), y) * h[y];
      acc += term;
      scale += scalar_abs<S>(term);
    }
    worst = std::max(worst, scalar_abs<S>(acc) / scale);
  }
  return worst;
}

}  // namespace skipfree
