#pragma once

#include <optional>

#include "skipfree/measure.hpp"
#include "skipfree/scalar.hpp"

namespace skipfree {

// psi(s) = alpha (mu*[s] - s) - p s as a dense coefficient vector. With
// mu(1) = 0 the linear coefficient is -(alpha + p).
template <class S>
Vec<S> psi_coefficients(const S& alpha, const ProbMeasure<S>& mu, const S& p) {
  const int deg = std::max(1, mu.max_support());
  Vec<S> c = Vec<S>::Zero(deg + 1);
  for (int j = 0; j <= mu.max_support(); ++j) c[j] = alpha * mu(j);
  c[1] -= alpha + p;
  return c;
}

template <class S>
S poly_eval(const Vec<S>& coeffs, const S& s) {
  S acc(0);
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k) acc = acc * s + coeffs[k];
  return acc;
}

template <class S>
Vec<S> poly_derivative(const Vec<S>& coeffs) {
  if (coeffs.size() <= 1) return Vec<S>::Zero(1);
  Vec<S> d(coeffs.size() - 1);
  for (int k = 1; k < coeffs.size(); ++k) d[k - 1] = S(k) * coeffs[k];
  return d;
}

// Divides by (s - root), asserting a zero remainder. Exact for rational
// scalars; used to strip the known root at 1 when p = 0.
template <class S>
Vec<S> poly_deflate(const Vec<S>& coeffs, const S& root) {
  const int deg = static_cast<int>(coeffs.size()) - 1;
  Vec<S> q = Vec<S>::Zero(deg);
  S carry = coeffs[deg];
  for (int k = deg - 1; k >= 1; --k) {
    q[k] = carry;
    carry = coeffs[k] + root * carry;
  }
  q[0] = carry;
  return q;
}

template <class S>
struct S0Result {
  S s0;
  S psi_prime_s0;
  bool exact;  // rational mode: s0 has an exact representation
};

namespace detail {

inline std::optional<Rational> rational_sqrt(const Rational& x) {
  if (x < 0) return std::nullopt;
  const BigInt num = BigInt(boost::multiprecision::numerator(x));
  const BigInt den = BigInt(boost::multiprecision::denominator(x));
  const BigInt rn = boost::multiprecision::sqrt(num);
  const BigInt rd = boost::multiprecision::sqrt(den);
  if (rn * rn != num || rd * rd != den) return std::nullopt;
  return Rational(rn) / Rational(rd);
}

// Smallest root of a degree <= 2 polynomial inside (0,1), when it is
// exactly representable.
inline std::optional<Rational> exact_root_in_unit_interval(const Vec<Rational>& c) {
  const int deg = static_cast<int>(c.size()) - 1;
  if (deg == 1) {
    if (c[1] == 0) return std::nullopt;
    const Rational r = -c[0] / c[1];
    if (r > 0 && r < 1) return r;
    return std::nullopt;
  }
  if (deg == 2) {
    const Rational disc = c[1] * c[1] - 4 * c[0] * c[2];
    const auto sq = rational_sqrt(disc);
    if (!sq) return std::nullopt;
    std::optional<Rational> best;
    for (int sign : {-1, 1}) {
      const Rational r = (-c[1] + Rational(sign) * (*sq)) / (2 * c[2]);
      if (r > 0 && r < 1 && (!best || r < *best)) best = r;
    }
    return best;
  }
  return std::nullopt;
}

inline double bisect_s0(const Vec<double>& psi) {
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-16; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (poly_eval(psi, mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Smallest positive zero of psi in (0,1]. The classification p = 0, m <= 1
// pins s0 = 1 analytically; otherwise the unique interior root is bisected
// in float mode and, in rational mode, recovered exactly when the (possibly
// deflated) polynomial has degree <= 2 with a square discriminant.
template <class S>
S0Result<S> find_s0(const S& alpha, const ProbMeasure<S>& mu, const S& p) {
  const Vec<S> psi = psi_coefficients(alpha, mu, p);
  const Vec<S> dpsi = poly_derivative(psi);
  const S m = mu.mean();
  if (p == S(0) && !(m > S(1))) return {S(1), poly_eval(dpsi, S(1)), true};

  if constexpr (is_rational_v<S>) {
    Vec<S> reduced = psi;
    if (p == S(0)) reduced = poly_deflate(psi, S(1));
    if (const auto root = detail::exact_root_in_unit_interval(reduced))
      return {*root, poly_eval(dpsi, *root), true};
    Vec<double> psi_d(psi.size());
    for (int k = 0; k < psi.size(); ++k) psi_d[k] = to_double(psi[k]);
    const Rational s0(detail::bisect_s0(psi_d));
    return {s0, poly_eval(dpsi, s0), false};
  } else {
    const double s0 = detail::bisect_s0(psi);
    return {s0, poly_eval(dpsi, s0), true};
  }
}

template <class S>
S pow_int(S base, long long e) {
  if (e < 0) return S(1) / pow_int(base, -e);
  S acc(1);
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

}  // namespace skipfree
