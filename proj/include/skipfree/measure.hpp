#pragma once

#include <initializer_list>
#include <map>
#include <utility>

#include "skipfree/scalar.hpp"

namespace skipfree {

// Finite-support probability measure on the nonnegative integers, stored
// densely from 0 with the trailing zeros trimmed. Weights are validated at
// construction: strictly positive on the support and summing to one (within
// 1e-12 in float mode, exactly in rational mode).
template <class S>
struct ProbMeasure {
  Vec<S> mass;  // mass[j] = weight of support point j, zero off-support

  int max_support() const { return static_cast<int>(mass.size()) - 1; }

  S operator()(int j) const {
    if (j < 0 || j > max_support()) return S(0);
    return mass[j];
  }

  // First moment sum_j j * mass(j).
  S mean() const {
    S acc(0);
    for (int j = 1; j < mass.size(); ++j) acc += S(j) * mass[j];
    return acc;
  }
};

template <class S>
ProbMeasure<S> make_measure(const std::map<int, S>& probs) {
  if (probs.empty()) throw ConfigError("probability measure has empty support");
  int top = -1;
  for (const auto& [point, weight] : probs) {
    if (point < 0) throw ConfigError("support point " + std::to_string(point) + " is negative");
    if (!(weight > S(0)))
      throw ConfigError("weight at support point " + std::to_string(point) +
                        " is not strictly positive");
    top = std::max(top, point);
  }
  Vec<S> mass = Vec<S>::Zero(top + 1);
  S total(0);
  for (const auto& [point, weight] : probs) {
    mass[point] = weight;
    total += weight;
  }
  if (scalar_abs<S>(total - S(1)) > check_tol<S>(1e-12))
    throw ConfigError("weights sum to " + format_scalar(total) + ", expected 1");
  return ProbMeasure<S>{std::move(mass)};
}

template <class S>
ProbMeasure<S> make_measure(std::initializer_list<std::pair<const int, S>> probs) {
  return make_measure(std::map<int, S>(probs));
}

// Tail vector (m-bar(0), ..., m-bar(upto)) with m-bar(k) = 1 - sum_{j<=k} m(j),
// accumulated from above so entries are exactly zero past the support.
template <class S>
Vec<S> tail(const ProbMeasure<S>& m, int upto) {
  Vec<S> tails = Vec<S>::Zero(upto + 1);
  S acc(0);
  for (int j = m.max_support(); j > upto; --j) acc += m(j);
  for (int k = upto; k >= 0; --k) {
    tails[k] = acc;
    acc += m(k);
  }
  return tails;
}

// (f * g)(x) = sum_{y=0}^{x} f(x-y) g(y) for x = 0..upto. Missing indices
// count as zero, so shorter inputs are implicitly zero-padded.
template <class S>
Vec<S> convolve(const Vec<S>& f, const Vec<S>& g, int upto) {
  Vec<S> out = Vec<S>::Zero(upto + 1);
  const int nf = static_cast<int>(f.size());
  const int ng = static_cast<int>(g.size());
  for (int x = 0; x <= upto; ++x) {
    S acc(0);
    const int lo = std::max(0, x - nf + 1);
    const int hi = std::min(x, ng - 1);
    for (int y = lo; y <= hi; ++y) acc += f[x - y] * g[y];
    out[x] = acc;
  }
  return out;
}

// Residual of the coefficient identity (f * g)(k) = expected(k) for
// k = 0..upto, normalized by the magnitude of the convolution terms (the
// natural scale when the sequences grow geometrically and the identity holds
// by cancellation). Exact zero in rational mode.
template <class S>
S convolution_residual(const Vec<S>& f, const Vec<S>& g, const Vec<S>& expected, int upto) {
  const int nf = static_cast<int>(f.size());
  const int ng = static_cast<int>(g.size());
  S worst(0);
  for (int x = 0; x <= upto; ++x) {
    S acc(0), scale(1);
    const int lo = std::max(0, x - nf + 1);
    const int hi = std::min(x, ng - 1);
    for (int y = lo; y <= hi; ++y) {
      const S term = f[x - y] * g[y];
      acc += term;
      scale = std::max(scale, scalar_abs<S>(term));
    }
    const S want = x < expected.size() ? expected[x] : S(0);
    worst = std::max(worst, scalar_abs<S>(acc - want) / scale);
  }
  return worst;
}

// Truncated power series sum_{y=0}^{upto} s^y f(y), Horner form.
template <class S>
S gf_eval(const Vec<S>& f, const S& s, int upto) {
  const int top = std::min<int>(upto, static_cast<int>(f.size()) - 1);
  S acc(0);
  for (int y = top; y >= 0; --y) acc = acc * s + f[y];
  return acc;
}

}  // namespace skipfree
