#pragma once

#include "skipfree/branching.hpp"
#include "skipfree/chain.hpp"
#include "skipfree/compound_poisson.hpp"
#include "skipfree/rng.hpp"
#include "skipfree/simulate.hpp"

namespace skipfree {

// Instance generators draw rational-valued models so the same instance can
// be evaluated in both scalar modes; float variants are exact conversions.

inline std::int64_t draw_int(Pcg64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
}

// uniform numerator over a fixed power-of-two denominator
inline Rational draw_rational(Pcg64& rng, int num_lo, int num_hi, int den) {
  return Rational(draw_int(rng, num_lo, num_hi), den);
}

inline ProbMeasure<double> measure_to_double(const ProbMeasure<Rational>& m) {
  Vec<double> mass(m.mass.size());
  for (int j = 0; j < m.mass.size(); ++j) mass[j] = to_double(m.mass[j]);
  return ProbMeasure<double>{std::move(mass)};
}

inline SkipFreeChain<double> chain_to_double(const SkipFreeChain<Rational>& c) {
  SkipFreeChain<double> out;
  out.lo = c.lo;
  out.hi = c.hi;
  out.rates = Mat<double>(c.size(), c.size());
  out.kill = Vec<double>(c.size());
  for (int i = 0; i < c.size(); ++i) {
    out.kill[i] = to_double(c.kill[i]);
    for (int j = 0; j < c.size(); ++j) out.rates(i, j) = to_double(c.rates(i, j));
  }
  return out;
}

inline CppParams<double> params_to_double(const CppParams<Rational>& p) {
  return {to_double(p.alpha), measure_to_double(p.mu), to_double(p.p)};
}

inline MbiParams<double> params_to_double(const MbiParams<Rational>& p) {
  return {to_double(p.alpha), measure_to_double(p.mu), to_double(p.p),
          to_double(p.beta),  measure_to_double(p.nu), to_double(p.q)};
}

// Random transient skip-free chain on [0, n-1]: positive down rates, a dense
// sprinkling of up jumps, and strictly positive killing everywhere so all
// states are transient.
inline SkipFreeChain<Rational> random_chain(Pcg64& rng, int n_states) {
  SkipFreeChain<Rational> c;
  c.lo = 0;
  c.hi = n_states - 1;
  c.rates = Mat<Rational>::Zero(n_states, n_states);
  c.kill = Vec<Rational>(n_states);
  for (int i = 0; i < n_states; ++i) {
    Rational total(0);
    if (i > 0) {
      c.rates(i, i - 1) = draw_rational(rng, 8, 32, 16);
      total += c.rates(i, i - 1);
    }
    for (int j = i + 1; j < n_states; ++j) {
      if (draw_int(rng, 0, 2) == 0) continue;  // keep roughly 2/3 of up jumps
      c.rates(i, j) = draw_rational(rng, 1, 16, 16);
      total += c.rates(i, j);
    }
    c.kill[i] = draw_rational(rng, 2, 16, 16);
    total += c.kill[i];
    c.rates(i, i) = -total;
  }
  return c;
}

inline ProbMeasure<Rational> random_jump_measure(Pcg64& rng, int max_support) {
  std::map<int, Rational> weights;
  long long total = draw_int(rng, 2, 8);
  weights[0] = Rational(total);  // placeholder, fixed below
  std::vector<int> points;
  for (int j = 2; j <= max_support; ++j)
    if (draw_int(rng, 0, 1) == 0) points.push_back(j);
  if (points.empty()) points.push_back(2 + static_cast<int>(draw_int(rng, 0, max_support - 2)));
  long long sum = total;
  for (const int j : points) {
    const long long w = draw_int(rng, 1, 8);
    weights[j] = Rational(w);
    sum += w;
  }
  for (auto& [point, weight] : weights) weight /= Rational(sum);
  return make_measure(weights);
}

struct CppDrawOptions {
  int max_support = 6;
  bool allow_killing = true;
  bool force_subcritical = false;  // p = 0 and m < 1, so s0 = 1
};

inline CppParams<Rational> random_cpp_params(Pcg64& rng, const CppDrawOptions& opt = {}) {
  for (;;) {
    CppParams<Rational> p;
    p.alpha = draw_rational(rng, 8, 32, 16);
    p.mu = random_jump_measure(rng, opt.max_support);
    p.p = Rational(0);
    if (opt.force_subcritical) {
      if (!(p.mu.mean() < Rational(1))) continue;
    } else if (opt.allow_killing && draw_int(rng, 0, 1) == 0) {
      p.p = draw_rational(rng, 1, 8, 32);
    }
    // keep the scale-sequence growth rate representable at horizon 500
    const auto root = find_s0(params_to_double(p).alpha, params_to_double(p).mu,
                              params_to_double(p).p);
    if (root.s0 < 0.4) continue;
    return p;
  }
}

struct MbiDrawOptions {
  int max_mu_support = 5;
  int max_nu_support = 4;
  bool force_q_positive = false;
  bool force_subcritical = false;  // p = 0 and m < 1
  bool allow_p = true;
};

inline MbiParams<Rational> random_mbi_params(Pcg64& rng, const MbiDrawOptions& opt = {}) {
  for (;;) {
    MbiParams<Rational> p;
    p.alpha = draw_rational(rng, 8, 32, 16);
    p.mu = random_jump_measure(rng, opt.max_mu_support);
    p.p = Rational(0);
    if (!opt.force_subcritical && opt.allow_p && draw_int(rng, 0, 3) == 0)
      p.p = draw_rational(rng, 1, 8, 32);
    if (opt.force_subcritical && !(p.mu.mean() < Rational(1))) continue;

    std::map<int, Rational> nuw;
    long long sum = 0;
    for (int j = 1; j <= opt.max_nu_support; ++j) {
      const long long w = draw_int(rng, 0, 4);
      if (w > 0) {
        nuw[j] = Rational(w);
        sum += w;
      }
    }
    if (nuw.empty()) {
      nuw[1] = Rational(1);
      sum = 1;
    }
    for (auto& [point, weight] : nuw) weight /= Rational(sum);
    p.nu = make_measure(nuw);
    p.beta = draw_int(rng, 0, 3) == 0 ? Rational(0) : draw_rational(rng, 4, 32, 16);
    p.q = Rational(0);
    if (opt.force_q_positive || draw_int(rng, 0, 1) == 0) p.q = draw_rational(rng, 4, 16, 16);
    if (opt.force_q_positive && p.q == Rational(0)) p.q = Rational(1, 2);

    const auto root = find_s0(params_to_double(p).alpha, params_to_double(p).mu,
                              params_to_double(p).p);
    if (root.s0 < 0.4) continue;
    return p;
  }
}

inline SimModel sim_model(const SkipFreeChain<double>& c) { return ChainSimModel{c}; }
inline SimModel sim_model(const CppParams<double>& p) { return CppSimModel{p.alpha, p.mu, p.p}; }
inline SimModel sim_model(const MbiParams<double>& p) {
  return MbiSimModel{p.alpha, p.mu, p.p, p.beta, p.nu, p.q};
}

}  // namespace skipfree
