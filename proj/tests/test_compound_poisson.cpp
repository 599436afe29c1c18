#include <doctest.h>

#include "skipfree/compound_poisson.hpp"
#include "skipfree/oracles.hpp"
#include "skipfree/random_models.hpp"

using namespace skipfree;

namespace {

template <class S>
CppParams<S> symmetric_critical() {
  return {S(1), make_measure<S>({{0, S(1) / S(2)}, {2, S(1) / S(2)}}), S(0)};
}

template <class S>
CppParams<S> supercritical() {  // m = 3/2, s0 = 1/3
  return {S(1), make_measure<S>({{0, S(1) / S(4)}, {2, S(3) / S(4)}}), S(0)};
}

template <class S>
CppParams<S> subcritical() {  // m = 1/2, psi'(1) = -1/2
  return {S(1), make_measure<S>({{0, S(3) / S(4)}, {2, S(1) / S(4)}}), S(0)};
}

}  // namespace

TEST_SUITE_BEGIN("cpp");

TEST_CASE("branching polynomial evaluation") {
  const auto params = symmetric_critical<Rational>();
  CHECK(psi_eval(params, Rational(0)) == Rational(1, 2));
  CHECK(psi_eval(params, Rational(1)) == Rational(0));
  CHECK(psi_eval(params, Rational(1, 2)) == Rational(1, 8));
}

TEST_CASE("root of psi") {
  SUBCASE("critical: s0 = 1 with a double root") {
    const auto t = build_tables(symmetric_critical<Rational>(), 4);
    CHECK(t.s0 == Rational(1));
    CHECK(t.psi_prime_s0 == Rational(0));
    CHECK(t.regime == CppRegime::RecurrentCritical);
  }
  SUBCASE("supercritical: interior root found exactly") {
    const auto t = build_tables(supercritical<Rational>(), 4);
    CHECK(t.s0 == Rational(1, 3));
    CHECK(t.s0_exact);
    CHECK(t.psi_prime_s0 == Rational(-1, 2));
    CHECK(t.regime == CppRegime::TransientDrift);
  }
  SUBCASE("subcritical: no root below 1") {
    const auto t = build_tables(subcritical<Rational>(), 4);
    CHECK(t.s0 == Rational(1));
    CHECK(t.psi_prime_s0 == Rational(-1, 2));
  }
  SUBCASE("float bisection agrees with the exact root") {
    const auto t = build_tables(params_to_double(supercritical<Rational>()), 4);
    CHECK(t.s0 == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("killed model has an interior root") {
    const CppParams<double> p{1.0, make_measure<double>({{0, 0.5}, {2, 0.5}}), 0.25};
    const auto t = build_tables(p, 4);
    CHECK(t.regime == CppRegime::TransientKilled);
    CHECK(t.s0 < 1.0);
    CHECK(psi_eval(t, t.s0) == doctest::Approx(0.0).epsilon(1e-13));
  }
}

TEST_CASE("scale sequence") {
  SUBCASE("symmetric critical model: W(k) = 2(k+1)") {
    const auto t = build_tables(symmetric_critical<Rational>(), 40);
    for (int k = 0; k <= 40; ++k) CHECK(t.w[k] == Rational(2 * (k + 1)));
  }
  SUBCASE("W(0) = 1/(alpha mu(0))") {
    Pcg64 rng(61, 0);
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = random_cpp_params(rng);
      const auto t = build_tables(p, 2);
      CHECK(t.w[0] == Rational(1) / (p.alpha * p.mu(0)));
    }
  }
  SUBCASE("one recursion step by hand") {
    const auto t = build_tables(supercritical<Rational>(), 2);
    CHECK(t.w[0] == Rational(4));
    CHECK(t.w[1] == Rational(16));
  }
  SUBCASE("lazy extension preserves the prefix") {
    const auto t = build_tables(symmetric_critical<Rational>(), 5);
    const auto t2 = extend_tables(t, 20);
    CHECK(t2.horizon() == 20);
    for (int k = 0; k <= 5; ++k) CHECK(t2.w[k] == t.w[k]);
    CHECK(t2.w[20] == Rational(42));
  }
  SUBCASE("overflow is reported") {
    const CppParams<double> tiny{1.0, make_measure<double>({{0, 0.02}, {2, 0.98}}), 0.0};
    CHECK_THROWS_AS(build_tables(tiny, 3000), Overflow);
  }
}

TEST_CASE("resolvent closed form") {
  const auto t = build_tables(supercritical<Rational>(), 8);
  CHECK(resolvent_g(t, 0, 0) == Rational(2));
  CHECK(resolvent_g(t, 0, 1) == Rational(2));
  SUBCASE("downward factorization consistency") {
    for (int gap = 1; gap <= 5; ++gap)
      CHECK(resolvent_g(t, gap, 0) == pow_int(t.s0, gap) * resolvent_g(t, 0, 0));
  }
  SUBCASE("rejected in the critical regime") {
    const auto tc = build_tables(symmetric_critical<Rational>(), 8);
    CHECK_THROWS_AS(resolvent_g(tc, 0, 0), RecurrentChain);
  }
}

TEST_CASE("hitting probabilities") {
  SUBCASE("x = y") {
    const auto t = build_tables(supercritical<double>(), 8);
    CHECK(hit_prob(t, 3, 3) == 1.0);
  }
  SUBCASE("supercritical ruin: 3^-x") {
    const auto t = build_tables(supercritical<Rational>(), 8);
    CHECK(hit_prob(t, 1, 0) == Rational(1, 3));
    CHECK(hit_prob(t, 4, 0) == Rational(1, 81));
  }
  SUBCASE("critical: always one") {
    const auto t = build_tables(symmetric_critical<Rational>(), 30);
    for (int x = -3; x <= 3; ++x)
      for (int y = -3; y <= 3; ++y) CHECK(hit_prob(t, x, y) == Rational(1));
  }
  SUBCASE("spatial homogeneity") {
    const auto t = build_tables(params_to_double(supercritical<Rational>()), 16);
    for (int shift : {-5, 3, 11})
      CHECK(hit_prob(t, 4, 1) == hit_prob(t, 4 + shift, 1 + shift));
  }
}

TEST_CASE("two-sided exit") {
  SUBCASE("gambler's ruin on the symmetric critical model") {
    const auto t = build_tables(symmetric_critical<Rational>(), 20);
    CHECK(two_sided_exit_down(t, 1, 0, 4) == Rational(3, 4));
    for (long long a = 0; a <= 3; ++a)
      for (long long x = a; x <= 14; ++x)
        for (long long b = x + 1; b <= 15; ++b)
          CHECK(two_sided_exit_down(t, x, a, b) == Rational(b - x, b - a));
  }
  SUBCASE("x = a") {
    const auto t = build_tables(supercritical<double>(), 10);
    CHECK(two_sided_exit_down(t, 2, 2, 7) == 1.0);
  }
  SUBCASE("monotone in the start point") {
    const auto t = build_tables(params_to_double(supercritical<Rational>()), 16);
    for (long long x = 1; x <= 9; ++x)
      CHECK(two_sided_exit_down(t, x, 0, 10) <= two_sided_exit_down(t, x - 1, 0, 10));
  }
  SUBCASE("agrees with the lumped window solve") {
    Pcg64 rng(67, 0);
    for (int trial = 0; trial < 8; ++trial) {
      const auto p = params_to_double(random_cpp_params(rng));
      const auto t = build_tables(p, 40);
      const auto win = window_chain(p, 2, 14);
      for (long long x = 2; x < 14; ++x)
        CHECK(two_sided_exit_down(t, x, 2, 14) ==
              doctest::Approx(solve_two_sided_bv(win, static_cast<int>(x), 2, 14)).epsilon(1e-10));
    }
  }
}

TEST_CASE("interval exit probability") {
  SUBCASE("no killing means exit is certain") {
    const auto t = build_tables(supercritical<Rational>(), 12);
    for (long long x = 0; x < 6; ++x) CHECK(exit_interval_prob(t, x, 0, 6) == Rational(1));
  }
  SUBCASE("immediate exit at the boundary") {
    const CppParams<double> p{1.0, make_measure<double>({{0, 0.5}, {2, 0.5}}), 0.1};
    const auto t = build_tables(p, 12);
    CHECK(exit_interval_prob(t, 0, 0, 3) == 1.0);
  }
  SUBCASE("killed model matches the window Dynkin value") {
    const CppParams<double> p{1.0, make_measure<double>({{0, 0.5}, {2, 0.5}}), 0.1};
    const auto t = build_tables(p, 12);
    const auto win = window_chain(p, 0, 3);
    CHECK(exit_interval_prob(t, 1, 0, 3) ==
          doctest::Approx(solve_exit_interval_bv(win, 1, 0, 3)).epsilon(1e-10));
    CHECK(exit_interval_prob(t, 1, 0, 3) ==
          doctest::Approx(dynkin_exit(win, std::function<double(int)>([](int) { return 1.0; }),
                                      0, 3, 1))
              .epsilon(1e-10));
  }
}

TEST_CASE("upward passage") {
  SUBCASE("supercritical without killing crosses surely") {
    const auto t = build_tables(supercritical<Rational>(), 12);
    CHECK(passage_up_prob(t, 0, 5) == Rational(1));
  }
  SUBCASE("critical crosses surely") {
    const auto t = build_tables(symmetric_critical<Rational>(), 12);
    CHECK(passage_up_prob(t, 1, 6) == Rational(1));
  }
  SUBCASE("subcritical drift down") {
    const auto t = build_tables(subcritical<Rational>(), 12);
    CHECK(passage_up_prob(t, 0, 1) == Rational(1, 3));
  }
  SUBCASE("already above") {
    const auto t = build_tables(subcritical<double>(), 12);
    CHECK(passage_up_prob(t, 4, 2) == 1.0);
  }
}

TEST_CASE("generating-function identity psi * W = delta") {
  Pcg64 rng(71, 0);
  Vec<Rational> delta = Vec<Rational>::Zero(1);
  delta[0] = Rational(1);
  Vec<double> delta_d = Vec<double>::Zero(1);
  delta_d[0] = 1.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto pr = random_cpp_params(rng);
    const auto tr = build_tables(pr, 160);
    CHECK(convolution_residual(tr.psi_coeffs, tr.w, delta, 160) == Rational(0));
    const auto td = build_tables(params_to_double(pr), 160);
    CHECK(to_double(convolution_residual(td.psi_coeffs, td.w, delta_d, 160)) < 1e-10);
  }
}

TEST_SUITE_END();
