#pragma once

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <string>
#include <type_traits>

#include "skipfree/errors.hpp"

namespace skipfree {

// Exact arithmetic mode. Expression templates are disabled so values behave
// like plain scalars inside Eigen expressions.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

template <class S>
inline constexpr bool is_rational_v = std::is_same_v<S, Rational>;

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.template convert_to<double>(); }

inline Rational numerator(const Rational& x) {
  return Rational(boost::multiprecision::numerator(x));
}
inline Rational denominator(const Rational& x) {
  return Rational(boost::multiprecision::denominator(x));
}

// Comparison slack used by residual checks and invariant validation:
// exact mode tolerates nothing.
template <class S>
inline S check_tol(double float_tol) {
  if constexpr (is_rational_v<S>) return S(0);
  return float_tol;
}

template <class S>
S scalar_abs(const S& x) {
  using std::abs;
  return abs(x);
}

// Parses either a decimal literal or a "p/q" fraction. In rational mode a
// decimal literal is converted exactly (binary64 values are dyadic).
template <class S>
S parse_scalar(const std::string& text) {
  const auto slash = text.find('/');
  if constexpr (is_rational_v<S>) {
    try {
      if (slash != std::string::npos) return Rational(text);
      if (text.find_first_of(".eE") != std::string::npos) return Rational(std::stod(text));
      return Rational(text);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse scalar '" + text + "'");
    }
  } else {
    double value = 0.0;
    if (slash != std::string::npos) {
      double num = 0.0, den = 0.0;
      try {
        num = std::stod(text.substr(0, slash));
        den = std::stod(text.substr(slash + 1));
      } catch (const std::exception&) {
        throw ConfigError("cannot parse scalar '" + text + "'");
      }
      if (den == 0.0) throw ConfigError("zero denominator in scalar '" + text + "'");
      value = num / den;
    } else {
      const auto first = text.data();
      const auto last = text.data() + text.size();
      const auto res = std::from_chars(first, last, value);
      if (res.ec != std::errc{} || res.ptr != last)
        throw ConfigError("cannot parse scalar '" + text + "'");
    }
    return value;
  }
}

inline std::string format_scalar(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}
inline std::string format_scalar(const Rational& x) { return x.str(); }

}  // namespace skipfree
