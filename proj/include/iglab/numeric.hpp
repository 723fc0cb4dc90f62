#ifndef IGLAB_NUMERIC_HPP
#define IGLAB_NUMERIC_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace iglab {

// Exact arithmetic scalar for the rational mode.  All probability tables,
// likelihood values and posterior masses are cpp_rational in this mode, so
// every equality asserted by a theorem check is exact.
using Rational = boost::multiprecision::cpp_rational;

// Error taxonomy.  The CLI maps these onto exit codes: validation/usage/domain
// errors exit 2, resource caps exit 3, theorem violations exit 4.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct model_domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct structural_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised only when a verified theorem's hypotheses hold but its conclusion
// fails on the instance at hand.  Should never fire.
struct theorem_violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Comparison tolerances for float mode.  Rational mode ignores them.
struct Tolerance {
  double equal = 1e-12;         // value equality
  double proportional = 1e-10;  // ratio constancy in proportionality checks
};

// Exact field: the tolerance is accepted and ignored.
inline bool approx_equal(const Rational& a, const Rational& b, double) { return a == b; }
inline bool approx_equal(double a, double b, double rel) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

template <class S>
bool is_zero(const S& x) {
  return x == S(0);
}

template <class S>
double to_double(const S& x) {
  return static_cast<double>(x);
}
inline double to_double(const Rational& x) {
  return x.template convert_to<double>();
}

// Every double is a dyadic rational; the conversion below is exact.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw validation_error("cannot convert non-finite value to rational");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [0.5, 1)
  // 53 bits of mantissa
  std::int64_t m = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r(m);
  if (exp >= 0) {
    r *= Rational(boost::multiprecision::cpp_int(1) << exp);
  } else {
    r /= Rational(boost::multiprecision::cpp_int(1) << (-exp));
  }
  return r;
}

// Parses "p/q" or a plain integer string.  Throws validation_error on junk.
inline Rational parse_rational(const std::string& text) {
  const auto bad = [&]() -> validation_error {
    return validation_error("not a rational number: \"" + text + "\"");
  };
  std::string s = text;
  if (s.empty()) throw bad();
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      return Rational(boost::multiprecision::cpp_int(s));
    }
    boost::multiprecision::cpp_int num(s.substr(0, slash));
    boost::multiprecision::cpp_int den(s.substr(slash + 1));
    if (den == 0) throw bad();
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw bad();
  }
}

inline std::string format_scalar(const Rational& x) {
  return x.str();
}
inline std::string format_scalar(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Mode-mirroring constructor: builds an S from an exact rational.
template <class S>
S scalar_from_rational(const Rational& r);
template <>
inline Rational scalar_from_rational<Rational>(const Rational& r) {
  return r;
}
template <>
inline double scalar_from_rational<double>(const Rational& r) {
  return to_double(r);
}

// Inverse direction: lifts an S into the exact field.  Doubles lift to the
// dyadic rational they already are.
inline Rational rational_from_scalar(const Rational& v) { return v; }
inline Rational rational_from_scalar(double v) { return rational_from_double(v); }

}  // namespace iglab

#endif  // IGLAB_NUMERIC_HPP
