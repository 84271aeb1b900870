#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace descent {

using Integer = mpz_class;
using Rational = mpq_class;

// Error taxonomy. Each derives from the closest standard exception so callers
// can catch either the precise type or the std:: base.

struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};
struct degenerate_error : std::domain_error {
  using std::domain_error::domain_error;
};
struct infeasible_state_error : std::domain_error {
  using std::domain_error::domain_error;
};
struct malformed_word_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct invalid_rule_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct unsupported_order_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct invalid_exponent_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct index_error : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct budget_error : std::length_error {
  using std::length_error::length_error;
};
struct dependency_error : std::logic_error {
  using std::logic_error::logic_error;
};
struct missing_data_error : std::logic_error {
  using std::logic_error::logic_error;
};

inline std::string to_string(const Integer& v) { return v.get_str(); }
inline std::string to_string(const Rational& v) { return v.get_str(); }

/// Fixed 17-significant-digit rendering; the same double always prints the
/// same bytes.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Integer factorial(unsigned long n) {
  Integer r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

inline Integer binomial(unsigned long n, unsigned long k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

}  // namespace descent
