#pragma once

// Exact moments of triangle rows and the first-order recurrence solver.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "descent/exact_core.hpp"
#include "descent/types.hpp"

namespace descent {

struct MomentReport {
  int n = 0;
  Rational mean;
  Rational variance;
  Rational third_central;
  Rational fourth_central;

  double mean_f() const { return mean.get_d(); }
  double variance_f() const { return variance.get_d(); }
  double third_central_f() const { return third_central.get_d(); }
  double fourth_central_f() const { return fourth_central.get_d(); }
};

/// E[X(X-1)...(X-r+1)].
inline Rational factorial_moment(const ExactPmf& pmf, int r) {
  if (r < 1) throw domain_error("factorial moments need r >= 1");
  Rational total = 0;
  for (std::size_t j = 0; j < pmf.weights.size(); ++j) {
    if (sgn(pmf.weights[j]) == 0) continue;
    const long k = pmf.offset + static_cast<long>(j);
    Integer falling = 1;
    for (int t = 0; t < r; ++t) falling *= k - t;
    total += Rational(falling) * pmf.weights[j];
  }
  return total;
}

/// E[X^0], ..., E[X^max_order].
inline std::vector<Rational> raw_moments(const ExactPmf& pmf, int max_order) {
  std::vector<Rational> m(static_cast<std::size_t>(max_order) + 1, Rational(0));
  for (std::size_t j = 0; j < pmf.weights.size(); ++j) {
    const auto& w = pmf.weights[j];
    if (sgn(w) == 0) continue;
    const Integer k = pmf.offset + static_cast<long>(j);
    Integer power = 1;
    for (auto& slot : m) {
      slot += Rational(power) * w;
      power *= k;
    }
  }
  return m;
}

inline MomentReport central_moments(const ExactPmf& pmf, int n = 0) {
  const auto m = raw_moments(pmf, 4);
  MomentReport rep;
  rep.n = n;
  const Rational& mu = m[1];
  const Rational mu2 = mu * mu;
  rep.mean = mu;
  rep.variance = m[2] - mu2;
  rep.third_central = m[3] - 3 * mu * m[2] + 2 * mu2 * mu;
  rep.fourth_central = m[4] - 4 * mu * m[3] + 6 * mu2 * m[2] - 3 * mu2 * mu2;
  return rep;
}

struct RecurrenceSolution {
  Rational forward;
  std::optional<Rational> product_form;  // absent when some a_k is 0
};

/// A_k = a_k A_{k-1} + b_k for k = 1..n; a[k-1] and b[k-1] hold a_k and b_k.
inline RecurrenceSolution solve_linear_recurrence(std::span<const Rational> a,
                                                  std::span<const Rational> b, const Rational& a0,
                                                  int n) {
  if (n < 0) throw domain_error("recurrence length must be nonnegative");
  if (a.size() < static_cast<std::size_t>(n) || b.size() < static_cast<std::size_t>(n))
    throw domain_error("recurrence coefficients are shorter than n");
  RecurrenceSolution out;
  out.forward = a0;
  bool invertible = true;
  for (int k = 0; k < n; ++k) {
    out.forward = a[static_cast<std::size_t>(k)] * out.forward + b[static_cast<std::size_t>(k)];
    if (sgn(a[static_cast<std::size_t>(k)]) == 0) invertible = false;
  }
  if (invertible) {
    Rational prod = 1;
    Rational sum = a0;
    for (int k = 0; k < n; ++k) {
      prod *= a[static_cast<std::size_t>(k)];
      sum += b[static_cast<std::size_t>(k)] / prod;
    }
    out.product_form = prod * sum;
  }
  return out;
}

/// One step of the involution second factorial moment recurrence,
/// lambda_n from lambda_{n-1}, lambda_{n-2} and q_n = (n-1) i_{n-2} / i_n.
inline Rational involution_lambda_step(int n, const Rational& lambda1, const Rational& lambda2,
                                       const Rational& q) {
  if (n < 3) throw domain_error("the involution lambda recurrence starts at n = 3");
  const Rational one_jump =
      make_rational(n - 2, n) * lambda1 + make_rational(static_cast<long>(n - 2) * (n - 2), n);
  Rational c2(static_cast<long>(n - 2) * (n - 3), static_cast<long>(n) * (n - 1));
  c2.canonicalize();
  Rational add(static_cast<long>(n - 2) * (2L * n * n - 9L * n + 13), static_cast<long>(n) * (n - 1));
  add.canonicalize();
  return one_jump * (1 - q) + (c2 * lambda2 + add) * q;
}

/// lambda_n = E[R_n(R_n-1)] for derangements from lambda_{n-1} and mu_{n-1}.
inline Rational derangement_lambda_step(int n, const Rational& lambda1, const Rational& mu1,
                                        std::span<const Integer> d) {
  if (n < 3 || d.size() <= static_cast<std::size_t>(n))
    throw domain_error("derangement lambda step needs d_0..d_n with n >= 3");
  const Integer& dn = d[static_cast<std::size_t>(n)];
  const Integer& dn1 = d[static_cast<std::size_t>(n - 1)];
  Rational c1(Integer((n - 2) * dn1), dn);
  Rational c2(Integer((2 * n - 4) * dn1), dn);
  Rational tail(Integer((n % 2 == 0 ? 1 : -1) * (n - 1) * (n - 2)), dn);
  c1.canonicalize();
  c2.canonicalize();
  tail.canonicalize();
  return c1 * lambda1 + c2 * mu1 + tail;
}

/// mu_n for derangements from mu_{n-1}.
inline Rational derangement_mean_step(int n, const Rational& mu1, std::span<const Integer> d) {
  if (n < 2 || d.size() <= static_cast<std::size_t>(n))
    throw domain_error("derangement mean step needs d_0..d_n with n >= 2");
  Rational a(Integer((n - 1) * d[static_cast<std::size_t>(n - 1)]), d[static_cast<std::size_t>(n)]);
  Rational b(Integer(Integer((n - 1) * (n - 1)) * d[static_cast<std::size_t>(n - 2)]),
             d[static_cast<std::size_t>(n)]);
  a.canonicalize();
  b.canonicalize();
  return a * mu1 + b;
}

/// Forward iteration of L_m = ((m-2)/m) L_{m-1} + m with L_2 = 0.
inline Rational lambda_tilde(int n) {
  if (n < 2) throw domain_error("lambda tilde starts at n = 2");
  std::vector<Rational> a, b;
  for (int m = 3; m <= n; ++m) {
    a.push_back(make_rational(m - 2, m));
    b.push_back(Rational(m));
  }
  return solve_linear_recurrence(a, b, Rational(0), n - 2).forward;
}

/// Closed form of lambda_tilde: (3n+2)(n+1)/12 - 4/(n(n-1)).
inline Rational lambda_tilde_closed_form(int n) {
  if (n < 2) throw domain_error("lambda tilde starts at n = 2");
  return make_rational((3L * n + 2) * (n + 1), 12) - make_rational(4, static_cast<long>(n) * (n - 1));
}

struct MomentRow {
  MomentReport report;
  std::optional<double> reference_mean;
  std::optional<double> reference_variance;
  std::optional<Rational> exact_reference_mean;  // when the reference is rational
  std::optional<Rational> variance_bound;
};

namespace detail {

inline MomentRow moment_row(Family f, const CountTriangle& t, int n) {
  MomentRow row;
  row.report = central_moments(triangle_row_pmf(t, n), n);
  const double x = n;
  switch (f) {
    case Family::eulerian:
      row.exact_reference_mean = make_rational(n - 1, 2);
      row.reference_mean = x * 0.5 - 0.5;
      row.reference_variance = (x + 1) / 12;
      break;
    case Family::involution:
      row.exact_reference_mean = make_rational(n - 1, 2);
      row.reference_mean = x * 0.5 - 0.5;
      row.variance_bound = make_rational(17L * n - 4, 12);
      break;
    case Family::derangement:
      row.exact_reference_mean = make_rational(n - 1, 2) + make_rational(1, 2L * n);
      row.reference_mean = row.exact_reference_mean->get_d();
      row.reference_variance = x / 12;
      break;
    case Family::fibonacci: {
      const double r5 = std::sqrt(5.0);
      row.reference_mean = (5 - r5) / 10 * x + (1 - r5) / 10;
      row.reference_variance = x / (5 * r5);
      break;
    }
    case Family::excedance: break;
  }
  return row;
}

}  // namespace detail

/// Exact moment reports for rows n_lo..n_hi with asymptotic reference columns.
inline std::vector<MomentRow> moment_table(const CountTriangle& t, int n_lo, int n_hi) {
  if (n_lo > n_hi || !t.has_row(n_lo) || !t.has_row(n_hi))
    throw domain_error("moment range " + std::to_string(n_lo) + ".." + std::to_string(n_hi) +
                       " is outside the triangle");
  std::vector<MomentRow> out;
  out.reserve(static_cast<std::size_t>(n_hi - n_lo + 1));
  for (int n = n_lo; n <= n_hi; ++n) out.push_back(detail::moment_row(t.family(), t, n));
  return out;
}

inline std::vector<MomentRow> moment_table(Family f, int n_lo, int n_hi) {
  if (n_lo < min_row(f)) throw domain_error("moment range starts below the family's first row");
  return moment_table(descent_triangle(f, n_hi), n_lo, n_hi);
}

struct FourthMomentRow {
  int n = 0;
  Rational fourth_central;
  double ratio = 0;  // E W_n^4 / n^2
};

inline std::vector<FourthMomentRow> fourth_moment_scan(const CountTriangle& t, int n_lo, int n_hi) {
  if (n_lo > n_hi || !t.has_row(n_lo) || !t.has_row(n_hi))
    throw domain_error("scan range is outside the triangle");
  std::vector<FourthMomentRow> out;
  for (int n = n_lo; n <= n_hi; ++n) {
    FourthMomentRow row;
    row.n = n;
    row.fourth_central = central_moments(triangle_row_pmf(t, n), n).fourth_central;
    row.ratio = Rational(row.fourth_central / (Rational(n) * n)).get_d();
    out.push_back(std::move(row));
  }
  return out;
}

inline std::vector<FourthMomentRow> fourth_moment_scan(Family f, int n_lo, int n_hi) {
  if (f != Family::involution && f != Family::derangement)
    throw domain_error("fourth moment scans cover involutions and derangements");
  if (n_lo < min_row(f)) throw domain_error("scan range starts below the family's first row");
  return fourth_moment_scan(descent_triangle(f, n_hi), n_lo, n_hi);
}

}  // namespace descent
