#pragma once

// Normal-approximation distances, convergence-rate fits, composition
// identities and numerical scans of the martingale CLT conditions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "descent/compositions.hpp"
#include "descent/exact_core.hpp"
#include "descent/moments.hpp"
#include "descent/processes.hpp"
#include "descent/types.hpp"

namespace descent {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// sup_x |F(x) - Phi(x)| after standardizing the pmf by its exact mean and
/// standard deviation. F jumps only at support points, so the supremum is
/// attained at some z_k from the left or the right.
inline double kolmogorov_distance(const ExactPmf& pmf) {
  const auto rep = central_moments(pmf);
  if (sgn(rep.variance) <= 0) throw degenerate_error("distribution has zero variance");
  const double mean = rep.mean.get_d();
  const double sd = std::sqrt(rep.variance.get_d());
  Rational cdf = 0;
  double below = 0;
  double worst = 0;
  for (std::size_t j = 0; j < pmf.weights.size(); ++j) {
    if (sgn(pmf.weights[j]) == 0) continue;
    const double z = (static_cast<double>(pmf.offset + static_cast<long>(j)) - mean) / sd;
    const double phi = normal_cdf(z);
    cdf += pmf.weights[j];
    const double at = cdf.get_d();
    worst = std::max({worst, std::abs(at - phi), std::abs(below - phi)});
    below = at;
  }
  return worst;
}

/// Exponent r in the rate n^{-r} tracked for each family.
inline double rate_exponent(Family f) { return f == Family::derangement ? 1.0 / 3.0 : 0.5; }

struct CltRecord {
  int n = 0;
  double mean = 0;
  double sd = 0;
  double K = 0;
  double scaled = 0;  // n^r K with r = rate_exponent
  bool degenerate = false;
  std::string warning;
};

struct LogLogFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  int points = 0;
};

struct CltTable {
  Family family;
  std::vector<CltRecord> records;
  LogLogFit fit;
  double max_scaled = 0;
};

/// Unweighted least squares of log K on log n.
inline LogLogFit fit_log_log(std::span<const CltRecord> records, int fit_min) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& r : records) {
    if (r.degenerate || r.n < fit_min || r.K <= 0) continue;
    const double x = std::log(static_cast<double>(r.n)), y = std::log(r.K);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  LogLogFit fit;
  fit.points = m;
  const double det = m * sxx - sx * sx;
  if (m < 2 || det == 0) return fit;
  fit.slope = (m * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / m;
  return fit;
}

inline CltTable clt_table(Family f, std::vector<int> n_values, int min_n = 10, int fit_min = 20) {
  if (n_values.empty()) throw domain_error("clt_table needs at least one n");
  std::sort(n_values.begin(), n_values.end());
  n_values.erase(std::unique(n_values.begin(), n_values.end()), n_values.end());
  if (n_values.front() < std::max(min_n, min_row(f)))
    throw domain_error("clt_table: n = " + std::to_string(n_values.front()) + " is below the minimum " +
                       std::to_string(std::max(min_n, min_row(f))));
  const CountTriangle t = descent_triangle(f, n_values.back());
  CltTable out{f, {}, {}, 0};
  for (int n : n_values) {
    const ExactPmf pmf = triangle_row_pmf(t, n);
    const auto rep = central_moments(pmf, n);
    CltRecord r;
    r.n = n;
    r.mean = rep.mean.get_d();
    if (sgn(rep.variance) <= 0) {
      r.degenerate = true;
      r.K = std::numeric_limits<double>::quiet_NaN();
      r.scaled = r.K;
      r.warning = "zero variance, excluded";
    } else {
      r.sd = std::sqrt(rep.variance.get_d());
      r.K = kolmogorov_distance(pmf);
      r.scaled = std::pow(static_cast<double>(n), rate_exponent(f)) * r.K;
      out.max_scaled = std::max(out.max_scaled, r.scaled);
    }
    out.records.push_back(std::move(r));
  }
  out.fit = fit_log_log(out.records, fit_min);
  return out;
}

enum class Identity { stan1, stan2, derangement_sum, fibonacci_pmf };

inline constexpr Identity kAllIdentities[] = {Identity::stan1, Identity::stan2,
                                              Identity::derangement_sum, Identity::fibonacci_pmf};

inline std::string_view to_string(Identity id) {
  switch (id) {
    case Identity::stan1: return "stan1";
    case Identity::stan2: return "stan2";
    case Identity::derangement_sum: return "derangement-sum";
    case Identity::fibonacci_pmf: return "fibonacci-pmf";
  }
  throw domain_error("unknown identity");
}

inline Identity parse_identity(std::string_view name) {
  std::string norm(name);
  std::replace(norm.begin(), norm.end(), '_', '-');
  for (Identity id : kAllIdentities)
    if (to_string(id) == norm) return id;
  throw domain_error("unknown identity '" + std::string(name) + "'");
}

struct IdentityReport {
  Identity which;
  int n = 0;
  std::vector<Rational> lhs;
  std::vector<Rational> rhs;
  bool holds = false;
  int offset_used = 0;
};

inline constexpr int kDefaultIdentityBudget = 22;

/// Left side by enumerating compositions of n into parts 1 and 2; right side
/// from counting sequences or the alternating factorial series. For the two
/// product identities the right side is tried at index n and then n + 1 and
/// the first match is reported.
inline IdentityReport identity_check(Identity which, int n, int budget = kDefaultIdentityBudget) {
  if (n < 1) throw domain_error("identities start at n = 1");
  if (n > budget)
    throw budget_error("n = " + std::to_string(n) + " exceeds the enumeration budget " +
                       std::to_string(budget));
  IdentityReport rep{which, n, {}, {}, false, 0};
  const auto comps = enumerate_compositions(n, 2);
  switch (which) {
    case Identity::stan1:
    case Identity::stan2: {
      const bool squared = which == Identity::stan2;
      Integer total = 0;
      for (const auto& c : comps) {
        Integer prod = 1;
        int start = 1;
        for (int a : c.parts) {
          if (a == 2) prod *= squared ? start * start : start;
          start += a;
        }
        total += prod;
      }
      rep.lhs = {Rational(total)};
      for (int offset = 0; offset <= 1; ++offset) {
        const Integer rhs = squared ? factorial(static_cast<unsigned long>(n + offset))
                                    : counting_sequence(Family::involution, n + offset).back();
        if (offset == 0) rep.rhs = {Rational(rhs)};
        if (rhs == total) {
          rep.rhs = {Rational(rhs)};
          rep.holds = true;
          rep.offset_used = offset;
          break;
        }
      }
      break;
    }
    case Identity::derangement_sum: {
      Rational total = 0;
      for (const auto& c : comps) {
        Rational prod = 1;
        int end = 0;
        for (int a : c.parts) {
          end += a;
          if (a == 2) prod /= end;
        }
        total += prod;
      }
      total /= n + 2;
      Rational series = 0;
      Integer fact = 1;
      for (int k = 0; k <= n + 2; ++k) {
        if (k > 0) fact *= k;
        series += Rational(k % 2 == 0 ? 1 : -1, 1) / Rational(fact);
      }
      rep.lhs = {total};
      rep.rhs = {series};
      rep.holds = total == series;
      break;
    }
    case Identity::fibonacci_pmf: {
      const ProcessModel model(ProcessKind::fibonacci, n);
      const JumpRule rule = model.jump_rule();
      const auto f = counting_sequence(Family::fibonacci, n);
      rep.lhs.assign(static_cast<std::size_t>(n / 2 + 1), Rational(0));
      for (const auto& c : comps) {
        const auto twos = static_cast<std::size_t>(std::count(c.parts.begin(), c.parts.end(), 2));
        rep.lhs[twos] += composition_probability(rule, c);
      }
      for (int k = 0; k <= n / 2; ++k) {
        Rational r(binomial(static_cast<unsigned long>(n - k), static_cast<unsigned long>(k)),
                   f[static_cast<std::size_t>(n)]);
        r.canonicalize();
        rep.rhs.push_back(r);
      }
      rep.holds = rep.lhs == rep.rhs;
      break;
    }
  }
  return rep;
}

struct ConditionRow {
  int i = 0;
  double second;  // sqrt(i) * || E[Y^2|F] - 1 ||_p
  double third;   // i^{1/(2p')} * || E[Y^3|F] ||_{p'}
  double fourth;  // sup E[Y^4|F]
};

/// Norms of the standardized conditional moments of X_{i,order}, taken over
/// the exact law of the source value at stage i - order.
inline std::vector<ConditionRow> condition_scan(ProcessKind k, int order, int i_lo, int i_hi,
                                                double p, double p_prime) {
  if (!(p > 1) || !(p_prime > 1))
    throw invalid_exponent_error("condition scan exponents must exceed 1");
  if (k == ProcessKind::fibonacci || (k == ProcessKind::excedance && order == 2))
    throw degenerate_error("this jump has identically zero differences");
  if (i_lo > i_hi) throw domain_error("empty scan range");
  const Family f = family_of(k);
  const CountTriangle t = descent_triangle(f, std::max(i_hi, min_row(f)));
  std::vector<ConditionRow> rows;
  for (int i = i_lo; i <= i_hi; ++i) {
    const int j = i - order;
    ExactPmf src;
    if (j == 0) {
      src.offset = 0;
      src.weights = {Rational(1)};
    } else {
      src = triangle_row_pmf(t, j);
    }
    const Rational c = centering_offset(k, i, order);
    struct Cell {
      Rational prob, m2, m3, m4;
    };
    std::vector<Cell> cells;
    Rational sigma2 = 0;
    for (std::size_t s = 0; s < src.weights.size(); ++s) {
      if (sgn(src.weights[s]) == 0) continue;
      const Rational w = Rational(src.offset + static_cast<long>(s)) - c;
      Cell cell{src.weights[s], conditional_moment(k, i, order, w, 2),
                conditional_moment(k, i, order, w, 3), conditional_moment(k, i, order, w, 4)};
      sigma2 += cell.prob * cell.m2;
      cells.push_back(std::move(cell));
    }
    if (sgn(sigma2) <= 0) throw degenerate_error("zero variance at stage " + std::to_string(i));
    const double sd = std::sqrt(sigma2.get_d());
    double acc2 = 0, acc3 = 0, sup4 = 0;
    for (const auto& cell : cells) {
      const double prob = cell.prob.get_d();
      const double dev = Rational(cell.m2 / sigma2 - 1).get_d();
      const double m3 = cell.m3.get_d() / (sd * sd * sd);
      const double m4 = Rational(cell.m4 / (sigma2 * sigma2)).get_d();
      acc2 += prob * std::pow(std::abs(dev), p);
      acc3 += prob * std::pow(std::abs(m3), p_prime);
      sup4 = std::max(sup4, m4);
    }
    ConditionRow row;
    row.i = i;
    row.second = std::sqrt(static_cast<double>(i)) * std::pow(acc2, 1.0 / p);
    row.third = std::pow(static_cast<double>(i), 1.0 / (2 * p_prime)) * std::pow(acc3, 1.0 / p_prime);
    row.fourth = sup4;
    rows.push_back(row);
  }
  return rows;
}

struct PsiVarianceReport {
  Rational var_t;
  Rational var_psi;
  bool holds = false;
};

inline constexpr int kPsiEnumerationBudget = 20;

/// Exact Var(T_n) and Var(psi(T_n)) over all 2^(n-1) words, where position p
/// of the word is a two-jump with probability specs[p-1].p. Position 1 is
/// always a one-jump, so its summand is constant and both sums start at 2.
inline PsiVarianceReport psi_variance_check(std::span<const BernoulliSpec> specs, int n) {
  if (n < 1) throw domain_error("psi_variance_check needs n >= 1");
  if (n > kPsiEnumerationBudget)
    throw budget_error("exact enumeration over 2^(n-1) words is capped at n = " +
                       std::to_string(kPsiEnumerationBudget));
  if (specs.size() < static_cast<std::size_t>(n))
    throw index_error("need " + std::to_string(n) + " specs, got " + std::to_string(specs.size()));
  for (int pos = 2; pos <= n; ++pos) {
    const auto& s = specs[static_cast<std::size_t>(pos - 1)];
    validate_spec(s);
    if (sgn(s.mean()) != 0)
      throw precondition_error("spec at position " + std::to_string(pos) + " has mean " +
                               s.mean().get_str() + ", the comparison needs zero-mean summands");
  }
  Rational et = 0, et2 = 0, ep = 0, ep2 = 0;
  JumpWord word;
  word.letters.assign(static_cast<std::size_t>(n), 1);
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    Rational prob = 1, t = 0;
    for (int pos = 2; pos <= n; ++pos) {
      const bool two = (mask >> (pos - 2)) & 1U;
      const auto& s = specs[static_cast<std::size_t>(pos - 1)];
      word.letters[static_cast<std::size_t>(pos - 1)] = two ? 2 : 1;
      prob *= two ? s.p : 1 - s.p;
      t += two ? s.a : s.b;
    }
    if (sgn(prob) == 0) continue;
    const Composition c = discard_map(word);
    Rational psi = 0;
    int end = 0;
    for (int a : c.parts) {
      end += a;
      if (end < 2) continue;
      const auto& s = specs[static_cast<std::size_t>(end - 1)];
      psi += a == 2 ? s.a : s.b;
    }
    et += prob * t;
    et2 += prob * t * t;
    ep += prob * psi;
    ep2 += prob * psi * psi;
  }
  PsiVarianceReport rep;
  rep.var_t = et2 - et * et;
  rep.var_psi = ep2 - ep * ep;
  rep.holds = rep.var_psi <= rep.var_t;
  return rep;
}

}  // namespace descent
