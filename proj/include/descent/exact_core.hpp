#pragma once

// Exact descent-distribution triangles and counting sequences.
//
// Every family here is a triangular array T(n, k) of nonnegative integers
// produced bottom-up by a short linear recurrence in n. Rows are stored
// densely from the family's minimum descent index; anything outside a row
// reads as zero, which is also how the recurrences treat out-of-range terms.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "descent/types.hpp"

namespace descent {

enum class Family { eulerian, involution, derangement, excedance, fibonacci };

inline constexpr Family kAllFamilies[] = {Family::eulerian, Family::involution,
                                          Family::derangement, Family::excedance,
                                          Family::fibonacci};

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::eulerian: return "eulerian";
    case Family::involution: return "involution";
    case Family::derangement: return "derangement";
    case Family::excedance: return "excedance";
    case Family::fibonacci: return "fibonacci";
  }
  throw domain_error("unknown family tag");
}

inline Family parse_family(std::string_view name) {
  for (Family f : kAllFamilies)
    if (to_string(f) == name) return f;
  throw domain_error("unknown family '" + std::string(name) + "'");
}

/// Smallest row index n for which the family is defined.
inline int min_row(Family f) {
  switch (f) {
    case Family::derangement:
    case Family::excedance: return 2;
    case Family::eulerian:
    case Family::involution:
    case Family::fibonacci: return 1;
  }
  throw domain_error("unknown family tag");
}

/// Smallest stored statistic value k.
inline int min_descent(Family f) {
  switch (f) {
    case Family::derangement:
    case Family::excedance: return 1;
    case Family::eulerian:
    case Family::involution:
    case Family::fibonacci: return 0;
  }
  throw domain_error("unknown family tag");
}

/// Largest stored statistic value k in row n (derangement rows keep their
/// trailing zero entries, so the bound is n-1 for every permutation family).
inline int max_descent(Family f, int n) {
  switch (f) {
    case Family::fibonacci: return n / 2;
    case Family::eulerian:
    case Family::involution:
    case Family::derangement:
    case Family::excedance: return std::max(n - 1, min_descent(f));
  }
  throw domain_error("unknown family tag");
}

namespace detail {

inline void require_rows(Family f, int n_max) {
  if (n_max < min_row(f))
    throw domain_error(std::string(to_string(f)) + ": n_max " + std::to_string(n_max) +
                       " is below the minimum row " + std::to_string(min_row(f)));
}

inline const Integer& zero_integer() {
  static const Integer z = 0;
  return z;
}

// Row accessor for absolute-k working rows.
inline const Integer& cell(const std::vector<Integer>& row, long k) {
  if (k < 0 || k >= static_cast<long>(row.size())) return zero_integer();
  return row[static_cast<std::size_t>(k)];
}

// n! * sum_{i<=n} (-1)^i / i!, evaluated with integers only.
inline Integer derangements_closed_form(unsigned long n) {
  Integer sum = 0;
  Integer falling = 1;  // n!/i! for the current i, walking i = n .. 0
  for (unsigned long i = n + 1; i-- > 0;) {
    if (i % 2 == 0)
      sum += falling;
    else
      sum -= falling;
    if (i > 0) falling *= i;
  }
  return sum;
}

}  // namespace detail

/// Row sums for the family from index 0 through n_max: i_n for involutions,
/// d_n for derangements and excedances, f_n (f_0 = f_1 = 1) for Fibonacci
/// permutations and n! for the Eulerian triangle.
inline std::vector<Integer> counting_sequence(Family f, int n_max) {
  detail::require_rows(f, n_max);
  const auto size = static_cast<std::size_t>(n_max) + 1;
  std::vector<Integer> seq(size);
  seq[0] = 1;
  switch (f) {
    case Family::eulerian:
      for (std::size_t n = 1; n < size; ++n) seq[n] = seq[n - 1] * n;
      break;
    case Family::involution:
      seq[1] = 1;
      for (std::size_t n = 2; n < size; ++n) seq[n] = seq[n - 1] + (n - 1) * seq[n - 2];
      break;
    case Family::derangement:
    case Family::excedance:
      seq[1] = 0;
      for (std::size_t n = 2; n < size; ++n) {
        seq[n] = (n - 1) * (seq[n - 1] + seq[n - 2]);
        if (seq[n] != detail::derangements_closed_form(n))
          throw std::logic_error("derangement recurrence disagrees with the closed form at n=" +
                                 std::to_string(n));
      }
      break;
    case Family::fibonacci:
      seq[1] = 1;
      for (std::size_t n = 2; n < size; ++n) seq[n] = seq[n - 1] + seq[n - 2];
      break;
  }
  return seq;
}

class CountTriangle;
CountTriangle descent_triangle(Family f, int n_max);

/// Rows n_min..n_max of a family's count triangle.
class CountTriangle {
 public:
  Family family() const noexcept { return family_; }
  int n_min() const noexcept { return min_row(family_); }
  int n_max() const noexcept { return n_min() + static_cast<int>(rows_.size()) - 1; }
  int k_min() const noexcept { return min_descent(family_); }
  int k_max(int n) const { return max_descent(family_, n); }

  bool has_row(int n) const noexcept { return n >= n_min() && n <= n_max(); }

  /// Dense row, element j holds T(n, k_min + j).
  std::span<const Integer> row(int n) const {
    check_row(n);
    return rows_[static_cast<std::size_t>(n - n_min())];
  }

  Integer at(int n, int k) const {
    auto r = row(n);
    const int j = k - k_min();
    if (j < 0 || j >= static_cast<int>(r.size())) return 0;
    return r[static_cast<std::size_t>(j)];
  }

  Integer row_sum(int n) const {
    Integer s = 0;
    for (const auto& c : row(n)) s += c;
    return s;
  }

 private:
  friend CountTriangle descent_triangle(Family f, int n_max);
  explicit CountTriangle(Family f) : family_(f) {}

  void check_row(int n) const {
    if (!has_row(n))
      throw index_error(std::string(to_string(family_)) + " triangle has no row " +
                        std::to_string(n));
  }

  Family family_;
  std::vector<std::vector<Integer>> rows_;
};

namespace detail {

// Working rows are indexed by absolute k starting at 0, one row per n >= 0.

inline std::vector<std::vector<Integer>> eulerian_rows(int n_max) {
  std::vector<std::vector<Integer>> rows(static_cast<std::size_t>(n_max) + 1);
  rows[0] = {1};
  if (n_max >= 1) rows[1] = {1};
  for (long n = 1; n < n_max; ++n) {
    const auto& prev = rows[static_cast<std::size_t>(n)];
    std::vector<Integer> next(static_cast<std::size_t>(n + 1));
    for (long k = 0; k <= n; ++k)
      next[static_cast<std::size_t>(k)] = (k + 1) * cell(prev, k) + (n - k + 1) * cell(prev, k - 1);
    rows[static_cast<std::size_t>(n + 1)] = std::move(next);
  }
  return rows;
}

inline std::vector<std::vector<Integer>> involution_rows(int n_max) {
  std::vector<std::vector<Integer>> rows(static_cast<std::size_t>(std::max(n_max, 1)) + 1);
  rows[0] = {1};  // the empty involution
  rows[1] = {1};
  for (long m = 2; m <= n_max; ++m) {
    const long n = m - 2;
    const auto& r1 = rows[static_cast<std::size_t>(m - 1)];
    const auto& r0 = rows[static_cast<std::size_t>(m - 2)];
    std::vector<Integer> next(static_cast<std::size_t>(m));
    Integer acc;
    for (long k = 0; k < m; ++k) {
      acc = (k + 1) * cell(r1, k);
      acc += (n - k + 2) * cell(r1, k - 1);
      acc += ((k + 1) * (k + 1) + n) * cell(r0, k);
      acc += (2 * k * (n - k + 1) - n + 1) * cell(r0, k - 1);
      acc += ((n - k + 2) * (n - k + 2) + n) * cell(r0, k - 2);
      if (!mpz_divisible_ui_p(acc.get_mpz_t(), static_cast<unsigned long>(m)))
        throw std::logic_error("involution recurrence produced a non-integer entry");
      mpz_divexact_ui(next[static_cast<std::size_t>(k)].get_mpz_t(), acc.get_mpz_t(),
                      static_cast<unsigned long>(m));
    }
    rows[static_cast<std::size_t>(m)] = std::move(next);
  }
  return rows;
}

inline std::vector<std::vector<Integer>> derangement_rows(int n_max) {
  std::vector<std::vector<Integer>> rows(static_cast<std::size_t>(std::max(n_max, 1)) + 1);
  rows[0] = {1};  // the empty permutation is a derangement with no descents
  rows[1] = {0};
  for (long n = 2; n <= n_max; ++n) {
    const auto& r1 = rows[static_cast<std::size_t>(n - 1)];
    const auto& r2 = rows[static_cast<std::size_t>(n - 2)];
    std::vector<Integer> next(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
      auto& out = next[static_cast<std::size_t>(k)];
      out = (k + 1) * cell(r1, k);
      out += (n - k - 1) * cell(r1, k - 1);
      out += k * cell(r2, k - 1);
      out += (n - k) * cell(r2, k - 2);
    }
    rows[static_cast<std::size_t>(n)] = std::move(next);
  }
  return rows;
}

inline std::vector<std::vector<Integer>> excedance_rows(int n_max) {
  std::vector<std::vector<Integer>> rows(static_cast<std::size_t>(std::max(n_max, 1)) + 1);
  rows[0] = {1};
  rows[1] = {0};
  for (long n = 2; n <= n_max; ++n) {
    const auto& r1 = rows[static_cast<std::size_t>(n - 1)];
    const auto& r2 = rows[static_cast<std::size_t>(n - 2)];
    std::vector<Integer> next(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
      auto& out = next[static_cast<std::size_t>(k)];
      out = k * cell(r1, k);
      out += (n - k) * cell(r1, k - 1);
      out += (n - 1) * cell(r2, k - 1);
    }
    rows[static_cast<std::size_t>(n)] = std::move(next);
  }
  return rows;
}

inline std::vector<std::vector<Integer>> fibonacci_rows(int n_max) {
  std::vector<std::vector<Integer>> rows(static_cast<std::size_t>(n_max) + 1);
  for (long m = 0; m <= n_max; ++m) {
    std::vector<Integer> r(static_cast<std::size_t>(m / 2 + 1));
    for (long k = 0; k <= m / 2; ++k)
      r[static_cast<std::size_t>(k)] =
          binomial(static_cast<unsigned long>(m - k), static_cast<unsigned long>(k));
    rows[static_cast<std::size_t>(m)] = std::move(r);
  }
  return rows;
}

}  // namespace detail

/// Builds rows n_min..n_max of the family's triangle with exact integers.
inline CountTriangle descent_triangle(Family f, int n_max) {
  detail::require_rows(f, n_max);
  std::vector<std::vector<Integer>> work;
  switch (f) {
    case Family::eulerian: work = detail::eulerian_rows(n_max); break;
    case Family::involution: work = detail::involution_rows(n_max); break;
    case Family::derangement: work = detail::derangement_rows(n_max); break;
    case Family::excedance: work = detail::excedance_rows(n_max); break;
    case Family::fibonacci: work = detail::fibonacci_rows(n_max); break;
    default: throw domain_error("unknown family tag");
  }
  CountTriangle t(f);
  const int k0 = min_descent(f);
  for (int n = min_row(f); n <= n_max; ++n) {
    const int k1 = max_descent(f, n);
    std::vector<Integer> row(static_cast<std::size_t>(k1 - k0 + 1));
    for (int k = k0; k <= k1; ++k)
      row[static_cast<std::size_t>(k - k0)] = detail::cell(work[static_cast<std::size_t>(n)], k);
    t.rows_.push_back(std::move(row));
  }
  return t;
}

/// Integer-supported probability mass function with exact weights;
/// weights[j] is the probability of offset + j.
struct ExactPmf {
  long offset = 0;
  std::vector<Rational> weights;

  long min_support() const noexcept { return offset; }
  long max_support() const noexcept { return offset + static_cast<long>(weights.size()) - 1; }

  Rational at(long k) const {
    const long j = k - offset;
    if (j < 0 || j >= static_cast<long>(weights.size())) return 0;
    return weights[static_cast<std::size_t>(j)];
  }

  bool is_normalized() const {
    Rational total = 0;
    for (const auto& w : weights) {
      if (sgn(w) < 0) return false;
      total += w;
    }
    return total == 1;
  }

  friend bool operator==(const ExactPmf&, const ExactPmf&) = default;

  static ExactPmf from_counts(long offset, std::span<const Integer> counts) {
    Integer total = 0;
    for (const auto& c : counts) total += c;
    if (total == 0) throw degenerate_error("row sums to zero; no distribution to normalize");
    ExactPmf pmf;
    pmf.offset = offset;
    pmf.weights.reserve(counts.size());
    for (const auto& c : counts) {
      Rational w(c, total);
      w.canonicalize();
      pmf.weights.push_back(std::move(w));
    }
    return pmf;
  }
};

/// Normalized row n of a triangle: weight at k is T(n,k) / row sum.
inline ExactPmf triangle_row_pmf(const CountTriangle& t, int n) {
  return ExactPmf::from_counts(t.k_min(), t.row(n));
}

}  // namespace descent
