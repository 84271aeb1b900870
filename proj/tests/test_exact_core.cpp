#include <gtest/gtest.h>

#include "descent/descent.hpp"
#include "oracles.hpp"

using namespace descent;

namespace {

std::vector<Integer> ints(std::initializer_list<long> xs) {
  std::vector<Integer> out;
  for (long x : xs) out.emplace_back(x);
  return out;
}

std::vector<Integer> row_of(const CountTriangle& t, int n) {
  const auto r = t.row(n);
  return {r.begin(), r.end()};
}

}  // namespace

TEST(CountingSequence, InvolutionRowSum) {
  EXPECT_EQ(counting_sequence(Family::involution, 6).back(), 76);
}

TEST(CountingSequence, DerangementRowSum) {
  EXPECT_EQ(counting_sequence(Family::derangement, 4).back(), 9);
}

TEST(CountingSequence, FibonacciInitialCondition) {
  EXPECT_EQ(counting_sequence(Family::fibonacci, 1), ints({1, 1}));
}

TEST(CountingSequence, BelowMinimumRowNamesFamily) {
  try {
    counting_sequence(Family::derangement, 1);
    FAIL();
  } catch (const domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("derangement"), std::string::npos);
  }
}

TEST(CountingSequence, InvolutionGrowthRatio) {
  const auto seq = counting_sequence(Family::involution, 501);
  for (int n = 1; n <= 500; ++n) {
    Rational ratio(seq[static_cast<std::size_t>(n + 1)], seq[static_cast<std::size_t>(n)]);
    ratio.canonicalize();
    // sqrt(n+1) <= r  <=>  r^2 >= n+1, and r <= sqrt(n+1) + 1  <=>  (r-1)^2 <= n+1 given r >= 1.
    EXPECT_GE(ratio * ratio, n + 1) << n;
    const Rational shifted = ratio - 1;
    EXPECT_LE(shifted * shifted, n + 1) << n;
  }
}

TEST(CountingSequence, DerangementsNearestToFactorialOverE) {
  const auto d = counting_sequence(Family::derangement, 30);
  for (int n = 1; n <= 30; ++n) {
    // n!/e lies between consecutive partial sums of n! * sum (-1)^k/k!; with 40
    // terms the truncation error is far below 1/4.
    Rational approx = 0;
    Integer fact = 1;
    for (int k = 0; k <= 40; ++k) {
      if (k > 0) fact *= k;
      approx += Rational(k % 2 == 0 ? 1 : -1) / Rational(fact);
    }
    approx *= Rational(factorial(static_cast<unsigned long>(n)));
    const Rational diff = approx - Rational(d[static_cast<std::size_t>(n)]);
    EXPECT_LT(abs(diff), Rational(1, 2)) << n;
  }
}

TEST(DescentTriangle, InvolutionFigureRows) {
  const auto t = descent_triangle(Family::involution, 6);
  EXPECT_EQ(row_of(t, 1), ints({1}));
  EXPECT_EQ(row_of(t, 2), ints({1, 1}));
  EXPECT_EQ(row_of(t, 3), ints({1, 2, 1}));
  EXPECT_EQ(row_of(t, 4), ints({1, 4, 4, 1}));
  EXPECT_EQ(row_of(t, 5), ints({1, 6, 12, 6, 1}));
  EXPECT_EQ(row_of(t, 6), ints({1, 9, 28, 28, 9, 1}));
}

TEST(DescentTriangle, DerangementFigureRows) {
  const auto t = descent_triangle(Family::derangement, 7);
  EXPECT_EQ(row_of(t, 2), ints({1}));
  EXPECT_EQ(row_of(t, 3), ints({2, 0}));
  EXPECT_EQ(row_of(t, 4), ints({4, 4, 1}));
  EXPECT_EQ(row_of(t, 5), ints({8, 24, 12, 0}));
  EXPECT_EQ(row_of(t, 6), ints({16, 104, 120, 24, 1}));
  EXPECT_EQ(row_of(t, 7), ints({32, 392, 896, 480, 54, 0}));
}

TEST(DescentTriangle, SmallRowsFromEnumeration) {
  EXPECT_EQ(row_of(descent_triangle(Family::fibonacci, 4), 4), ints({1, 3, 1}));
  EXPECT_EQ(row_of(descent_triangle(Family::excedance, 3), 3), ints({1, 1}));
  EXPECT_EQ(row_of(descent_triangle(Family::excedance, 5), 5), ints({1, 21, 21, 1}));
  EXPECT_EQ(row_of(descent_triangle(Family::eulerian, 5), 5), ints({1, 26, 66, 26, 1}));
}

TEST(DescentTriangle, MatchesBruteForceEnumeration) {
  for (Family f : kAllFamilies) {
    const int top = f == Family::fibonacci ? 14 : 9;
    const auto t = descent_triangle(f, top);
    for (int n = min_row(f); n <= top; ++n) EXPECT_EQ(row_of(t, n), oracle::brute_row(f, n)) << to_string(f) << n;
  }
}

TEST(DescentTriangle, RowSumsFollowCountingSequences) {
  for (Family f : kAllFamilies) {
    const auto t = descent_triangle(f, 60);
    const auto seq = counting_sequence(f, 60);
    for (int n = t.n_min(); n <= 60; ++n) EXPECT_EQ(t.row_sum(n), seq[static_cast<std::size_t>(n)]);
  }
}

TEST(DescentTriangle, InvolutionRowsPalindromicAndUnimodal) {
  const auto t = descent_triangle(Family::involution, 200);
  for (int n = 1; n <= 200; ++n) {
    const auto r = t.row(n);
    ASSERT_EQ(static_cast<int>(r.size()), n);
    for (std::size_t k = 0; k < r.size(); ++k) EXPECT_EQ(r[k], r[r.size() - 1 - k]);
    const std::size_t peak = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    for (std::size_t k = 0; k < peak; ++k) EXPECT_LE(r[k], r[k + 1]);
    for (std::size_t k = peak; k + 1 < r.size(); ++k) EXPECT_GE(r[k], r[k + 1]);
  }
}

TEST(DescentTriangle, DerangementRowsUnimodalWithCentralPeak) {
  const auto t = descent_triangle(Family::derangement, 200);
  for (int n = 2; n <= 200; ++n) {
    const auto r = t.row(n);
    const auto peak = std::max_element(r.begin(), r.end()) - r.begin();
    const long k_peak = peak + 1;
    EXPECT_LE(std::abs(2 * k_peak - (n - 1)), 2) << n;  // floor or ceil of (n-1)/2
    for (long k = 0; k < peak; ++k) EXPECT_LE(r[static_cast<std::size_t>(k)], r[static_cast<std::size_t>(k + 1)]);
    for (std::size_t k = static_cast<std::size_t>(peak); k + 1 < r.size(); ++k) EXPECT_GE(r[k], r[k + 1]);
  }
}

TEST(DescentTriangle, EntriesNonNegative) {
  for (Family f : kAllFamilies) {
    const auto t = descent_triangle(f, 80);
    for (int n = t.n_min(); n <= 80; ++n)
      for (const auto& c : t.row(n)) EXPECT_GE(sgn(c), 0);
  }
}

TEST(DescentTriangle, OutOfRowReadsZeroAndBadRowThrows) {
  const auto t = descent_triangle(Family::involution, 5);
  EXPECT_EQ(t.at(5, 7), 0);
  EXPECT_THROW(t.row(6), std::exception);
  EXPECT_THROW(descent_triangle(Family::excedance, 1), domain_error);
  EXPECT_THROW(parse_family("catalan"), domain_error);
}

TEST(TriangleRowPmf, InvolutionRowThree) {
  const auto pmf = triangle_row_pmf(descent_triangle(Family::involution, 3), 3);
  EXPECT_EQ(pmf.offset, 0);
  EXPECT_EQ(pmf.weights, (std::vector<Rational>{Rational(1, 4), Rational(1, 2), Rational(1, 4)}));
}

TEST(TriangleRowPmf, DerangementRowTwoIsPointMass) {
  const auto pmf = triangle_row_pmf(descent_triangle(Family::derangement, 2), 2);
  EXPECT_EQ(pmf.offset, 1);
  EXPECT_EQ(pmf.weights, std::vector<Rational>{Rational(1)});
}

TEST(TriangleRowPmf, FibonacciRowFour) {
  const auto pmf = triangle_row_pmf(descent_triangle(Family::fibonacci, 4), 4);
  EXPECT_EQ(pmf.weights, (std::vector<Rational>{Rational(1, 5), Rational(3, 5), Rational(1, 5)}));
}

TEST(TriangleRowPmf, FibonacciPmfIsBinomialOverRowCount) {
  const auto f = counting_sequence(Family::fibonacci, 14);
  for (int n = 1; n <= 14; ++n) {
    const auto brute = oracle::fibonacci_counts(n);
    const auto pmf = triangle_row_pmf(descent_triangle(Family::fibonacci, n), n);
    for (int k = 0; k <= n / 2; ++k) {
      Rational expected(binomial(static_cast<unsigned long>(n - k), static_cast<unsigned long>(k)),
                        f[static_cast<std::size_t>(n)]);
      expected.canonicalize();
      EXPECT_EQ(pmf.at(k), expected);
      Rational counted(brute[static_cast<std::size_t>(k)], f[static_cast<std::size_t>(n)]);
      counted.canonicalize();
      EXPECT_EQ(pmf.at(k), counted);
    }
  }
}

TEST(TriangleRowPmf, NormalizedForAllFamilies) {
  for (Family f : kAllFamilies) {
    const auto t = descent_triangle(f, 40);
    for (int n = t.n_min(); n <= 40; ++n) EXPECT_TRUE(triangle_row_pmf(t, n).is_normalized());
  }
}

TEST(ExactPmf, ZeroRowIsDegenerate) {
  const std::vector<Integer> zeros(3, Integer(0));
  EXPECT_THROW(ExactPmf::from_counts(0, zeros), degenerate_error);
}
