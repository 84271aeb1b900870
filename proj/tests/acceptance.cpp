// One pass/fail line per acceptance criterion. Exit status is the number of
// failed criteria. Regression constants were frozen from the first exact run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "descent/descent.hpp"
#include "oracles.hpp"

using namespace descent;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double x) { return format_double(x); }

// Frozen regression constants.
constexpr double kRegressionTolerance = 1e-9;
constexpr double kInvolutionMaxScaledK = 0.68435946284938098;
constexpr double kDerangementMaxScaledK = 0.41318617012440834;
constexpr double kInvolutionSlopeCeiling = -0.45;
struct ScanConstants {
  ProcessKind kind;
  int order;
  double second, third, fourth;
};
constexpr ScanConstants kScanMaxima[] = {
    {ProcessKind::involution, 1, 0.2186674787033081, 0.86064386789706204, 1.4660002453705367},
    {ProcessKind::involution, 2, 0.1398407679426793, 0.78441307792235926, 2.3377479046480247},
    {ProcessKind::derangement, 1, 0.25075990811676796, 0.95865643479000173, 1.4940217402208567},
    {ProcessKind::derangement, 2, 0.16444264525029209, 0.79517018488990399, 1.4348207841919636},
};

bool matches_frozen(double value, double frozen) { return std::abs(value - frozen) <= kRegressionTolerance; }

std::vector<Integer> ints(std::initializer_list<long> xs) {
  std::vector<Integer> out;
  for (long x : xs) out.emplace_back(x);
  return out;
}

std::vector<Integer> row_of(const CountTriangle& t, int n) {
  const auto r = t.row(n);
  return {r.begin(), r.end()};
}

Outcome golden_triangles() {
  const auto inv = descent_triangle(Family::involution, 6);
  const auto der = descent_triangle(Family::derangement, 7);
  const std::vector<std::vector<Integer>> figure1 = {ints({1}), ints({1, 1}), ints({1, 2, 1}), ints({1, 4, 4, 1}),
                                                     ints({1, 6, 12, 6, 1}), ints({1, 9, 28, 28, 9, 1})};
  const std::vector<std::vector<Integer>> figure2 = {ints({1}),           ints({2, 0}),
                                                     ints({4, 4, 1}),     ints({8, 24, 12, 0}),
                                                     ints({16, 104, 120, 24, 1}), ints({32, 392, 896, 480, 54, 0})};
  Outcome o;
  int bad = 0;
  for (int n = 1; n <= 6; ++n) bad += row_of(inv, n) != figure1[static_cast<std::size_t>(n - 1)];
  for (int n = 2; n <= 7; ++n) bad += row_of(der, n) != figure2[static_cast<std::size_t>(n - 2)];
  o.pass = bad == 0;
  o.detail = std::to_string(12 - bad) + "/12 rows equal";
  return o;
}

Outcome oracle_equivalence() {
  int rows = 0, bad = 0;
  for (Family f : kAllFamilies) {
    const int top = f == Family::fibonacci ? 14 : 9;
    const auto t = descent_triangle(f, top);
    for (int n = min_row(f); n <= top; ++n, ++rows) bad += row_of(t, n) != oracle::brute_row(f, n);
  }
  return {bad == 0, std::to_string(rows - bad) + "/" + std::to_string(rows) + " rows match enumeration"};
}

Outcome exact_mean_laws() {
  int bad_mean = 0, bad_var = 0;
  Rational worst_slack = 1000000;
  for (const auto& row : moment_table(Family::involution, 1, 500)) {
    const int n = row.report.n;
    if (n <= 200 && row.report.mean != make_rational(n - 1, 2)) ++bad_mean;
    if (n >= 2) {
      const Rational slack = make_rational(17L * n - 4, 12) - row.report.variance;
      if (sgn(slack) < 0) ++bad_var;
      worst_slack = std::min(worst_slack, slack);
    }
  }
  return {bad_mean == 0 && bad_var == 0, "mean mismatches " + std::to_string(bad_mean) + ", variance bound violations " +
                                             std::to_string(bad_var) + ", min slack " + fmt(worst_slack.get_d())};
}

Outcome derangement_mean_asymptotic() {
  const auto t = descent_triangle(Family::derangement, 100);
  int bad = 0;
  double worst_ratio = 0;
  for (int n = 10; n <= 100; ++n) {
    const Rational mean = factorial_moment(triangle_row_pmf(t, n), 1);
    const Rational gap = abs(mean - (make_rational(n - 1, 2) + make_rational(1, 2L * n)));
    const double bound = std::exp(-n / 2.0);
    const double g = gap.get_d();
    worst_ratio = std::max(worst_ratio, g / bound);
    if (!(g <= bound)) ++bad;
  }
  return {bad == 0, "violations " + std::to_string(bad) + ", max gap/bound " + fmt(worst_ratio)};
}

Outcome martingale_structure() {
  long states = 0, bad = 0;
  for (ProcessKind k : kAllProcesses)
    for (int order = 1; order <= 2; ++order)
      for (int i = base_stage(k) + order; i <= 60; ++i) {
        if (order == 2 && i - base_stage(k) < 2) continue;
        const auto [lo, hi] = support_range(k, i - order);
        for (long s = lo; s <= hi; ++s) {
          const Rational w = Rational(s) - centering_offset(k, i, order);
          const auto law = martingale_difference_distribution(k, i, order, w);
          ++states;
          bool ok = law.mean() == 0;
          for (int r = 2; r <= 4; ++r) ok = ok && conditional_moment(k, i, order, w, r) == law.moment(r);
          bad += !ok;
        }
      }
  return {bad == 0, std::to_string(states - bad) + "/" + std::to_string(states) + " feasible states exact"};
}

Outcome reconstruction() {
  long nonzero = 0, total = 0;
  for (ProcessKind k : kAllProcesses) {
    const ProcessModel model(k, 100);
    const ProcessSampler sampler(model, 100);
    for (std::uint64_t r = 0; r < 10000; ++r, ++total) {
      auto rng = replicate_stream(20240601, r);
      Trajectory t = sampler(rng);
      t.decomposition = model.decompose(t);
      nonzero += sgn(reconstruct(t)) != 0 || !replay_consistent(t);
    }
  }
  return {nonzero == 0, std::to_string(total - nonzero) + "/" + std::to_string(total) + " residuals exactly 0"};
}

Outcome simulation_marginals() {
  int bad_exact = 0;
  for (ProcessKind k : kAllProcesses) {
    const ProcessModel model(k, 8);
    const auto t = descent_triangle(family_of(k), 8);
    for (int n = min_row(family_of(k)); n <= 8; ++n) {
      const auto exact = triangle_row_pmf(t, n);
      const auto law = oracle::enumerate_paths(model, n);
      const auto dp = model.path_expansion(n);
      for (long v = exact.min_support(); v <= exact.max_support(); ++v) {
        const auto it = law.find(v);
        const Rational walked = it == law.end() ? Rational(0) : it->second;
        bad_exact += walked != exact.at(v) || dp.at(v) != exact.at(v);
      }
    }
  }
  std::ostringstream detail;
  detail << "exact mismatches " << bad_exact << "; p-values";
  bool chi_ok = true;
  for (ProcessKind k : kAllProcesses) {
    const ProcessModel model(k, 32);
    const ProcessSampler sampler(model, 32);
    const auto exact = triangle_row_pmf(descent_triangle(family_of(k), 32), 32);
    std::vector<std::uint64_t> counts(exact.weights.size(), 0);
    for (std::uint64_t r = 0; r < 1000000; ++r) {
      auto rng = replicate_stream(7, r);
      ++counts[static_cast<std::size_t>(sampler.sample_final(rng) - exact.offset)];
    }
    const auto chi = oracle::chi_square(counts, exact.weights);
    chi_ok = chi_ok && chi.p_value >= 0.001;
    detail << ' ' << to_string(k) << '=' << fmt(chi.p_value);
  }
  return {bad_exact == 0 && chi_ok, detail.str()};
}

Outcome identities() {
  int bad = 0;
  for (int n = 1; n <= 20; ++n) bad += !identity_check(Identity::derangement_sum, n).holds;
  std::set<int> offsets;
  for (int n = 1; n <= 18; ++n)
    for (Identity id : {Identity::stan1, Identity::stan2}) {
      const auto rep = identity_check(id, n);
      bad += !rep.holds;
      offsets.insert(rep.offset_used);
    }
  const auto f = counting_sequence(Family::fibonacci, 14);
  for (int n = 1; n <= 14; ++n) {
    const auto rep = identity_check(Identity::fibonacci_pmf, n);
    const auto brute = oracle::fibonacci_counts(n);
    bool ok = rep.holds && rep.lhs.size() == brute.size();
    for (std::size_t k = 0; ok && k < brute.size(); ++k) {
      Rational counted(brute[k], f[static_cast<std::size_t>(n)]);
      counted.canonicalize();
      ok = rep.lhs[k] == counted;
    }
    bad += !ok;
  }
  std::string offs;
  for (int o : offsets) offs += (offs.empty() ? "" : ",") + std::to_string(o);
  return {bad == 0 && offsets.size() == 1, "failures " + std::to_string(bad) + ", offsets used {" + offs + "}"};
}

Outcome clt_rates() {
  const std::vector<int> ns = {16, 32, 64, 128, 256, 400};
  const auto inv = clt_table(Family::involution, ns);
  const auto der = clt_table(Family::derangement, ns);
  const bool inv_ok = matches_frozen(inv.max_scaled, kInvolutionMaxScaledK);
  const bool der_ok = matches_frozen(der.max_scaled, kDerangementMaxScaledK);
  const bool slope_ok = inv.fit.slope <= kInvolutionSlopeCeiling;
  return {inv_ok && der_ok && slope_ok, "max sqrt(n) K = " + fmt(inv.max_scaled) + ", max n^(1/3) K = " +
                                            fmt(der.max_scaled) + ", involution slope = " + fmt(inv.fit.slope)};
}

Outcome condition_scans() {
  bool ok = true;
  std::ostringstream detail;
  for (const auto& c : kScanMaxima) {
    const auto rows = condition_scan(c.kind, c.order, 10, 200, 2.0, 4.0 / 3.0);
    double m2 = 0, m3 = 0, m4 = 0;
    for (const auto& r : rows) {
      m2 = std::max(m2, r.second);
      m3 = std::max(m3, r.third);
      m4 = std::max(m4, r.fourth);
    }
    const bool finite = std::isfinite(m2) && std::isfinite(m3) && std::isfinite(m4);
    ok = ok && finite && matches_frozen(m2, c.second) && matches_frozen(m3, c.third) && matches_frozen(m4, c.fourth);
    detail << (detail.tellp() > 0 ? "; " : "") << to_string(c.kind) << " order " << c.order << " max (" << fmt(m2)
           << ", " << fmt(m3) << ", " << fmt(m4) << ")";
  }
  return {ok, detail.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("descent_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::string> commands = {
      "simulate --process derangement --n 40 --replicates 20000 --seed 11",
      "simulate --process involution --n 25 --replicates 3000 --seed 5 --record {record}",
      "simulate --process excedance --n 30 --replicates 5000 --seed 3 --format json",
      "clt --family involution --n-set 16,32,64,128",
      "decompose --process derangement --n 50 --seed 8",
  };
  int bad = 0, compared = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string reference, reference_record;
    for (int threads : {1, 2, 4, 7}) {
      const fs::path out = dir / ("out_" + std::to_string(c) + "_" + std::to_string(threads));
      const fs::path record = dir / ("rec_" + std::to_string(c) + "_" + std::to_string(threads));
      std::string args = commands[c];
      const auto slot = args.find("{record}");
      if (slot != std::string::npos) args.replace(slot, 8, record.string());
      const std::string cmd = std::string(DESCENT_CLI_PATH) + " " + args + " --threads " + std::to_string(threads) +
                              " --out " + out.string();
      if (std::system(cmd.c_str()) != 0) {
        ++bad;
        continue;
      }
      const std::string text = slurp(out), rec = slot != std::string::npos ? slurp(record) : std::string();
      if (threads == 1) {
        reference = text;
        reference_record = rec;
      } else {
        ++compared;
        bad += text != reference || rec != reference_record || text.empty();
      }
    }
  }
  fs::remove_all(dir);
  return {bad == 0, std::to_string(compared - bad) + "/" + std::to_string(compared) +
                        " multi-thread runs byte-identical to the single-thread run"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "golden triangles", 1, golden_triangles},
      {2, "oracle equivalence", 120, oracle_equivalence},
      {3, "exact mean laws", 60, exact_mean_laws},
      {4, "derangement mean asymptotic", 60, derangement_mean_asymptotic},
      {5, "martingale structure", 60, martingale_structure},
      {6, "reconstruction", 120, reconstruction},
      {7, "simulation marginals", 180, simulation_marginals},
      {8, "identities", 120, identities},
      {9, "clt rates", 300, clt_rates},
      {10, "condition scans", 180, condition_scans},
      {11, "determinism", 60, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", secs, c.budget_seconds);
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
              << timing << (in_time ? "" : ", over budget") << "]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed;
}
