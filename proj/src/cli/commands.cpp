#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "descent/descent.hpp"

namespace descent::cli {

namespace {

using Json = nlohmann::ordered_json;

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void write(std::ostream& out, char sep) const {
    write_row(out, header_, sep);
    for (const auto& r : rows_) write_row(out, r, sep);
  }

 private:
  static void write_row(std::ostream& out, const std::vector<std::string>& row, char sep) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << sep;
      out << row[j];
    }
    out << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

char separator(OutputFormat f) { return f == OutputFormat::tsv ? '\t' : ','; }

std::string join(const std::vector<Rational>& xs, char sep) {
  std::string s;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (j) s += sep;
    s += xs[j].get_str();
  }
  return s;
}

std::string parts_string(const Composition& c) {
  std::string s;
  for (std::size_t j = 0; j < c.parts.size(); ++j) {
    if (j) s += '+';
    s += std::to_string(c.parts[j]);
  }
  return s;
}

void emit_json(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

}  // namespace

int cmd_triangle(const RunConfig& cfg, const std::string& family, int n, std::ostream& out) {
  const Family f = parse_family(family);
  const CountTriangle t = descent_triangle(f, n);
  if (cfg.format == OutputFormat::json) {
    Json j;
    j["family"] = std::string(to_string(f));
    j["rows"] = Json::array();
    for (int m = t.n_min(); m <= t.n_max(); ++m) {
      Json row;
      row["n"] = m;
      row["k_min"] = t.k_min();
      row["counts"] = Json::array();
      for (const auto& c : t.row(m)) row["counts"].push_back(c.get_str());
      j["rows"].push_back(std::move(row));
    }
    emit_json(out, j);
    return kExitOk;
  }
  Table table({"n", "k", "count"});
  for (int m = t.n_min(); m <= t.n_max(); ++m) {
    int k = t.k_min();
    for (const auto& c : t.row(m)) table.add({std::to_string(m), std::to_string(k++), c.get_str()});
  }
  table.write(out, separator(cfg.format));
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const std::string& process, int n, std::uint64_t replicates,
                 const std::string& record_path, std::ostream& out) {
  const ProcessKind kind = parse_process_kind(process);
  const ProcessModel model(kind, n);
  const ProcessSampler sampler(model, n);
  const bool record = !record_path.empty();

  const unsigned threads = std::max(1U, std::min<unsigned>(cfg.threads, std::max<std::uint64_t>(replicates, 1)));
  struct Chunk {
    std::map<long, std::uint64_t> counts;
    std::string audit;
    bool residual_ok = true;
  };
  std::vector<Chunk> chunks(threads);
  auto work = [&](unsigned c) {
    const std::uint64_t lo = replicates * c / threads, hi = replicates * (c + 1) / threads;
    auto& chunk = chunks[c];
    std::ostringstream audit;
    for (std::uint64_t r = lo; r < hi; ++r) {
      auto rng = replicate_stream(cfg.master_seed, r);
      if (!record) {
        ++chunk.counts[sampler.sample_final(rng)];
        continue;
      }
      Trajectory t = sampler(rng);
      ++chunk.counts[t.final_value];
      t.decomposition = model.decompose(t);
      const Rational residual = reconstruct(t);
      if (sgn(residual) != 0) chunk.residual_ok = false;
      std::vector<Rational> xs;
      for (const auto& term : t.decomposition->terms) xs.push_back(term.difference);
      audit << r << ',' << t.final_value << ',' << parts_string(t.decomposition->composition) << ','
            << join(xs, ' ') << ',' << residual.get_str() << '\n';
    }
    chunk.audit = audit.str();
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned c = 0; c < threads; ++c) pool.emplace_back(work, c);
    for (auto& th : pool) th.join();
  }

  std::map<long, std::uint64_t> counts;
  bool residual_ok = true;
  for (const auto& c : chunks) {
    for (const auto& [v, k] : c.counts) counts[v] += k;
    residual_ok = residual_ok && c.residual_ok;
  }
  if (record) {
    std::ofstream audit(record_path, std::ios::binary);
    if (!audit) throw std::runtime_error("cannot open record file " + record_path);
    audit << "replicate,final,composition,differences,residual\n";
    for (const auto& c : chunks) audit << c.audit;
  }

  const ExactPmf exact = triangle_row_pmf(descent_triangle(family_of(kind), n), n);
  const double total = static_cast<double>(replicates);
  if (cfg.format == OutputFormat::json) {
    Json j;
    j["process"] = std::string(to_string(kind));
    j["n"] = n;
    j["replicates"] = replicates;
    j["seed"] = cfg.master_seed;
    j["rows"] = Json::array();
    for (long v = exact.min_support(); v <= exact.max_support(); ++v) {
      const auto it = counts.find(v);
      const std::uint64_t k = it == counts.end() ? 0 : it->second;
      j["rows"].push_back({{"value", v},
                           {"count", k},
                           {"empirical", total > 0 ? k / total : 0.0},
                           {"exact", exact.at(v).get_str()}});
    }
    if (record) j["residuals_zero"] = residual_ok;
    emit_json(out, j);
  } else {
    Table table({"value", "count", "empirical", "exact"});
    for (long v = exact.min_support(); v <= exact.max_support(); ++v) {
      const auto it = counts.find(v);
      const std::uint64_t k = it == counts.end() ? 0 : it->second;
      table.add({std::to_string(v), std::to_string(k), format_double(total > 0 ? k / total : 0.0),
                 format_double(exact.at(v).get_d())});
    }
    table.write(out, separator(cfg.format));
  }
  return residual_ok ? kExitOk : kExitResidual;
}

int cmd_moments(const RunConfig& cfg, const std::string& family, int n_min, int n, std::ostream& out) {
  const Family f = parse_family(family);
  const int lo = n_min > 0 ? n_min : min_row(f);
  const auto rows = moment_table(f, lo, n);
  auto opt = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
  if (cfg.format == OutputFormat::json) {
    Json j;
    j["family"] = std::string(to_string(f));
    j["rows"] = Json::array();
    for (const auto& r : rows) {
      Json row;
      row["n"] = r.report.n;
      row["mean"] = r.report.mean.get_str();
      row["variance"] = r.report.variance.get_str();
      row["third_central"] = r.report.third_central.get_str();
      row["fourth_central"] = r.report.fourth_central.get_str();
      row["mean_float"] = r.report.mean_f();
      row["variance_float"] = r.report.variance_f();
      row["reference_mean"] = r.reference_mean ? Json(*r.reference_mean) : Json();
      row["reference_variance"] = r.reference_variance ? Json(*r.reference_variance) : Json();
      j["rows"].push_back(std::move(row));
    }
    emit_json(out, j);
    return kExitOk;
  }
  Table table({"n", "mean", "variance", "third_central", "fourth_central", "mean_float",
               "variance_float", "reference_mean", "reference_variance"});
  for (const auto& r : rows)
    table.add({std::to_string(r.report.n), r.report.mean.get_str(), r.report.variance.get_str(),
               r.report.third_central.get_str(), r.report.fourth_central.get_str(),
               format_double(r.report.mean_f()), format_double(r.report.variance_f()),
               opt(r.reference_mean), opt(r.reference_variance)});
  table.write(out, separator(cfg.format));
  return kExitOk;
}

int cmd_clt(const RunConfig& cfg, const std::string& family, const std::vector<int>& n_set, int min_n,
            int fit_min, std::ostream& out) {
  const Family f = parse_family(family);
  const CltTable t = clt_table(f, n_set, min_n, fit_min);
  Json fit;
  fit["family"] = std::string(to_string(f));
  fit["rate_exponent"] = rate_exponent(f);
  fit["slope"] = t.fit.points >= 2 ? Json(t.fit.slope) : Json();
  fit["intercept"] = t.fit.points >= 2 ? Json(t.fit.intercept) : Json();
  fit["fit_points"] = t.fit.points;
  fit["max_scaled"] = t.max_scaled;
  if (cfg.format == OutputFormat::json) {
    Json j;
    j["records"] = Json::array();
    for (const auto& r : t.records) {
      Json row;
      row["n"] = r.n;
      row["mean"] = r.mean;
      row["sd"] = r.sd;
      row["K"] = r.degenerate ? Json() : Json(r.K);
      row["scaled"] = r.degenerate ? Json() : Json(r.scaled);
      if (r.degenerate) row["warning"] = r.warning;
      j["records"].push_back(std::move(row));
    }
    j["fit"] = fit;
    emit_json(out, j);
    return kExitOk;
  }
  Table table({"n", "mean", "sd", "K", "scaled"});
  for (const auto& r : t.records)
    table.add({std::to_string(r.n), format_double(r.mean), format_double(r.sd),
               r.degenerate ? "nan" : format_double(r.K), r.degenerate ? "nan" : format_double(r.scaled)});
  table.write(out, separator(cfg.format));
  out << fit.dump() << '\n';
  return kExitOk;
}

int cmd_identities(const RunConfig& cfg, const std::string& check, int n_max, int budget,
                   std::ostream& out) {
  const Identity id = parse_identity(check);
  if (n_max < 1) throw domain_error("--n-max must be at least 1");
  if (n_max > budget)
    throw budget_error("--n-max " + std::to_string(n_max) + " exceeds the enumeration budget " +
                       std::to_string(budget));
  std::vector<IdentityReport> reports;
  for (int n = 1; n <= n_max; ++n) reports.push_back(identity_check(id, n, budget));
  const bool all = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.holds; });
  if (cfg.format == OutputFormat::json) {
    Json j;
    j["check"] = std::string(to_string(id));
    j["rows"] = Json::array();
    for (const auto& r : reports) {
      Json row;
      row["n"] = r.n;
      row["holds"] = r.holds;
      row["offset"] = r.offset_used;
      row["lhs"] = Json::array();
      row["rhs"] = Json::array();
      for (const auto& x : r.lhs) row["lhs"].push_back(x.get_str());
      for (const auto& x : r.rhs) row["rhs"].push_back(x.get_str());
      j["rows"].push_back(std::move(row));
    }
    j["all_hold"] = all;
    emit_json(out, j);
  } else {
    Table table({"n", "holds", "offset", "lhs", "rhs"});
    for (const auto& r : reports)
      table.add({std::to_string(r.n), r.holds ? "true" : "false", std::to_string(r.offset_used),
                 join(r.lhs, ' '), join(r.rhs, ' ')});
    table.write(out, separator(cfg.format));
  }
  return all ? kExitOk : kExitIdentity;
}

int cmd_decompose(const RunConfig& cfg, const std::string& process, int n, std::ostream& out) {
  const ProcessKind kind = parse_process_kind(process);
  const Trajectory t = simulate(kind, n, cfg.master_seed, true);
  const Rational residual = reconstruct(t);
  const auto& d = *t.decomposition;
  Json summary;
  summary["process"] = std::string(to_string(kind));
  summary["n"] = n;
  summary["seed"] = cfg.master_seed;
  summary["final"] = t.final_value;
  summary["mean"] = d.final_mean.get_str();
  summary["scale"] = d.scale.get_str();
  summary["composition"] = parts_string(d.composition);
  summary["residual"] = residual.get_str();
  if (cfg.format == OutputFormat::json) {
    Json j = summary;
    j["terms"] = Json::array();
    for (const auto& term : d.terms)
      j["terms"].push_back({{"position", term.position},
                            {"stage", term.stage},
                            {"part", term.part},
                            {"source", term.source},
                            {"increment", term.increment},
                            {"w", term.w.get_str()},
                            {"difference", term.difference.get_str()},
                            {"adjustment", term.adjustment.get_str()},
                            {"factor", term.factor.get_str()}});
    emit_json(out, j);
  } else {
    Table table({"position", "stage", "part", "source", "increment", "w", "difference", "adjustment",
                 "factor"});
    for (const auto& term : d.terms)
      table.add({std::to_string(term.position), std::to_string(term.stage), std::to_string(term.part),
                 std::to_string(term.source), std::to_string(term.increment), term.w.get_str(),
                 term.difference.get_str(), term.adjustment.get_str(), term.factor.get_str()});
    table.write(out, separator(cfg.format));
    out << summary.dump() << '\n';
  }
  return sgn(residual) == 0 ? kExitOk : kExitResidual;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Exact descent statistics, jump processes and CLT diagnostics"};
  app.require_subcommand(1);

  std::string format = "csv";
  std::uint64_t seed = 0;
  unsigned threads = std::max(1U, std::thread::hardware_concurrency());
  std::string out_path;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json", "tsv"}));
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_path, "Output file (default stdout)");
  };

  std::string family, process, check, record;
  int n = 0, n_min = 0, n_max = 0, min_n = 10, fit_min = 20, budget = kDefaultIdentityBudget;
  std::uint64_t replicates = 0;
  std::vector<int> n_set;

  auto* tri = app.add_subcommand("triangle", "Rows of a count triangle");
  tri->add_option("--family", family)->required();
  tri->add_option("--n", n)->required();
  common(tri);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo runs of a jump process");
  sim->add_option("--process", process)->required();
  sim->add_option("--n", n)->required();
  sim->add_option("--replicates", replicates)->required();
  sim->add_option("--record", record, "Write a decomposition audit file");
  common(sim);

  auto* mom = app.add_subcommand("moments", "Exact moments of triangle rows");
  mom->add_option("--family", family)->required();
  mom->add_option("--n", n)->required();
  mom->add_option("--n-min", n_min, "First row (default: the family's first row)");
  common(mom);

  auto* clt = app.add_subcommand("clt", "Kolmogorov distances to the normal law");
  clt->add_option("--family", family)->required();
  clt->add_option("--n-set", n_set)->required()->delimiter(',');
  clt->add_option("--min-n", min_n);
  clt->add_option("--fit-min", fit_min);
  common(clt);

  auto* ids = app.add_subcommand("identities", "Composition identities");
  ids->add_option("--check", check)
      ->required()
      ->check(CLI::IsMember({"stan1", "stan2", "derangement-sum", "fibonacci-pmf"}));
  ids->add_option("--n-max", n_max)->required();
  ids->add_option("--budget", budget);
  common(ids);

  auto* dec = app.add_subcommand("decompose", "One recorded trajectory and its decomposition");
  dec->add_option("--process", process)->required();
  dec->add_option("--n", n)->required();
  common(dec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadFlags;
  }

  RunConfig cfg;
  cfg.master_seed = seed;
  cfg.threads = threads;
  cfg.format = format == "json" ? OutputFormat::json : format == "tsv" ? OutputFormat::tsv : OutputFormat::csv;

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot open " << out_path << '\n';
      return kExitBadFlags;
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;

  try {
    if (*tri) return cmd_triangle(cfg, family, n, out);
    if (*sim) return cmd_simulate(cfg, process, n, replicates, record, out);
    if (*mom) return cmd_moments(cfg, family, n_min, n, out);
    if (*clt) return cmd_clt(cfg, family, n_set, min_n, fit_min, out);
    if (*ids) return cmd_identities(cfg, check, n_max, budget, out);
    if (*dec) return cmd_decompose(cfg, process, n, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadFlags;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadFlags;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadFlags;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadFlags;
  }
  return kExitBadFlags;
}

}  // namespace descent::cli
