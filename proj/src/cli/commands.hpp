#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace descent::cli {

enum class OutputFormat { csv, json, tsv };

struct RunConfig {
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  OutputFormat format = OutputFormat::csv;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadFlags = 2;
inline constexpr int kExitResidual = 3;
inline constexpr int kExitIdentity = 4;

int cmd_triangle(const RunConfig& cfg, const std::string& family, int n, std::ostream& out);

int cmd_simulate(const RunConfig& cfg, const std::string& process, int n, std::uint64_t replicates,
                 const std::string& record_path, std::ostream& out);

int cmd_moments(const RunConfig& cfg, const std::string& family, int n_min, int n, std::ostream& out);

int cmd_clt(const RunConfig& cfg, const std::string& family, const std::vector<int>& n_set, int min_n,
            int fit_min, std::ostream& out);

int cmd_identities(const RunConfig& cfg, const std::string& check, int n_max, int budget,
                   std::ostream& out);

int cmd_decompose(const RunConfig& cfg, const std::string& process, int n, std::ostream& out);

/// Parses argv, dispatches, and maps errors to exit codes.
int run(int argc, const char* const* argv);

}  // namespace descent::cli
