// Exact rows, one simulated derangement path and its martingale reconstruction.
#include <iostream>

#include "descent/descent.hpp"

int main() {
  using namespace descent;

  const CountTriangle t = descent_triangle(Family::eulerian, 6);
  std::cout << "eulerian row 6:";
  for (const auto& c : t.row(6)) std::cout << ' ' << c;
  std::cout << '\n';

  const auto m = moment_table(Family::involution, 10, 10).front();
  std::cout << "involution n=10 mean " << m.report.mean << " variance " << m.report.variance << '\n';

  const Trajectory path = simulate(ProcessKind::derangement, 30, 7, true);
  std::cout << "derangement n=30 final " << path.final_value << " composition "
            << path.decomposition->composition.to_string() << " residual " << reconstruct(path) << '\n';

  const CltTable clt = clt_table(Family::eulerian, {16, 64, 256});
  for (const auto& r : clt.records) std::cout << "n=" << r.n << " K=" << format_double(r.K) << '\n';
}
