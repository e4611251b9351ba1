#pragma once

#include <functional>
#include <vector>

namespace trustlab::ts {

struct SimplexOptions {
  double initial_step = 0.3;
  double diameter_tol = 1e-8;
  int max_evals = 10000;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evals = 0;
  bool converged = false;
};

/// Nelder-Mead minimization (standard reflection/expansion/contraction/shrink
/// coefficients 1, 2, 1/2, 1/2). Non-finite objective values are treated as
/// +infinity. Stops when the simplex diameter drops below `diameter_tol`.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, const SimplexOptions& opts = {});

}  // namespace trustlab::ts
