#include "trustlab/ts/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace trustlab::ts {

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, const SimplexOptions& opts) {
  const std::size_t n = start.size();
  SimplexResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  if (n == 0) {
    res.x = start;
    res.value = eval(start);
    res.converged = true;
    return res;
  }

  std::vector<std::vector<double>> pts(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opts.initial_step;
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto affine = [&](const std::vector<double>& from, double coef, std::vector<double>& out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (from[j] - centroid[j]);
  };

  while (true) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        diameter = std::max(diameter, std::abs(pts[i][j] - pts[best][j]));
      }
    }
    if (diameter < opts.diameter_tol) {
      res.converged = true;
      break;
    }
    if (res.evals >= opts.max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
    }

    affine(pts[worst], -1.0, trial);
    const double fr = eval(trial);
    if (fr < vals[best]) {
      affine(pts[worst], -2.0, trial2);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflection improved on the worst point.
    const bool outside = fr < vals[worst];
    affine(pts[worst], outside ? -0.5 : 0.5, trial2);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
      vals[i] = eval(pts[i]);
    }
  }

  const auto best = static_cast<std::size_t>(
      std::distance(vals.begin(), std::min_element(vals.begin(), vals.end())));
  res.x = pts[best];
  res.value = vals[best];
  return res;
}

}  // namespace trustlab::ts
