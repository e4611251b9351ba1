#pragma once

#include <span>
#include <vector>

namespace trustlab::ts {

/// Sample (partial) autocorrelations indexed by lag; element 0 is lag 0 and
/// always 1. `band` is the +/-1.96/sqrt(n) white-noise critical value.
struct Correlogram {
  std::vector<double> values;
  double band = 0.0;
};

/// d-fold first differences; length shrinks by d.
std::vector<double> difference(std::span<const double> y, int d);

/// Biased-normalization sample ACF (denominator n at every lag).
Correlogram acf(std::span<const double> y, int max_lag);

/// Durbin-Levinson recursion over the sample ACF.
Correlogram pacf(std::span<const double> y, int max_lag);

}  // namespace trustlab::ts
