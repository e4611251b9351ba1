#include "trustlab/ts/correlogram.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace trustlab::ts {
namespace {

void check_length(std::span<const double> y, int max_lag) {
  if (max_lag < 0) throw std::invalid_argument("max_lag must be non-negative");
  if (y.size() <= static_cast<std::size_t>(max_lag)) {
    throw std::invalid_argument("series shorter than max_lag + 1");
  }
}

}  // namespace

std::vector<double> difference(std::span<const double> y, int d) {
  if (d < 0) throw std::invalid_argument("difference: negative order");
  if (y.size() <= static_cast<std::size_t>(d)) {
    throw std::invalid_argument("difference: series too short for order " + std::to_string(d));
  }
  std::vector<double> out(y.begin(), y.end());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
    out.pop_back();
  }
  return out;
}

Correlogram acf(std::span<const double> y, int max_lag) {
  check_length(y, max_lag);
  const auto n = y.size();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = y[i] - mean;
  const double c0 = std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
  if (!(c0 > 0.0)) throw std::domain_error("acf: zero-variance series");

  Correlogram out;
  out.band = 1.96 / std::sqrt(static_cast<double>(n));
  out.values.resize(static_cast<std::size_t>(max_lag) + 1);
  for (int k = 0; k <= max_lag; ++k) {
    const auto lag = static_cast<std::size_t>(k);
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
    out.values[lag] = s / c0;
  }
  return out;
}

Correlogram pacf(std::span<const double> y, int max_lag) {
  const Correlogram r = acf(y, max_lag);
  Correlogram out;
  out.band = r.band;
  out.values.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
  out.values[0] = 1.0;
  if (max_lag == 0) return out;

  std::vector<double> phi(static_cast<std::size_t>(max_lag) + 1, 0.0);
  std::vector<double> prev(phi.size(), 0.0);
  phi[1] = r.values[1];
  out.values[1] = phi[1];
  double v = 1.0 - phi[1] * phi[1];
  for (int k = 2; k <= max_lag; ++k) {
    prev = phi;
    double num = r.values[static_cast<std::size_t>(k)];
    for (int j = 1; j < k; ++j) {
      num -= prev[static_cast<std::size_t>(j)] * r.values[static_cast<std::size_t>(k - j)];
    }
    const double kk = v > 0.0 ? num / v : 0.0;
    phi[static_cast<std::size_t>(k)] = kk;
    for (int j = 1; j < k; ++j) {
      phi[static_cast<std::size_t>(j)] =
          prev[static_cast<std::size_t>(j)] - kk * prev[static_cast<std::size_t>(k - j)];
    }
    v *= 1.0 - kk * kk;
    out.values[static_cast<std::size_t>(k)] = kk;
  }
  return out;
}

}  // namespace trustlab::ts
