#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "trustlab/design/plan.hpp"
#include "trustlab/ts/series.hpp"

namespace trustlab::synth {

/// Lagged trust / performance / fault recursion:
///   T(t) = phi1 T(t-1) + A1 P(t) + A1 phi2 P(t-1) + A2 F(t) + A2 phi3 F(t-1) + a(t)
/// with a(t) ~ N(0, noise_sd^2) and all pre-sample terms zero.
struct ArmavParams {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi3 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double noise_sd = 0.0;

  void validate() const;
};

std::vector<double> gen_trust_armav(const ArmavParams& params, std::span<const double> performance,
                                    std::span<const double> fault, std::uint64_t seed);

/// Performance proxy for one trial: share of the true outliers the searcher reported.
double performance_proxy(int reported_by_as, int true_outliers);
/// Fault proxy: the searcher reported nothing.
double fault_proxy(int reported_by_as);

/// Ground truth for trust generated as regression on capability with
/// ARIMA(p, d, q) errors. `initial` is the latent trust before the first
/// trial; it seeds the error process so that AR and integrated dynamics
/// show a visible transient.
struct SyntheticTrustParams {
  std::array<double, 3> beta{0.3, 0.5, 0.7};
  std::vector<double> phi;
  std::vector<double> theta;
  int d = 0;
  double noise_sd = 0.05;
  std::optional<std::pair<double, double>> clamp = std::make_pair(0.0, 1.0);
  double initial = 0.5;

  /// Throws std::invalid_argument for non-stationary/non-invertible
  /// coefficients, descending beta, negative noise or d outside {0, 1}.
  void validate() const;
};

/// Latent trust for a capability sequence (values only).
std::vector<double> simulate_trust(const SyntheticTrustParams& params,
                                   std::span<const sim::Capability> capabilities,
                                   std::uint64_t seed);

/// Trust for a plan's 63 main trials with factor columns filled in.
ts::TrustSeries gen_trust_arimax(const SyntheticTrustParams& params,
                                 const design::ExperimentPlan& plan, std::uint64_t seed);
/// One continuous process over several plans' main trials, concatenated.
ts::TrustSeries gen_trust_arimax(const SyntheticTrustParams& params,
                                 std::span<const design::ExperimentPlan> plans, std::uint64_t seed);

/// Rounds a [0, 1] trust level onto the 1..9 scale.
int likert_from_trust(double trust);

}  // namespace trustlab::synth
