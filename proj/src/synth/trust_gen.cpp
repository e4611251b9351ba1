#include "trustlab/synth/trust_gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trustlab/design/questionnaire.hpp"
#include "trustlab/rng.hpp"
#include "trustlab/ts/arma.hpp"

namespace trustlab::synth {

void ArmavParams::validate() const {
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("ArmavParams: noise_sd must be >= 0");
  if (!(std::abs(phi1) < 1.0)) throw std::invalid_argument("ArmavParams: |phi1| must be < 1");
}

std::vector<double> gen_trust_armav(const ArmavParams& params, std::span<const double> performance,
                                    std::span<const double> fault, std::uint64_t seed) {
  params.validate();
  if (performance.size() != fault.size()) {
    throw std::invalid_argument("gen_trust_armav: performance and fault lengths differ");
  }
  Rng rng(seed);
  std::vector<double> trust(performance.size());
  double prev_trust = 0.0, prev_perf = 0.0, prev_fault = 0.0;
  for (std::size_t t = 0; t < trust.size(); ++t) {
    const double noise = params.noise_sd > 0.0 ? params.noise_sd * rng.normal() : 0.0;
    trust[t] = params.phi1 * prev_trust + params.a1 * performance[t] +
               params.a1 * params.phi2 * prev_perf + params.a2 * fault[t] +
               params.a2 * params.phi3 * prev_fault + noise;
    prev_trust = trust[t];
    prev_perf = performance[t];
    prev_fault = fault[t];
  }
  return trust;
}

double performance_proxy(int reported_by_as, int true_outliers) {
  if (true_outliers <= 0) throw std::invalid_argument("performance_proxy: no outliers");
  return static_cast<double>(reported_by_as) / true_outliers;
}

double fault_proxy(int reported_by_as) { return reported_by_as == 0 ? 1.0 : 0.0; }

void SyntheticTrustParams::validate() const {
  if (!ts::is_stationary(phi)) throw std::invalid_argument("SyntheticTrustParams: phi not stationary");
  if (!ts::is_invertible(theta)) throw std::invalid_argument("SyntheticTrustParams: theta not invertible");
  if (d != 0 && d != 1) throw std::invalid_argument("SyntheticTrustParams: d must be 0 or 1");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("SyntheticTrustParams: noise_sd must be >= 0");
  if (!(beta[0] <= beta[1] && beta[1] <= beta[2])) {
    throw std::invalid_argument("SyntheticTrustParams: beta must ascend with capability");
  }
  if (clamp && !(clamp->first < clamp->second)) {
    throw std::invalid_argument("SyntheticTrustParams: empty clamp interval");
  }
}

std::vector<double> simulate_trust(const SyntheticTrustParams& params,
                                   std::span<const sim::Capability> capabilities,
                                   std::uint64_t seed) {
  params.validate();
  std::vector<double> out(capabilities.size());
  if (out.empty()) return out;
  Rng rng(seed);
  const std::size_t p = params.phi.size();
  const std::size_t q = params.theta.size();
  auto beta_of = [&](sim::Capability c) { return params.beta[static_cast<std::size_t>(c)]; };

  // ARMA part w_t with pre-sample history; history[0] is the most recent.
  std::vector<double> w_hist(std::max<std::size_t>(p, 1), 0.0);
  std::vector<double> e_hist(q, 0.0);
  const double start_gap = params.initial - beta_of(capabilities[0]);
  double level = 0.0;  // eta_{t-1} when d == 1
  if (params.d == 0) {
    w_hist[0] = start_gap;
  } else {
    level = start_gap;
  }

  for (std::size_t t = 0; t < out.size(); ++t) {
    const double e = params.noise_sd > 0.0 ? params.noise_sd * rng.normal() : 0.0;
    double w = e;
    for (std::size_t i = 0; i < p; ++i) w += params.phi[i] * w_hist[i];
    for (std::size_t j = 0; j < q; ++j) w += params.theta[j] * e_hist[j];
    std::rotate(w_hist.rbegin(), w_hist.rbegin() + 1, w_hist.rend());
    w_hist[0] = w;
    if (q > 0) {
      std::rotate(e_hist.rbegin(), e_hist.rbegin() + 1, e_hist.rend());
      e_hist[0] = e;
    }
    double eta = w;
    if (params.d == 1) {
      level += w;
      eta = level;
    }
    double y = beta_of(capabilities[t]) + eta;
    if (params.clamp) y = std::clamp(y, params.clamp->first, params.clamp->second);
    out[t] = y;
  }
  return out;
}

ts::TrustSeries gen_trust_arimax(const SyntheticTrustParams& params,
                                 std::span<const design::ExperimentPlan> plans, std::uint64_t seed) {
  if (plans.empty()) throw std::invalid_argument("gen_trust_arimax: no plans");
  std::vector<sim::TrialConfig> trials;
  for (const auto& plan : plans) {
    auto main = plan.main_trials();
    trials.insert(trials.end(), main.begin(), main.end());
  }
  ts::TrustSeries s = ts::series_skeleton(trials, plans.front().group);
  std::vector<sim::Capability> caps;
  caps.reserve(trials.size());
  for (const auto& t : trials) caps.push_back(t.searcher->capability);
  s.values = simulate_trust(params, caps, seed);
  return s;
}

ts::TrustSeries gen_trust_arimax(const SyntheticTrustParams& params,
                                 const design::ExperimentPlan& plan, std::uint64_t seed) {
  return gen_trust_arimax(params, std::span<const design::ExperimentPlan>(&plan, 1), seed);
}

int likert_from_trust(double trust) {
  const double scaled = design::kLikertMin + (design::kLikertMax - design::kLikertMin) * trust;
  const auto r = static_cast<int>(std::floor(scaled + 0.5));
  return std::clamp(r, design::kLikertMin, design::kLikertMax);
}

}  // namespace trustlab::synth
