#include "trustlab/design/plan.hpp"

#include <algorithm>
#include <stdexcept>

#include "trustlab/rng.hpp"
#include "trustlab/sim/search.hpp"

namespace trustlab::design {
namespace {

constexpr std::uint64_t kPracticeStream = 0x50524143;  // "PRAC"
constexpr std::uint64_t kMainStream = 0x4D41494E;      // "MAIN"
constexpr std::uint64_t kScheduleStream = 0x53434844;  // "SCHD"

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

template <class Level, std::size_t N>
std::vector<Level> balanced_order(const Level (&levels)[N], int reps, Rng& rng) {
  std::vector<Level> order;
  for (int r = 0; r < reps; ++r) order.insert(order.end(), std::begin(levels), std::end(levels));
  shuffle(order, rng);
  return order;
}

sim::TrialConfig make_trial(std::uint64_t seed, int index, const sim::WorldConfig& world) {
  sim::TrialConfig t;
  t.trial_index = index;
  t.rng_seed = seed;
  t.outlier_cells = sim::place_outliers(seed, world);
  return t;
}

}  // namespace

std::string_view to_string(Group g) { return g == Group::G0 ? "G0" : "G1"; }

Group group_from_string(std::string_view s) {
  if (s == "G0" || s == "0") return Group::G0;
  if (s == "G1" || s == "1") return Group::G1;
  throw std::invalid_argument("unknown group: " + std::string(s));
}

std::uint64_t trial_seed(std::uint64_t experiment_seed, Group group, int global_index) {
  if (global_index < kPracticeTrials) {
    return derive_seed(experiment_seed, {kPracticeStream, static_cast<std::uint64_t>(global_index)});
  }
  return derive_seed(experiment_seed, {kMainStream, static_cast<std::uint64_t>(group),
                                       static_cast<std::uint64_t>(global_index)});
}

ExperimentPlan build_plan(std::uint64_t experiment_seed, Group group,
                          const sim::WorldConfig& world) {
  ExperimentPlan plan;
  plan.experiment_seed = experiment_seed;
  plan.group = group;

  for (int i = 0; i < kPracticeTrials; ++i) {
    plan.practice.push_back(make_trial(trial_seed(experiment_seed, group, i), i, world));
  }

  Rng rng(derive_seed(experiment_seed, {kScheduleStream, static_cast<std::uint64_t>(group)}));
  const auto strategies = balanced_order(sim::kStrategies, 1, rng);
  const auto capabilities = balanced_order(sim::kCapabilities, 1, rng);

  int index = kPracticeTrials;
  for (int b = 0; b < kBlocks; ++b) {
    Block& block = plan.blocks[static_cast<std::size_t>(b)];
    if (group == Group::G0) {
      const sim::Strategy fixed = strategies[static_cast<std::size_t>(b)];
      block.blocked = fixed;
      for (sim::Capability c : balanced_order(sim::kCapabilities, kTrialsPerBlock / 3, rng)) {
        auto t = make_trial(trial_seed(experiment_seed, group, index), index, world);
        t.searcher = sim::SearcherSpec{fixed, c};
        block.trials.push_back(std::move(t));
        ++index;
      }
    } else {
      const sim::Capability fixed = capabilities[static_cast<std::size_t>(b)];
      block.blocked = fixed;
      for (sim::Strategy s : balanced_order(sim::kStrategies, kTrialsPerBlock / 3, rng)) {
        auto t = make_trial(trial_seed(experiment_seed, group, index), index, world);
        t.searcher = sim::SearcherSpec{s, fixed};
        block.trials.push_back(std::move(t));
        ++index;
      }
    }
  }
  return plan;
}

const sim::TrialConfig& ExperimentPlan::trial(int global_index) const {
  if (global_index < 0 || global_index >= kTotalTrials) {
    throw std::out_of_range("trial index out of range: " + std::to_string(global_index));
  }
  if (global_index < kPracticeTrials) return practice.at(static_cast<std::size_t>(global_index));
  const int main = global_index - kPracticeTrials;
  return blocks.at(static_cast<std::size_t>(main / kTrialsPerBlock))
      .trials.at(static_cast<std::size_t>(main % kTrialsPerBlock));
}

std::vector<sim::TrialConfig> ExperimentPlan::main_trials() const {
  std::vector<sim::TrialConfig> out;
  out.reserve(kMainTrials);
  for (const Block& b : blocks) out.insert(out.end(), b.trials.begin(), b.trials.end());
  return out;
}

Group assign_group(std::uint64_t session_ordinal) {
  return session_ordinal % 2 == 0 ? Group::G0 : Group::G1;
}

void to_json(nlohmann::json& j, const ExperimentPlan& plan) {
  j = {{"experiment_seed", plan.experiment_seed},
       {"group", to_string(plan.group)},
       {"practice", plan.practice}};
  auto blocks = nlohmann::json::array();
  for (const Block& b : plan.blocks) {
    nlohmann::json jb;
    std::visit([&](auto level) { jb["blocked"] = sim::to_string(level); }, b.blocked);
    jb["trials"] = b.trials;
    blocks.push_back(std::move(jb));
  }
  j["blocks"] = std::move(blocks);
}

}  // namespace trustlab::design
