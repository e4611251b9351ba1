#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustlab/sim/world.hpp"

namespace trustlab::design {

enum class Group { G0, G1 };

std::string_view to_string(Group g);
Group group_from_string(std::string_view s);

inline constexpr int kPracticeTrials = 9;
inline constexpr int kBlocks = 3;
inline constexpr int kTrialsPerBlock = 21;
inline constexpr int kMainTrials = kBlocks * kTrialsPerBlock;
inline constexpr int kTotalTrials = kPracticeTrials + kMainTrials;

using FactorLevel = std::variant<sim::Strategy, sim::Capability>;

struct Block {
  FactorLevel blocked;
  std::vector<sim::TrialConfig> trials;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Full trial schedule for one group. Trial indices are global: 0..8 are
/// the solo practice trials, 9..71 the three main blocks in order.
struct ExperimentPlan {
  std::uint64_t experiment_seed = 0;
  Group group = Group::G0;
  std::vector<sim::TrialConfig> practice;
  std::array<Block, kBlocks> blocks;

  const sim::TrialConfig& trial(int global_index) const;
  /// The 63 main trials in presentation order.
  std::vector<sim::TrialConfig> main_trials() const;

  friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

/// Group 0 holds strategy constant within a block and varies capability;
/// group 1 does the reverse. Within each block the varied factor is a seeded
/// permutation of seven repetitions of each level.
ExperimentPlan build_plan(std::uint64_t experiment_seed, Group group,
                          const sim::WorldConfig& world = {});

/// Seed of a trial's stream; shared by every subject in the group.
std::uint64_t trial_seed(std::uint64_t experiment_seed, Group group, int global_index);

/// Sessions alternate G0, G1, G0, ... in the order they start.
Group assign_group(std::uint64_t session_ordinal);

void to_json(nlohmann::json& j, const ExperimentPlan& plan);

}  // namespace trustlab::design
