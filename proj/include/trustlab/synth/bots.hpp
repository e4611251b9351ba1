#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "trustlab/design/questionnaire.hpp"
#include "trustlab/sim/world.hpp"

namespace trustlab::synth {

enum class BotKind { LawnmowerComplement, RandomWalk, Overlapper };

std::string_view to_string(BotKind k);
BotKind bot_kind_from_string(std::string_view s);

struct BotPolicy {
  BotKind kind = BotKind::LawnmowerComplement;
  double skill = 1.0;  // probability of noticing each outlier it passes over

  void validate() const;
};

struct BotPlay {
  std::vector<sim::KeyMask> keys;  // keys[k] drives frame k + 1
  sim::Path frames;                // frames[0] is the start state
  int intersected = 0;
  int as_reported = 0;
  design::SurveyResponse answers;  // task questions only; likert left empty
};

/// Plays one trial through the spotlight kinematics and answers the task
/// questions: found = intersections thinned by skill, total = found + the
/// searcher's report.
BotPlay bot_play_trial(const BotPolicy& policy, const sim::TrialConfig& trial,
                       const sim::WorldConfig& world, std::uint64_t seed);

}  // namespace trustlab::synth
