#include "trustlab/synth/bots.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "trustlab/rng.hpp"
#include "trustlab/sim/search.hpp"

namespace trustlab::synth {
namespace {

constexpr std::uint64_t kWalkStream = 0x57414C4B;    // "WALK"
constexpr std::uint64_t kNoticeStream = 0x4E4F5449;  // "NOTI"

std::vector<sim::KeyMask> complement_keys(const sim::WorldConfig& world) {
  // The searcher sweeps from the top; this bot sweeps the same rows bottom-up.
  auto wp = sim::sweep_waypoints(world);
  std::reverse(wp.begin(), wp.end());
  sim::WaypointPilot pilot(std::move(wp), world.agent_radius / 2.0);
  std::vector<sim::KeyMask> keys;
  sim::FrameState s;
  s.pos = world.start_position();
  for (int k = 0; k < world.frames_per_trial(); ++k) {
    keys.push_back(pilot.next_keys(s, world));
    s = sim::step_spotlight(s, keys.back(), world);
  }
  return keys;
}

std::vector<sim::KeyMask> random_walk_keys(const sim::WorldConfig& world, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kWalkStream}));
  std::vector<sim::KeyMask> keys;
  sim::KeyMask current = 0;
  for (int k = 0; k < world.frames_per_trial(); ++k) {
    if (k % 10 == 0) {
      current = 0;
      const auto h = rng.uniform_int(0, 2);
      const auto v = rng.uniform_int(0, 2);
      if (h == 1) current |= sim::kKeyLeft;
      if (h == 2) current |= sim::kKeyRight;
      if (v == 1) current |= sim::kKeyUp;
      if (v == 2) current |= sim::kKeyDown;
    }
    keys.push_back(current);
  }
  return keys;
}

std::vector<sim::KeyMask> overlapper_keys(const sim::TrialConfig& trial,
                                          const sim::WorldConfig& world) {
  if (trial.solo()) return complement_keys(world);
  auto keys = sim::searcher_keys(trial, world);
  if (!keys.empty()) return keys;  // key-driven searcher: replay it exactly
  // Force-driven searcher: chase its position frame by frame.
  const sim::Path target = sim::searcher_path(trial, world);
  sim::FrameState s;
  s.pos = world.start_position();
  for (int k = 0; k < world.frames_per_trial(); ++k) {
    sim::WaypointPilot pilot({target[static_cast<std::size_t>(k) + 1].pos}, 1.0);
    keys.push_back(pilot.next_keys(s, world));
    s = sim::step_spotlight(s, keys.back(), world);
  }
  return keys;
}

}  // namespace

std::string_view to_string(BotKind k) {
  switch (k) {
    case BotKind::LawnmowerComplement: return "lawnmower_complement";
    case BotKind::RandomWalk: return "random_walk";
    case BotKind::Overlapper: return "overlapper";
  }
  return "?";
}

BotKind bot_kind_from_string(std::string_view s) {
  for (BotKind k : {BotKind::LawnmowerComplement, BotKind::RandomWalk, BotKind::Overlapper}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown bot kind: " + std::string(s));
}

void BotPolicy::validate() const {
  if (!(skill >= 0.0 && skill <= 1.0)) throw std::invalid_argument("BotPolicy: skill outside [0, 1]");
}

BotPlay bot_play_trial(const BotPolicy& policy, const sim::TrialConfig& trial,
                       const sim::WorldConfig& world, std::uint64_t seed) {
  policy.validate();
  BotPlay play;
  switch (policy.kind) {
    case BotKind::LawnmowerComplement: play.keys = complement_keys(world); break;
    case BotKind::RandomWalk: play.keys = random_walk_keys(world, seed); break;
    case BotKind::Overlapper: play.keys = overlapper_keys(trial, world); break;
  }
  sim::FrameState start;
  start.pos = world.start_position();
  play.frames = sim::replay_keys(start, play.keys, world);
  play.intersected = sim::count_intersections(play.frames, trial.outlier_cells, world);

  Rng notice(derive_seed(seed, {kNoticeStream}));
  int found = 0;
  for (int i = 0; i < play.intersected; ++i) {
    if (notice.bernoulli(policy.skill)) ++found;
  }
  play.as_reported = sim::run_searcher(trial, world).reported_by_as;
  play.answers.trial_index = trial.trial_index;
  play.answers.found_count = found;
  play.answers.total_estimate = found + play.as_reported;
  return play;
}

}  // namespace trustlab::synth
