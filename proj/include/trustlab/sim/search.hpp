#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "trustlab/sim/world.hpp"

namespace trustlab::sim {

/// Per-axis drive applied during one tick. An axis that is not engaged
/// coasts and loses velocity through `WorldConfig::damping`.
struct Drive {
  Vec2 force;
  bool x_engaged = false;
  bool y_engaged = false;
};

Drive drive_from_keys(KeyMask keys, const WorldConfig& world);

/// Advance one tick under an arbitrary drive. Shared by the spotlight and
/// every searcher strategy so both obey the same kinematics.
FrameState step_agent(const FrameState& state, const Drive& drive, const WorldConfig& world);

/// Advance the subject's spotlight one tick from an arrow-key mask.
FrameState step_spotlight(const FrameState& state, KeyMask keys, const WorldConfig& world);

/// Replay a key trace from `initial`; element 0 of the result is `initial`.
Path replay_keys(const FrameState& initial, std::span<const KeyMask> keys,
                 const WorldConfig& world);

std::set<GridCell> place_outliers(std::uint64_t seed, const WorldConfig& world);

/// Key-driven waypoint follower used by the scripted searchers and bots.
/// Holds an arrow key toward the target on each axis and releases it once
/// the damped coast would carry the agent the rest of the way.
class WaypointPilot {
 public:
  WaypointPilot(std::vector<Vec2> waypoints, double pass_radius);

  /// Key mask for the next tick; advances past waypoints already reached.
  KeyMask next_keys(const FrameState& state, const WorldConfig& world);
  bool done() const { return next_ >= waypoints_.size(); }

 private:
  std::vector<Vec2> waypoints_;
  double pass_radius_;
  std::size_t next_ = 0;
};

/// Row-by-row boustrophedon through every cell center: starts top-left,
/// runs left to right on even rows and right to left on odd rows.
std::vector<Vec2> sweep_waypoints(const WorldConfig& world);

Path lawnmower_path(const TrialConfig& trial, const WorldConfig& world);
Path random_path(const TrialConfig& trial, const WorldConfig& world);
Path omniscient_path(const TrialConfig& trial, const WorldConfig& world);

/// Path for the trial's searcher. Empty for solo trials.
Path searcher_path(const TrialConfig& trial, const WorldConfig& world);

/// Key trace that produced a lawnmower or omniscient path (element k drives
/// frame k+1). Random paths are force driven and have no key trace.
std::vector<KeyMask> searcher_keys(const TrialConfig& trial, const WorldConfig& world);

/// Distinct outliers whose center comes within agent_radius + outlier_radius
/// (inclusive) of any frame position.
int count_intersections(std::span<const FrameState> path, const std::set<GridCell>& outliers,
                        const WorldConfig& world);

/// round_half_up(fraction * intersected).
int as_report(int intersected, Capability capability);

/// Time for the row sweep, started at rest on the top-left cell center, to
/// bring every cell center inside the spotlight disk.
double optimal_encounter_time(const WorldConfig& world);

/// max(0, 10 - 2 |estimate - truth|).
int trial_score(int estimate, int truth);

SearchOutcome run_searcher(const TrialConfig& trial, const WorldConfig& world);

}  // namespace trustlab::sim
