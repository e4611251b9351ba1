#include "trustlab/sim/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#include "trustlab/rng.hpp"

namespace trustlab::sim {
namespace {

// Child-stream tags derived from a trial's rng_seed.
constexpr std::uint64_t kOutlierStream = 0x4F55544C;  // "OUTL"
constexpr std::uint64_t kMotionStream = 0x4D4F5449;   // "MOTI"

int percent(Capability c) {
  switch (c) {
    case Capability::C20: return 20;
    case Capability::C50: return 50;
    case Capability::C100: return 100;
  }
  throw std::invalid_argument("unknown capability");
}

FrameState initial_state(const WorldConfig& world) {
  FrameState s;
  s.pos = world.start_position();
  return s;
}

// Pilot keys for one axis; returns -1, 0 or +1.
int axis_command(double error, double vel, double tolerance, const WorldConfig& world) {
  const double coast = vel * world.damping / ((1.0 - world.damping) * world.tick_rate);
  const double remaining = error - coast;
  if (std::abs(remaining) <= tolerance) return 0;
  if (std::signbit(remaining) != std::signbit(error)) return 0;  // coasting overshoots
  return error > 0.0 ? 1 : -1;
}

Path run_pilot(WaypointPilot pilot, const WorldConfig& world, std::vector<KeyMask>* keys_out) {
  const int frames = world.frames_per_trial();
  Path path;
  path.reserve(static_cast<std::size_t>(frames) + 1);
  path.push_back(initial_state(world));
  for (int k = 0; k < frames; ++k) {
    const KeyMask keys = pilot.next_keys(path.back(), world);
    if (keys_out) keys_out->push_back(keys);
    path.push_back(step_spotlight(path.back(), keys, world));
  }
  return path;
}

std::vector<Vec2> nearest_neighbor_tour(Vec2 start, const std::set<GridCell>& outliers,
                                        const WorldConfig& world) {
  std::vector<Vec2> remaining;
  for (const GridCell& c : outliers) remaining.push_back(world.cell_center(c.col, c.row));
  std::vector<Vec2> tour;
  Vec2 at = start;
  while (!remaining.empty()) {
    auto best = remaining.begin();
    double best_d = distance(at, *best);
    for (auto it = std::next(remaining.begin()); it != remaining.end(); ++it) {
      const double d = distance(at, *it);
      if (d < best_d) {
        best = it;
        best_d = d;
      }
    }
    at = *best;
    tour.push_back(at);
    remaining.erase(best);
  }
  return tour;
}

WaypointPilot pilot_for(const TrialConfig& trial, const WorldConfig& world) {
  switch (trial.searcher->strategy) {
    case Strategy::Lawnmower:
      return WaypointPilot(sweep_waypoints(world), world.agent_radius / 2.0);
    case Strategy::Omniscient:
      return WaypointPilot(nearest_neighbor_tour(world.start_position(), trial.outlier_cells, world),
                           world.agent_radius);
    case Strategy::Random: break;
  }
  throw std::invalid_argument("random searchers are force driven, not piloted");
}

}  // namespace

Drive drive_from_keys(KeyMask keys, const WorldConfig& world) {
  Drive d;
  const int dx = ((keys & kKeyRight) ? 1 : 0) - ((keys & kKeyLeft) ? 1 : 0);
  const int dy = ((keys & kKeyDown) ? 1 : 0) - ((keys & kKeyUp) ? 1 : 0);
  d.force = {dx * world.accel, dy * world.accel};
  d.x_engaged = dx != 0;
  d.y_engaged = dy != 0;
  return d;
}

FrameState step_agent(const FrameState& state, const Drive& drive, const WorldConfig& world) {
  const double rate = world.tick_rate;
  FrameState next;
  next.t = (std::round(state.t * rate) + 1.0) / rate;
  next.vel.x = drive.x_engaged ? state.vel.x + drive.force.x / rate : state.vel.x * world.damping;
  next.vel.y = drive.y_engaged ? state.vel.y + drive.force.y / rate : state.vel.y * world.damping;
  const double speed = norm(next.vel);
  if (speed > world.max_speed) {
    next.vel.x = next.vel.x / speed * world.max_speed;
    next.vel.y = next.vel.y / speed * world.max_speed;
  }
  next.pos.x = state.pos.x + next.vel.x / rate;
  next.pos.y = state.pos.y + next.vel.y / rate;
  auto wall = [&](double& p, double& v) {
    if (p <= 0.0) {
      p = 0.0;
      v = 0.0;
    } else if (p >= world.field_size) {
      p = world.field_size;
      v = 0.0;
    }
  };
  wall(next.pos.x, next.vel.x);
  wall(next.pos.y, next.vel.y);
  return next;
}

FrameState step_spotlight(const FrameState& state, KeyMask keys, const WorldConfig& world) {
  FrameState next = step_agent(state, drive_from_keys(keys, world), world);
  next.keys = keys;
  return next;
}

Path replay_keys(const FrameState& initial, std::span<const KeyMask> keys,
                 const WorldConfig& world) {
  Path path;
  path.reserve(keys.size() + 1);
  path.push_back(initial);
  for (KeyMask k : keys) path.push_back(step_spotlight(path.back(), k, world));
  return path;
}

std::set<GridCell> place_outliers(std::uint64_t seed, const WorldConfig& world) {
  Rng rng(derive_seed(seed, {kOutlierStream}));
  const int cells = world.grid_dim * world.grid_dim;
  const int n = static_cast<int>(rng.uniform_int(5, std::min(15, cells)));
  std::vector<int> order(static_cast<std::size_t>(cells));
  std::iota(order.begin(), order.end(), 0);
  std::set<GridCell> out;
  for (int i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i, cells - 1));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
    const int idx = order[static_cast<std::size_t>(i)];
    out.insert({idx % world.grid_dim, idx / world.grid_dim});
  }
  return out;
}

WaypointPilot::WaypointPilot(std::vector<Vec2> waypoints, double pass_radius)
    : waypoints_(std::move(waypoints)), pass_radius_(pass_radius) {}

KeyMask WaypointPilot::next_keys(const FrameState& state, const WorldConfig& world) {
  while (next_ < waypoints_.size() && distance(state.pos, waypoints_[next_]) <= pass_radius_) {
    ++next_;
  }
  if (done()) return 0;
  const Vec2 error = waypoints_[next_] - state.pos;
  const double tolerance = pass_radius_ / 2.0;
  const int cx = axis_command(error.x, state.vel.x, tolerance, world);
  const int cy = axis_command(error.y, state.vel.y, tolerance, world);
  KeyMask keys = 0;
  if (cx > 0) keys |= kKeyRight;
  if (cx < 0) keys |= kKeyLeft;
  if (cy > 0) keys |= kKeyDown;
  if (cy < 0) keys |= kKeyUp;
  return keys;
}

std::vector<Vec2> sweep_waypoints(const WorldConfig& world) {
  std::vector<Vec2> wp;
  const int last = world.grid_dim - 1;
  for (int row = 0; row < world.grid_dim; ++row) {
    const bool rightward = row % 2 == 0;
    wp.push_back(world.cell_center(rightward ? 0 : last, row));
    wp.push_back(world.cell_center(rightward ? last : 0, row));
  }
  return wp;
}

Path lawnmower_path(const TrialConfig& trial, const WorldConfig& world) {
  TrialConfig t = trial;
  t.searcher = SearcherSpec{Strategy::Lawnmower, trial.searcher ? trial.searcher->capability
                                                                : Capability::C100};
  return run_pilot(pilot_for(t, world), world, nullptr);
}

Path omniscient_path(const TrialConfig& trial, const WorldConfig& world) {
  TrialConfig t = trial;
  t.searcher = SearcherSpec{Strategy::Omniscient, trial.searcher ? trial.searcher->capability
                                                                 : Capability::C100};
  return run_pilot(pilot_for(t, world), world, nullptr);
}

Path random_path(const TrialConfig& trial, const WorldConfig& world) {
  Rng rng(derive_seed(trial.rng_seed, {kMotionStream}));
  const int frames = world.frames_per_trial();
  Path path;
  path.reserve(static_cast<std::size_t>(frames) + 1);
  path.push_back(initial_state(world));
  for (int k = 0; k < frames; ++k) {
    Drive d;
    d.force.x = rng.uniform(-world.accel, world.accel);
    d.force.y = rng.uniform(-world.accel, world.accel);
    d.x_engaged = d.y_engaged = true;
    path.push_back(step_agent(path.back(), d, world));
  }
  return path;
}

Path searcher_path(const TrialConfig& trial, const WorldConfig& world) {
  if (trial.solo()) return {};
  switch (trial.searcher->strategy) {
    case Strategy::Lawnmower: return lawnmower_path(trial, world);
    case Strategy::Random: return random_path(trial, world);
    case Strategy::Omniscient: return omniscient_path(trial, world);
  }
  return {};
}

std::vector<KeyMask> searcher_keys(const TrialConfig& trial, const WorldConfig& world) {
  if (trial.solo() || trial.searcher->strategy == Strategy::Random) return {};
  std::vector<KeyMask> keys;
  run_pilot(pilot_for(trial, world), world, &keys);
  return keys;
}

int count_intersections(std::span<const FrameState> path, const std::set<GridCell>& outliers,
                        const WorldConfig& world) {
  const double reach = world.agent_radius + world.outlier_radius;
  int count = 0;
  for (const GridCell& c : outliers) {
    const Vec2 center = world.cell_center(c.col, c.row);
    const bool hit = std::any_of(path.begin(), path.end(), [&](const FrameState& f) {
      return distance(f.pos, center) <= reach;
    });
    if (hit) ++count;
  }
  return count;
}

int as_report(int intersected, Capability capability) {
  if (intersected < 0) throw std::invalid_argument("as_report: negative intersection count");
  return (percent(capability) * intersected + 50) / 100;
}

double optimal_encounter_time(const WorldConfig& world) {
  std::vector<Vec2> centers;
  for (int row = 0; row < world.grid_dim; ++row) {
    for (int col = 0; col < world.grid_dim; ++col) centers.push_back(world.cell_center(col, row));
  }
  std::vector<bool> seen(centers.size(), false);
  std::size_t unseen = centers.size();
  auto mark = [&](Vec2 pos) {
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (!seen[i] && distance(pos, centers[i]) <= world.agent_radius) {
        seen[i] = true;
        --unseen;
      }
    }
  };

  WaypointPilot pilot(sweep_waypoints(world), world.agent_radius / 2.0);
  FrameState state;
  state.pos = world.cell_center(0, 0);
  mark(state.pos);
  const long limit = 3600L * world.tick_rate;
  for (long k = 1; k <= limit; ++k) {
    state = step_spotlight(state, pilot.next_keys(state, world), world);
    mark(state.pos);
    if (unseen == 0) return static_cast<double>(k) / world.tick_rate;
  }
  throw std::runtime_error("optimal_encounter_time: sweep did not cover the grid");
}

int trial_score(int estimate, int truth) {
  if (estimate < 0 || truth < 0) throw std::invalid_argument("trial_score: negative count");
  return std::max(0, 10 - 2 * std::abs(estimate - truth));
}

SearchOutcome run_searcher(const TrialConfig& trial, const WorldConfig& world) {
  SearchOutcome out;
  if (trial.solo()) return out;
  out.as_path = searcher_path(trial, world);
  out.intersected_by_as = count_intersections(out.as_path, trial.outlier_cells, world);
  out.reported_by_as = as_report(out.intersected_by_as, trial.searcher->capability);
  return out;
}

}  // namespace trustlab::sim
