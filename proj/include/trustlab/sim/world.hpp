#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace trustlab::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
double norm(Vec2 v);
double distance(Vec2 a, Vec2 b);

/// Geometry and kinematic constants shared by the subject's spotlight and
/// the autonomous searcher. Coordinates grow rightward (x) and downward (y);
/// the origin is the top-left corner of the field.
struct WorldConfig {
  double field_size = 700.0;
  int grid_dim = 7;
  double cell_pitch = 100.0;
  double outlier_radius = 20.0;
  double agent_radius = 40.0;
  int tick_rate = 30;
  double trial_duration = 20.0;
  double warning_lead = 5.0;
  double accel = 600.0;
  double damping = 0.85;
  // Chosen by scanning speeds so that optimal_encounter_time() lands on
  // exactly 25.0 s (750 ticks) with the default pilot.
  double max_speed = 210.5;

  double dt() const { return 1.0 / tick_rate; }
  int frames_per_trial() const;
  Vec2 cell_center(int col, int row) const;
  Vec2 start_position() const;

  /// Throws std::invalid_argument if the geometry or timing is inconsistent.
  void validate() const;

  friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

struct GridCell {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

enum class Strategy { Lawnmower, Random, Omniscient };
enum class Capability { C20, C50, C100 };
enum class SearcherColor { Blue, Orange, Yellow };

inline constexpr Strategy kStrategies[] = {Strategy::Lawnmower, Strategy::Random,
                                           Strategy::Omniscient};
inline constexpr Capability kCapabilities[] = {Capability::C20, Capability::C50,
                                               Capability::C100};

double fraction(Capability c);
SearcherColor color_of(Capability c);
Capability capability_of(SearcherColor c);

std::string_view to_string(Strategy s);
std::string_view to_string(Capability c);
std::string_view to_string(SearcherColor c);
Strategy strategy_from_string(std::string_view s);
Capability capability_from_string(std::string_view s);
SearcherColor color_from_string(std::string_view s);

/// The autonomous searcher assigned to a trial. Absent on solo trials.
struct SearcherSpec {
  Strategy strategy = Strategy::Lawnmower;
  Capability capability = Capability::C100;

  SearcherColor color() const { return color_of(capability); }

  friend bool operator==(const SearcherSpec&, const SearcherSpec&) = default;
};

struct TrialConfig {
  int trial_index = 0;
  std::uint64_t rng_seed = 0;
  std::set<GridCell> outlier_cells;
  std::optional<SearcherSpec> searcher;

  bool solo() const { return !searcher.has_value(); }

  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

// Arrow-key bits of the per-frame input mask.
enum KeyBits : std::uint8_t {
  kKeyLeft = 1 << 0,
  kKeyRight = 1 << 1,
  kKeyUp = 1 << 2,
  kKeyDown = 1 << 3,
};
using KeyMask = std::uint8_t;

struct FrameState {
  double t = 0.0;
  Vec2 pos;
  Vec2 vel;
  KeyMask keys = 0;

  friend bool operator==(const FrameState&, const FrameState&) = default;
};

using Path = std::vector<FrameState>;

struct SearchOutcome {
  int intersected_by_as = 0;
  int reported_by_as = 0;
  int intersected_by_subject = 0;
  Path as_path;
};

void to_json(nlohmann::json& j, const Vec2& v);
void from_json(const nlohmann::json& j, Vec2& v);
void to_json(nlohmann::json& j, const WorldConfig& w);
void from_json(const nlohmann::json& j, WorldConfig& w);
void to_json(nlohmann::json& j, const GridCell& c);
void from_json(const nlohmann::json& j, GridCell& c);
void to_json(nlohmann::json& j, const TrialConfig& t);
void from_json(const nlohmann::json& j, TrialConfig& t);
void to_json(nlohmann::json& j, const FrameState& f);
void from_json(const nlohmann::json& j, FrameState& f);

}  // namespace trustlab::sim
