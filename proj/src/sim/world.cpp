#include "trustlab/sim/world.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace trustlab::sim {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }
double distance(Vec2 a, Vec2 b) { return norm(a - b); }

int WorldConfig::frames_per_trial() const {
  return static_cast<int>(std::lround(trial_duration * tick_rate));
}

Vec2 WorldConfig::cell_center(int col, int row) const {
  const double margin = (field_size - cell_pitch * (grid_dim - 1)) / 2.0;
  return {margin + cell_pitch * col, margin + cell_pitch * row};
}

Vec2 WorldConfig::start_position() const { return {field_size / 2.0, field_size / 2.0}; }

void WorldConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("WorldConfig: " + what); };
  if (grid_dim < 1) fail("grid_dim must be positive");
  if (!(cell_pitch > 0.0)) fail("cell_pitch must be positive");
  if (!(field_size >= cell_pitch * grid_dim)) fail("grid does not fit in the field");
  if (!(agent_radius > 0.0) || !(2.0 * agent_radius < cell_pitch)) {
    fail("agent diameter must be smaller than the cell pitch");
  }
  if (!(outlier_radius > 0.0)) fail("outlier_radius must be positive");
  if (tick_rate <= 0) fail("tick_rate must be positive");
  if (!(trial_duration > 0.0)) fail("trial_duration must be positive");
  if (!(warning_lead >= 0.0 && warning_lead <= trial_duration)) fail("bad warning_lead");
  if (!(accel > 0.0)) fail("accel must be positive");
  if (!(damping >= 0.0 && damping < 1.0)) fail("damping must lie in [0, 1)");
  if (!(max_speed > 0.0)) fail("max_speed must be positive");
}

double fraction(Capability c) {
  switch (c) {
    case Capability::C20: return 0.2;
    case Capability::C50: return 0.5;
    case Capability::C100: return 1.0;
  }
  throw std::invalid_argument("unknown capability");
}

SearcherColor color_of(Capability c) {
  switch (c) {
    case Capability::C20: return SearcherColor::Blue;
    case Capability::C50: return SearcherColor::Orange;
    case Capability::C100: return SearcherColor::Yellow;
  }
  throw std::invalid_argument("unknown capability");
}

Capability capability_of(SearcherColor c) {
  switch (c) {
    case SearcherColor::Blue: return Capability::C20;
    case SearcherColor::Orange: return Capability::C50;
    case SearcherColor::Yellow: return Capability::C100;
  }
  throw std::invalid_argument("unknown color");
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Lawnmower: return "lawnmower";
    case Strategy::Random: return "random";
    case Strategy::Omniscient: return "omniscient";
  }
  return "?";
}

std::string_view to_string(Capability c) {
  switch (c) {
    case Capability::C20: return "C20";
    case Capability::C50: return "C50";
    case Capability::C100: return "C100";
  }
  return "?";
}

std::string_view to_string(SearcherColor c) {
  switch (c) {
    case SearcherColor::Blue: return "blue";
    case SearcherColor::Orange: return "orange";
    case SearcherColor::Yellow: return "yellow";
  }
  return "?";
}

Strategy strategy_from_string(std::string_view s) {
  for (Strategy v : kStrategies) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown strategy: " + std::string(s));
}

Capability capability_from_string(std::string_view s) {
  for (Capability v : kCapabilities) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown capability: " + std::string(s));
}

SearcherColor color_from_string(std::string_view s) {
  for (SearcherColor v : {SearcherColor::Blue, SearcherColor::Orange, SearcherColor::Yellow}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown color: " + std::string(s));
}

void to_json(nlohmann::json& j, const Vec2& v) { j = nlohmann::json::array({v.x, v.y}); }
void from_json(const nlohmann::json& j, Vec2& v) {
  v.x = j.at(0).get<double>();
  v.y = j.at(1).get<double>();
}

void to_json(nlohmann::json& j, const WorldConfig& w) {
  j = {{"field_size", w.field_size},     {"grid_dim", w.grid_dim},
       {"cell_pitch", w.cell_pitch},     {"outlier_radius", w.outlier_radius},
       {"agent_radius", w.agent_radius}, {"tick_rate", w.tick_rate},
       {"trial_duration", w.trial_duration}, {"warning_lead", w.warning_lead},
       {"accel", w.accel},               {"damping", w.damping},
       {"max_speed", w.max_speed}};
}

void from_json(const nlohmann::json& j, WorldConfig& w) {
  WorldConfig d;
  w.field_size = j.value("field_size", d.field_size);
  w.grid_dim = j.value("grid_dim", d.grid_dim);
  w.cell_pitch = j.value("cell_pitch", d.cell_pitch);
  w.outlier_radius = j.value("outlier_radius", d.outlier_radius);
  w.agent_radius = j.value("agent_radius", d.agent_radius);
  w.tick_rate = j.value("tick_rate", d.tick_rate);
  w.trial_duration = j.value("trial_duration", d.trial_duration);
  w.warning_lead = j.value("warning_lead", d.warning_lead);
  w.accel = j.value("accel", d.accel);
  w.damping = j.value("damping", d.damping);
  w.max_speed = j.value("max_speed", d.max_speed);
}

void to_json(nlohmann::json& j, const GridCell& c) { j = nlohmann::json::array({c.col, c.row}); }
void from_json(const nlohmann::json& j, GridCell& c) {
  c.col = j.at(0).get<int>();
  c.row = j.at(1).get<int>();
}

void to_json(nlohmann::json& j, const TrialConfig& t) {
  j = {{"trial_index", t.trial_index},
       {"rng_seed", t.rng_seed},
       {"outlier_cells", t.outlier_cells}};
  if (t.searcher) {
    j["strategy"] = to_string(t.searcher->strategy);
    j["capability"] = to_string(t.searcher->capability);
    j["searcher_color"] = to_string(t.searcher->color());
  }
}

void from_json(const nlohmann::json& j, TrialConfig& t) {
  t.trial_index = j.at("trial_index").get<int>();
  t.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  t.outlier_cells = j.at("outlier_cells").get<std::set<GridCell>>();
  t.searcher.reset();
  if (j.contains("strategy")) {
    t.searcher = SearcherSpec{strategy_from_string(j.at("strategy").get<std::string>()),
                              capability_from_string(j.at("capability").get<std::string>())};
  }
}

void to_json(nlohmann::json& j, const FrameState& f) {
  j = {{"t", f.t}, {"pos", f.pos}, {"vel", f.vel}, {"keys", f.keys}};
}

void from_json(const nlohmann::json& j, FrameState& f) {
  f.t = j.at("t").get<double>();
  f.pos = j.at("pos").get<Vec2>();
  f.vel = j.at("vel").get<Vec2>();
  f.keys = j.value("keys", KeyMask{0});
}

}  // namespace trustlab::sim
