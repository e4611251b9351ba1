#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "trustlab/sim/world.hpp"

namespace trustlab::design {

inline constexpr int kLikertMin = 1;
inline constexpr int kLikertMax = 9;

enum class Measure { StrategyFocused, CapabilityFocused, Trust };

struct TrustStatement {
  std::string_view text;
  Measure measure;
};

/// Prompts shown after each trial. Served to clients so the wording lives in
/// one place.
struct Questionnaire {
  std::string_view task_q1;
  std::string_view task_q2;
  std::array<TrustStatement, 3> trust_statements;
  std::string_view scale_low_label;
  std::string_view scale_high_label;

  /// "The <color> autonomous searcher reports finding <x> outliers"
  std::string report_line(sim::SearcherColor color, int reported) const;
};

const Questionnaire& questionnaire();

/// Index of the modeled trust statement within `likert`.
inline constexpr std::size_t kTrustStatement = 2;

struct SurveyResponse {
  int trial_index = 0;
  int found_count = 0;
  int total_estimate = 0;
  // Absent on solo practice trials, which have no searcher to rate.
  std::optional<std::array<int, 3>> likert;
  std::int64_t timestamp_ms = 0;

  /// Throws std::invalid_argument on negative counts or off-scale ratings.
  void validate() const;

  friend bool operator==(const SurveyResponse&, const SurveyResponse&) = default;
};

/// Maps a 1..9 rating onto [0, 1]. Throws std::out_of_range off the scale.
double normalize_trust(int likert);

void to_json(nlohmann::json& j, const SurveyResponse& s);
void from_json(const nlohmann::json& j, SurveyResponse& s);
nlohmann::json questionnaire_json();

}  // namespace trustlab::design
