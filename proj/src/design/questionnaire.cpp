#include "trustlab/design/questionnaire.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace trustlab::design {

std::string Questionnaire::report_line(sim::SearcherColor color, int reported) const {
  return fmt::format("The {} autonomous searcher reports finding {} outliers",
                     sim::to_string(color), reported);
}

const Questionnaire& questionnaire() {
  static const Questionnaire q{
      "How many outliers did you find with your spotlight this trial?",
      "How many total outliers were hidden in the entire grid this trial?",
      {{{"I am familiar with the autonomous searcher's strategy.", Measure::StrategyFocused},
        {"The autonomous searcher is reliable.", Measure::CapabilityFocused},
        {"I trust the autonomous searcher.", Measure::Trust}}},
      "Not at All",
      "Extremely",
  };
  return q;
}

void SurveyResponse::validate() const {
  if (trial_index < 0) throw std::invalid_argument("survey: negative trial index");
  if (found_count < 0) throw std::invalid_argument("survey: negative found_count");
  if (total_estimate < 0) throw std::invalid_argument("survey: negative total_estimate");
  if (likert) {
    for (int v : *likert) {
      if (v < kLikertMin || v > kLikertMax) {
        throw std::invalid_argument(fmt::format("survey: rating {} outside {}..{}", v, kLikertMin,
                                                kLikertMax));
      }
    }
  }
}

double normalize_trust(int likert) {
  if (likert < kLikertMin || likert > kLikertMax) {
    throw std::out_of_range(fmt::format("rating {} outside {}..{}", likert, kLikertMin, kLikertMax));
  }
  return static_cast<double>(likert - kLikertMin) / (kLikertMax - kLikertMin);
}

void to_json(nlohmann::json& j, const SurveyResponse& s) {
  j = {{"trial_index", s.trial_index},
       {"found_count", s.found_count},
       {"total_estimate", s.total_estimate},
       {"timestamp_ms", s.timestamp_ms}};
  j["likert"] = s.likert ? nlohmann::json(*s.likert) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, SurveyResponse& s) {
  s.trial_index = j.at("trial_index").get<int>();
  s.found_count = j.at("found_count").get<int>();
  s.total_estimate = j.at("total_estimate").get<int>();
  s.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
  s.likert.reset();
  if (j.contains("likert") && !j.at("likert").is_null()) {
    s.likert = j.at("likert").get<std::array<int, 3>>();
  }
}

nlohmann::json questionnaire_json() {
  const Questionnaire& q = questionnaire();
  auto statements = nlohmann::json::array();
  for (const auto& s : q.trust_statements) statements.push_back(s.text);
  return {{"task_q1", q.task_q1},
          {"task_q2", q.task_q2},
          {"report_template", "The {color} autonomous searcher reports finding {x} outliers"},
          {"trust_statements", statements},
          {"scale", {{"min", kLikertMin}, {"max", kLikertMax},
                     {"min_label", q.scale_low_label}, {"max_label", q.scale_high_label}}}};
}

}  // namespace trustlab::design
