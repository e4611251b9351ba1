#include <doctest.h>

#include <map>
#include <set>

#include "trustlab/design/plan.hpp"
#include "trustlab/design/questionnaire.hpp"

using namespace trustlab;
using namespace trustlab::design;

namespace {

template <class T>
std::map<T, int> tally(const Block& b, T (*get)(const sim::TrialConfig&)) {
  std::map<T, int> m;
  for (const auto& t : b.trials) ++m[get(t)];
  return m;
}

sim::Strategy strategy_of(const sim::TrialConfig& t) { return t.searcher->strategy; }
sim::Capability capability_of(const sim::TrialConfig& t) { return t.searcher->capability; }

}  // namespace

TEST_CASE("plan shape and balance") {
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 0xDEADBEEFull}) {
    for (Group g : {Group::G0, Group::G1}) {
      const ExperimentPlan plan = build_plan(seed, g);
      REQUIRE(plan.practice.size() == kPracticeTrials);
      for (int i = 0; i < kPracticeTrials; ++i) {
        CHECK(plan.practice[static_cast<std::size_t>(i)].solo());
        CHECK(plan.practice[static_cast<std::size_t>(i)].trial_index == i);
      }
      std::set<FactorLevel> blocked_levels;
      for (int b = 0; b < kBlocks; ++b) {
        const Block& block = plan.blocks[static_cast<std::size_t>(b)];
        REQUIRE(block.trials.size() == kTrialsPerBlock);
        blocked_levels.insert(block.blocked);
        for (std::size_t k = 0; k < block.trials.size(); ++k) {
          CHECK(block.trials[k].trial_index == kPracticeTrials + b * kTrialsPerBlock + static_cast<int>(k));
          CHECK_FALSE(block.trials[k].solo());
          const auto n = block.trials[k].outlier_cells.size();
          CHECK((n >= 5 && n <= 15));
        }
        if (g == Group::G0) {
          REQUIRE(std::holds_alternative<sim::Strategy>(block.blocked));
          for (const auto& t : block.trials) CHECK(t.searcher->strategy == std::get<sim::Strategy>(block.blocked));
          for (const auto& [level, count] : tally(block, &capability_of)) CHECK(count == 7);
          CHECK(tally(block, &capability_of).size() == 3);
        } else {
          REQUIRE(std::holds_alternative<sim::Capability>(block.blocked));
          for (const auto& t : block.trials) CHECK(t.searcher->capability == std::get<sim::Capability>(block.blocked));
          for (const auto& [level, count] : tally(block, &strategy_of)) CHECK(count == 7);
          CHECK(tally(block, &strategy_of).size() == 3);
        }
      }
      CHECK(blocked_levels.size() == 3);
      CHECK(plan.main_trials().size() == kMainTrials);
      CHECK(plan.trial(71).trial_index == 71);
      CHECK(plan.trial(3).trial_index == 3);
      CHECK_THROWS_AS(plan.trial(72), std::out_of_range);
    }
  }
}

TEST_CASE("plan determinism and seed sensitivity") {
  CHECK(build_plan(5, Group::G0) == build_plan(5, Group::G0));
  CHECK_FALSE(build_plan(5, Group::G0) == build_plan(6, Group::G0));
  // Practice does not depend on the group.
  CHECK(build_plan(5, Group::G0).practice == build_plan(5, Group::G1).practice);
  // Main trial seeds differ between groups.
  CHECK(trial_seed(5, Group::G0, 20) != trial_seed(5, Group::G1, 20));
  CHECK(trial_seed(5, Group::G0, 20) == build_plan(5, Group::G0).trial(20).rng_seed);
  // Colors follow capability one-to-one.
  const auto plan = build_plan(9, Group::G1);
  for (const auto& t : plan.main_trials()) {
    CHECK(sim::capability_of(t.searcher->color()) == t.searcher->capability);
  }
  // Block orders are permutations that vary across seeds.
  std::set<std::vector<FactorLevel>> orders;
  for (std::uint64_t s = 0; s < 60; ++s) {
    const auto p = build_plan(s, Group::G0);
    orders.insert({p.blocks[0].blocked, p.blocks[1].blocked, p.blocks[2].blocked});
  }
  CHECK(orders.size() == 6);
}

TEST_CASE("group assignment and names") {
  CHECK(assign_group(0) == Group::G0);
  CHECK(assign_group(1) == Group::G1);
  CHECK(assign_group(2) == Group::G0);
  CHECK(group_from_string("G1") == Group::G1);
  CHECK(group_from_string("0") == Group::G0);
  CHECK(to_string(Group::G1) == "G1");
  CHECK_THROWS_AS(group_from_string("G2"), std::invalid_argument);
}

TEST_CASE("plan json") {
  nlohmann::json j = build_plan(3, Group::G0);
  CHECK(j["group"] == "G0");
  CHECK(j["practice"].size() == 9);
  CHECK(j["blocks"].size() == 3);
  CHECK(j["blocks"][0]["trials"].size() == 21);
}

TEST_CASE("trust normalization") {
  CHECK(normalize_trust(1) == 0.0);
  CHECK(normalize_trust(9) == 1.0);
  CHECK(normalize_trust(5) == 0.5);
  for (int v = 1; v < 9; ++v) CHECK(normalize_trust(v) < normalize_trust(v + 1));
  CHECK_THROWS_AS(normalize_trust(0), std::out_of_range);
  CHECK_THROWS_AS(normalize_trust(10), std::out_of_range);
}

TEST_CASE("survey responses") {
  SurveyResponse r{12, 3, 9, std::array<int, 3>{1, 5, 9}, 1700000000000};
  CHECK_NOTHROW(r.validate());
  nlohmann::json j = r;
  CHECK(j.get<SurveyResponse>() == r);
  SurveyResponse solo{2, 4, 4, std::nullopt, 5};
  CHECK_NOTHROW(solo.validate());
  nlohmann::json js = solo;
  CHECK(js.get<SurveyResponse>() == solo);
  r.likert = std::array<int, 3>{1, 10, 9};
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r.likert.reset();
  r.found_count = -1;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("questionnaire content") {
  const auto& q = questionnaire();
  CHECK(q.trust_statements[kTrustStatement].measure == Measure::Trust);
  CHECK(q.scale_low_label == "Not at All");
  CHECK(q.scale_high_label == "Extremely");
  CHECK(q.report_line(sim::SearcherColor::Orange, 4) ==
        "The orange autonomous searcher reports finding 4 outliers");
  const auto j = questionnaire_json();
  CHECK(j["trust_statements"].size() == 3);
}
