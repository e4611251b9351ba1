#include "trustlab/pipeline/cohort.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "trustlab/rng.hpp"

namespace trustlab::pipeline {
namespace {

constexpr std::uint64_t kCohortStream = 0x434F484F;  // "COHO"
constexpr std::uint64_t kTrustStream = 0x54525354;   // "TRST"

}  // namespace

std::vector<std::string> simulate_cohort(server::ExperimentService& service,
                                         const CohortOptions& opt) {
  if (opt.sessions < 0) throw std::invalid_argument("simulate_cohort: negative session count");
  if (opt.kinds.empty()) throw std::invalid_argument("simulate_cohort: no bot kinds");
  opt.trust.validate();
  const sim::WorldConfig& world = service.config().world;
  std::vector<std::string> ids;
  for (int i = 0; i < opt.sessions; ++i) {
    const server::SessionRecord rec = service.create_session(true);
    const design::ExperimentPlan& plan = service.plan(rec.group);
    const std::uint64_t subject = derive_seed(opt.seed, {kCohortStream, static_cast<std::uint64_t>(i)});
    const ts::TrustSeries trust = synth::gen_trust_arimax(opt.trust, plan, derive_seed(subject, {kTrustStream}));
    const synth::BotPolicy policy{opt.kinds[static_cast<std::size_t>(i) % opt.kinds.size()], opt.bot_skill};
    for (int k = 0; k < design::kTotalTrials; ++k) {
      const sim::TrialConfig& trial = plan.trial(k);
      const synth::BotPlay play =
          synth::bot_play_trial(policy, trial, world, derive_seed(subject, {static_cast<std::uint64_t>(k)}));
      design::SurveyResponse survey = play.answers;
      if (!trial.solo()) {
        const int rating = synth::likert_from_trust(trust.values[static_cast<std::size_t>(k - design::kPracticeTrials)]);
        survey.likert = std::array<int, 3>{rating, rating, rating};
      }
      survey.timestamp_ms = static_cast<std::int64_t>(k) * 30'000;
      service.submit_trial(rec.session_id, k, play.frames, survey);
    }
    ids.push_back(rec.session_id);
  }
  return ids;
}

std::vector<server::SessionData> read_export(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read export " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return server::parse_export(buf.str());
}

}  // namespace trustlab::pipeline
