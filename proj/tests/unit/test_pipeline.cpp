#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "trustlab/pipeline/analysis.hpp"
#include "trustlab/pipeline/cohort.hpp"
#include "trustlab/pipeline/exclusion.hpp"
#include "trustlab/pipeline/render.hpp"
#include "trustlab/pipeline/series.hpp"
#include "trustlab/rng.hpp"
#include "trustlab/synth/trust_gen.hpp"

using namespace trustlab;
using namespace trustlab::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("trustlab_pipe_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// A complete, well-behaved session assembled directly (no replay needed).
server::SessionData fake_session(const std::string& id, design::Group group, std::uint64_t seed,
                                 const std::vector<int>& ratings) {
  server::SessionData s;
  s.record.session_id = id;
  s.record.group = group;
  s.record.status = server::SessionStatus::Complete;
  s.record.trial_cursor = design::kTotalTrials;
  s.record.experiment_seed = seed;
  for (int k = 0; k < design::kTotalTrials; ++k) {
    server::TrialLog t;
    t.session_id = id;
    t.trial_index = k;
    t.server_recv_at_ms = 1'000'000 + k * 40'000;
    t.survey.trial_index = k;
    t.survey.found_count = 3;
    t.survey.total_estimate = 9;
    t.result.true_outliers = 9;
    if (k >= design::kPracticeTrials) {
      const int r = ratings[static_cast<std::size_t>(k - design::kPracticeTrials) % ratings.size()];
      t.survey.likert = std::array<int, 3>{r, r, r};
    }
    s.trials.push_back(t);
  }
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("exclude") {
  const auto good = fake_session("a1", design::Group::G0, 3, {5});

  SUBCASE("legal answers are kept") {
    const auto r = exclude({good});
    CHECK(r.kept.size() == 1);
    CHECK(r.excluded.empty());
  }
  SUBCASE("abandoned or short sessions are incomplete") {
    auto s = good;
    s.record.status = server::SessionStatus::Abandoned;
    auto v = judge(s);
    REQUIRE(v);
    CHECK(v->reason == ExclusionReason::Incomplete);
    auto shortened = good;
    shortened.trials.pop_back();
    CHECK(judge(shortened)->reason == ExclusionReason::Incomplete);
  }
  SUBCASE("long inter-trial gap") {
    auto s = good;
    for (std::size_t k = 30; k < s.trials.size(); ++k) s.trials[k].server_recv_at_ms += 11 * 60'000;
    auto v = judge(s);
    REQUIRE(v);
    CHECK(v->reason == ExclusionReason::OutOfProtocolBreak);
    CHECK(v->evidence.find("29 and 30") != std::string::npos);
    ExclusionThresholds loose;
    loose.max_gap_ms = 20 * 60'000;
    CHECK_FALSE(judge(s, loose));
  }
  SUBCASE("unreasonable answers need three trials") {
    auto s = good;
    s.trials[10].survey.found_count = 50;
    s.trials[20].survey.found_count = 50;
    CHECK_FALSE(judge(s));
    s.trials[30].survey.found_count = 50;
    auto v = judge(s);
    REQUIRE(v);
    CHECK(v->reason == ExclusionReason::UnreasonableAnswers);
    auto t = good;
    for (int k : {1, 2, 3}) t.trials[static_cast<std::size_t>(k)].survey.total_estimate = 50;
    CHECK(judge(t)->reason == ExclusionReason::UnreasonableAnswers);
    for (int k : {1, 2, 3}) t.trials[static_cast<std::size_t>(k)].survey.total_estimate = 49;
    CHECK_FALSE(judge(t));
  }
  SUBCASE("one primary reason, first rule wins") {
    auto s = good;
    s.record.status = server::SessionStatus::Active;
    for (auto& t : s.trials) t.survey.found_count = 60;
    s.trials[5].server_recv_at_ms += 3'600'000;
    const auto r = exclude({s});
    REQUIRE(r.excluded.size() == 1);
    CHECK(r.excluded[0].reason == ExclusionReason::Incomplete);
  }
  SUBCASE("verdicts are monotone under adding sessions") {
    std::vector<server::SessionData> pool;
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
      auto s = fake_session("s" + std::to_string(i), design::assign_group(static_cast<std::uint64_t>(i)), 3, {4, 6});
      const auto defect = rng.uniform_int(0, 3);
      if (defect == 1) s.record.status = server::SessionStatus::Abandoned;
      if (defect == 2) s.trials[40].server_recv_at_ms += 3'600'000;
      if (defect == 3) {
        for (int k = 0; k < 3; ++k) s.trials[static_cast<std::size_t>(10 + k)].survey.total_estimate = 80;
      }
      pool.push_back(s);
    }
    const auto all = exclude(pool);
    for (std::size_t cut = 0; cut <= pool.size(); cut += 7) {
      const auto part = exclude(std::vector<server::SessionData>(pool.begin(), pool.begin() + static_cast<long>(cut)));
      for (const auto& e : part.excluded) {
        const auto it = std::find_if(all.excluded.begin(), all.excluded.end(),
                                     [&](const ExclusionReport& x) { return x.session_id == e.session_id; });
        REQUIRE(it != all.excluded.end());
        CHECK(it->reason == e.reason);
      }
    }
    CHECK(all.kept.size() + all.excluded.size() == pool.size());
  }
}

TEST_CASE("build_series") {
  SUBCASE("single subject equals normalized ratings") {
    std::vector<int> ratings;
    for (int k = 0; k < 63; ++k) ratings.push_back(1 + k % 9);
    const auto s = build_series({fake_session("a", design::Group::G1, 4, ratings)}, design::Group::G1);
    REQUIRE(s.size() == 63);
    for (std::size_t k = 0; k < 63; ++k) CHECK(s.values[k] == design::normalize_trust(ratings[k]));
    const auto main = design::build_plan(4, design::Group::G1).main_trials();
    for (std::size_t k = 0; k < 63; ++k) {
      CHECK(s.capability(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(main[k].searcher->capability)) == 1.0);
    }
  }
  SUBCASE("two opposite subjects average to the midpoint") {
    const auto s = build_series({fake_session("a", design::Group::G0, 4, {1}), fake_session("b", design::Group::G0, 4, {9}),
                                 fake_session("c", design::Group::G1, 4, {2})},
                                design::Group::G0);
    for (double v : s.values) CHECK(v == 0.5);
  }
  SUBCASE("matches a streaming mean") {
    Rng rng(6);
    std::vector<server::SessionData> sessions;
    for (int i = 0; i < 13; ++i) {
      std::vector<int> r(63);
      for (auto& v : r) v = static_cast<int>(rng.uniform_int(1, 9));
      sessions.push_back(fake_session("x" + std::to_string(i), design::Group::G0, 8, r));
    }
    const auto s = build_series(sessions, design::Group::G0);
    for (std::size_t k = 0; k < 63; ++k) {
      double mean = 0.0;
      int n = 0;
      for (const auto& sess : sessions) {
        const double x = design::normalize_trust((*sess.trials[k + 9].survey.likert)[2]);
        mean += (x - mean) / ++n;
      }
      CHECK(std::abs(s.values[k] - mean) < 1e-12);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_series({}, design::Group::G0), std::invalid_argument);
    CHECK_THROWS_AS(build_series({fake_session("a", design::Group::G1, 4, {3})}, design::Group::G0),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_series({fake_session("a", design::Group::G0, 4, {3}), fake_session("b", design::Group::G0, 5, {3})},
                                 design::Group::G0),
                    std::invalid_argument);
  }
}

TEST_CASE("analysis and rendering") {
  synth::SyntheticTrustParams params;
  params.phi = {0.7};
  params.noise_sd = 0.04;
  const auto g0 = synth::gen_trust_arimax(params, design::build_plan(21, design::Group::G0), 1);
  const auto g1 = synth::gen_trust_arimax(params, design::build_plan(21, design::Group::G1), 2);
  static const AnalysisReport report = run_analysis(g0, g1);  // shared across subcases
  const auto j = report_to_json(report);

  for (const auto& g : report.groups) {
    CHECK(g.series.size() == 63);
    CHECK(g.aic.aic.size() == 5);
    CHECK(g.aic.d == 1);
    REQUIRE(g.arimax.has_value());
    CHECK(g.arimax->order == *g.aic.best);
    CHECK(g.residual_acf.values.size() == 21);
  }
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) CHECK(report.arimax_rmse[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].has_value());
    CHECK(*report.arimax_rmse[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] ==
          report.groups[static_cast<std::size_t>(i)].arimax->one_step_rmse);
  }

  TempDir dir;
  const auto files = render_tables(j, dir.path);
  CHECK(files.size() == 2 * 9 + 3);
  for (const auto& f : files) CHECK(fs::exists(f));

  const auto aic = lines_of(slurp(dir.path / "aic_G0.csv"));
  REQUIRE(aic.size() == 6);
  CHECK(aic[0] == "p\\q,0,1,2,3,4");
  for (std::size_t i = 1; i < aic.size(); ++i) {
    CHECK(aic[i].rfind(std::to_string(i - 1) + ",", 0) == 0);
    CHECK(std::count(aic[i].begin(), aic[i].end(), ',') == 5);
  }

  const auto rmse = lines_of(slurp(dir.path / "rmse.csv"));
  REQUIRE(rmse.size() == 5);
  CHECK(rmse[0] == "model,G0,G1");
  CHECK(rmse[1] == "blocked,strategy,capability");
  CHECK(rmse[2].rfind("linear_regression,", 0) == 0);
  const std::string dagger = "\xE2\x80\xA0";
  CHECK(rmse[3].rfind("G0_arimax,", 0) == 0);
  CHECK(rmse[3].find(dagger) == rmse[3].size() - dagger.size());
  CHECK(rmse[4].find(dagger) != std::string::npos);
  CHECK(rmse[4].find(dagger) < rmse[4].rfind(','));

  CHECK(lines_of(slurp(dir.path / "fig_trust.csv")).size() == 64);
  CHECK(lines_of(slurp(dir.path / "fig_correlogram_G1.csv")).size() == 22);
  CHECK(slurp(dir.path / "ols_G0.txt").find("capability_100") != std::string::npos);

  SUBCASE("byte-identical reruns") {
    TempDir other;
    render_tables(report_to_json(run_analysis(g0, g1)), other.path);
    for (const auto& f : files) CHECK(slurp(f) == slurp(other.path / f.filename()));
  }
  SUBCASE("empty report guard") {
    TempDir bad;
    CHECK_THROWS_AS(render_tables(nlohmann::json::object(), bad.path), RenderError);
    CHECK(fs::exists(bad.path / kRenderErrorFile));
    CHECK_FALSE(fs::exists(bad.path / "rmse.csv"));
  }
  SUBCASE("OLS coefficients are capability means") {
    for (const auto& g : report.groups) {
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        int n = 0;
        for (std::size_t k = 0; k < g.series.size(); ++k) {
          if (g.series.capability(static_cast<Eigen::Index>(k), c) == 1.0) {
            sum += g.series.values[k];
            ++n;
          }
        }
        CHECK(std::abs(g.ols.coefficients(c) - sum / n) < 1e-9);
      }
    }
  }
}

TEST_CASE("cross-validation matrix favors the diagonal on average") {
  synth::SyntheticTrustParams params;
  params.phi = {0.6};
  params.noise_sd = 0.05;
  AnalysisOptions opt;
  opt.p_values = ts::int_range(0, 1);
  opt.q_values = ts::int_range(0, 1);
  double diag = 0.0, off = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g0 = synth::gen_trust_arimax(params, design::build_plan(seed, design::Group::G0), 2 * seed + 100);
    const auto g1 = synth::gen_trust_arimax(params, design::build_plan(seed, design::Group::G1), 2 * seed + 101);
    const auto r = run_analysis(g0, g1, opt);
    diag += r.arimax_rmse[0][0].value() + r.arimax_rmse[1][1].value();
    off += r.arimax_rmse[0][1].value() + r.arimax_rmse[1][0].value();
  }
  CHECK(diag <= off);
}

TEST_CASE("AIC grid picks the empty model for a pure random walk") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(seed);
    const int n = 2000;
    Eigen::VectorXd y(n);
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 3);
    double level = 0.0;
    for (int t = 0; t < n; ++t) {
      const auto c = static_cast<int>(rng.uniform_int(0, 2));
      x(t, c) = 1.0;
      level += 0.05 * rng.normal();
      y(t) = 0.3 + 0.2 * c + level;
    }
    ts::FitOptions fo;
    fo.standard_errors = false;
    const auto table = ts::aic_grid(y, x, ts::int_range(0, 1), ts::int_range(0, 1), 1, fo);
    hits += table.best && table.best->p == 0 && table.best->q == 0;
  }
  CHECK(hits >= 5);
}

TEST_CASE("bot cohort through the service") {
  TempDir dir;
  server::ServiceConfig cfg;
  cfg.data_dir = dir.path;
  cfg.experiment_seed = 12;
  cfg.fsync = false;
  server::ExperimentService svc(cfg);
  CohortOptions opt;
  opt.sessions = 4;
  const auto ids = simulate_cohort(svc, opt);
  REQUIRE(ids.size() == 4);
  const auto exported = svc.export_sessions();
  const auto text = server::export_lines(exported);
  write_file_atomic(dir.path / "export.jsonl", text);
  const auto loaded = read_export(dir.path / "export.jsonl");
  CHECK(loaded == exported);
  for (const auto& s : loaded) {
    CHECK(s.record.synthetic);
    CHECK(s.record.status == server::SessionStatus::Complete);
  }
  const auto kept = exclude(loaded);
  CHECK(kept.kept.size() == 4);
  for (design::Group g : {design::Group::G0, design::Group::G1}) {
    const auto series = build_series(kept.kept, g);
    CHECK(series.size() == 63);
    for (double v : series.values) CHECK((v >= 0.0 && v <= 1.0));
  }
  // Same seed, fresh store: identical ratings.
  TempDir dir2;
  cfg.data_dir = dir2.path;
  server::ExperimentService svc2(cfg);
  simulate_cohort(svc2, opt);
  const auto again = svc2.export_sessions();
  for (std::size_t i = 0; i < again.size(); ++i) {
    for (std::size_t k = 0; k < again[i].trials.size(); ++k) {
      CHECK(again[i].trials[k].survey == exported[i].trials[k].survey);
      CHECK(again[i].trials[k].frames == exported[i].trials[k].frames);
    }
  }
}
