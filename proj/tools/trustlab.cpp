#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "trustlab/pipeline/analysis.hpp"
#include "trustlab/pipeline/cohort.hpp"
#include "trustlab/pipeline/exclusion.hpp"
#include "trustlab/pipeline/render.hpp"
#include "trustlab/pipeline/series.hpp"
#include "trustlab/server/http.hpp"

namespace fs = std::filesystem;
using namespace trustlab;

namespace {

struct Globals {
  std::string data_dir = "data";
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  pipeline::ExclusionThresholds thresholds;
  double max_gap_min = 10.0;
};

std::atomic<server::HttpServer*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

pipeline::ExclusionThresholds thresholds_of(const Globals& g) {
  auto t = g.thresholds;
  t.max_gap_ms = static_cast<std::int64_t>(g.max_gap_min * 60'000.0);
  return t;
}

std::string exclusions_csv(const std::vector<pipeline::ExclusionReport>& reports,
                           const pipeline::ExclusionThresholds& t) {
  std::string out = fmt::format("# max_gap_ms={} max_total_estimate={} min_unreasonable_trials={}\n",
                                t.max_gap_ms, t.max_total_estimate, t.min_unreasonable_trials);
  out += "session_id,reason,evidence\n";
  for (const auto& r : reports) {
    out += fmt::format("{},{},\"{}\"\n", r.session_id, pipeline::to_string(r.reason), r.evidence);
  }
  return out;
}

std::pair<ts::TrustSeries, ts::TrustSeries> series_pair(const Globals& g, const std::string& export_path) {
  const auto sessions = pipeline::read_export(export_path);
  const auto t = thresholds_of(g);
  const auto result = pipeline::exclude(sessions, t);
  fmt::print(stderr, "{} sessions, {} kept, {} excluded\n", sessions.size(), result.kept.size(),
             result.excluded.size());
  pipeline::write_file_atomic(fs::path(g.out_dir) / "exclusions.csv", exclusions_csv(result.excluded, t));
  return {pipeline::build_series(result.kept, design::Group::G0),
          pipeline::build_series(result.kept, design::Group::G1)};
}

std::string series_csv(const ts::TrustSeries& a, const ts::TrustSeries& b) {
  const auto cap = ts::exog_names(ts::ExogSelector::capability_only());
  auto label = [&](const ts::TrustSeries& s, std::size_t k) {
    Eigen::Index j = 0;
    s.capability.row(static_cast<Eigen::Index>(k)).maxCoeff(&j);
    return cap[static_cast<std::size_t>(j)];
  };
  std::string out = "trial,trust_G0,capability_G0,trust_G1,capability_G1\n";
  for (std::size_t k = 0; k < a.size(); ++k) {
    out += fmt::format("{},{:.6f},{},{:.6f},{}\n", k + 1, a.values[k], label(a, k), b.values[k], label(b, k));
  }
  return out;
}

int cmd_simulate(const Globals& g, int sessions, double skill, const std::vector<double>& phi,
                 int d, double noise, std::uint64_t cohort_seed) {
  server::ServiceConfig cfg;
  cfg.data_dir = g.data_dir;
  cfg.experiment_seed = g.seed;
  server::ExperimentService svc(cfg);
  pipeline::CohortOptions opt;
  opt.sessions = sessions;
  opt.seed = cohort_seed;
  opt.bot_skill = skill;
  opt.trust.phi = phi;
  opt.trust.d = d;
  opt.trust.noise_sd = noise;
  const auto ids = pipeline::simulate_cohort(svc, opt);
  const fs::path out = fs::path(g.out_dir) / "export.jsonl";
  pipeline::write_file_atomic(out, server::export_lines(svc.export_sessions({std::nullopt, std::nullopt, true, true})));
  fmt::print("{} bot sessions written to {}; export at {}\n", ids.size(), g.data_dir, out.string());
  return 0;
}

int cmd_ingest(const Globals& g, const std::string& path) {
  const auto sessions = pipeline::read_export(path);
  std::map<std::string, int> counts;
  std::size_t trials = 0;
  for (const auto& s : sessions) {
    ++counts[fmt::format("{} {}", design::to_string(s.record.group), server::to_string(s.record.status))];
    trials += s.trials.size();
  }
  pipeline::write_file_atomic(fs::path(g.out_dir) / "sessions.jsonl", server::export_lines(sessions));
  fmt::print("{} sessions, {} trial records\n", sessions.size(), trials);
  for (const auto& [k, v] : counts) fmt::print("  {}: {}\n", k, v);
  return 0;
}

int cmd_exclude(const Globals& g, const std::string& path) {
  const auto sessions = pipeline::read_export(path);
  const auto t = thresholds_of(g);
  const auto result = pipeline::exclude(sessions, t);
  pipeline::write_file_atomic(fs::path(g.out_dir) / "kept.jsonl", server::export_lines(result.kept));
  pipeline::write_file_atomic(fs::path(g.out_dir) / "exclusions.csv", exclusions_csv(result.excluded, t));
  fmt::print("{} kept, {} excluded\n", result.kept.size(), result.excluded.size());
  for (const auto& r : result.excluded) {
    fmt::print("  {} {}: {}\n", r.session_id, pipeline::to_string(r.reason), r.evidence);
  }
  return 0;
}

int cmd_series(const Globals& g, const std::string& path) {
  const auto [a, b] = series_pair(g, path);
  pipeline::write_file_atomic(fs::path(g.out_dir) / "trust_series.csv", series_csv(a, b));
  fmt::print("series of length {} written\n", a.size());
  return 0;
}

int cmd_analyze(const Globals& g, const std::string& path, int pmax, int qmax, int restarts) {
  const auto [a, b] = series_pair(g, path);
  pipeline::AnalysisOptions opt;
  opt.p_values = ts::int_range(0, pmax);
  opt.q_values = ts::int_range(0, qmax);
  opt.fit.seed = g.seed;
  opt.fit.restarts = restarts;
  const auto report = pipeline::run_analysis(a, b, opt);
  const fs::path out = fs::path(g.out_dir) / "report.json";
  pipeline::write_file_atomic(out, pipeline::report_to_json(report).dump(2) + "\n");
  for (const auto& grp : report.groups) {
    fmt::print("{}: OLS rmse {:.4f}", design::to_string(grp.group), grp.ols.rmse);
    if (grp.arimax) {
      fmt::print(", ARIMA({},{},{}) rmse {:.4f}\n", grp.arimax->order.p, grp.arimax->order.d,
                 grp.arimax->order.q, grp.arimax->one_step_rmse);
    } else {
      fmt::print(", ARIMAX failed: {}\n", grp.arimax_error);
    }
  }
  fmt::print("report written to {}\n", out.string());
  return 0;
}

int cmd_render(const Globals& g, const std::string& report_path) {
  nlohmann::json report;
  try {
    std::ifstream in(report_path);
    if (!in) throw std::runtime_error("cannot read " + report_path);
    report = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    pipeline::write_file_atomic(fs::path(g.out_dir) / pipeline::kRenderErrorFile,
                                fmt::format("cannot render report: {}\n", e.what()));
    throw;
  }
  const auto files = pipeline::render_tables(report, g.out_dir);
  fmt::print("{} files written to {}\n", files.size(), g.out_dir);
  return 0;
}

int cmd_serve(const Globals& g, const std::string& config_path, bool data_dir_set, bool seed_set) {
  auto cfg = server::load_server_config(config_path.empty() ? std::nullopt
                                                            : std::optional<fs::path>(config_path));
  if (data_dir_set) cfg.service.data_dir = g.data_dir;
  if (seed_set) cfg.service.experiment_seed = g.seed;
  server::ExperimentService svc(cfg.service);
  server::HttpServer http(svc);
  const int port = http.bind(cfg.host, cfg.port);
  fmt::print("serving on http://{}:{} (data {}, seed {})\n", cfg.host, port,
             cfg.service.data_dir.string(), cfg.service.experiment_seed);
  std::fflush(stdout);
  g_server = &http;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::atomic<bool> running{true};
  std::thread reaper([&] {
    while (running) {
      for (int i = 0; i < 600 && running; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      if (running) svc.abandon_idle(cfg.idle_timeout_ms);
    }
  });
  http.serve();
  running = false;
  reaper.join();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trustlab: grid-search trust experiment and analysis pipeline"};
  app.require_subcommand(1);
  Globals g;
  auto* data_opt = app.add_option("--data-dir", g.data_dir, "Session store directory");
  auto* seed_opt = app.add_option("--seed", g.seed, "Experiment seed");
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_option("--max-gap-min", g.max_gap_min, "Longest pause between trials before exclusion (minutes)");
  app.add_option("--max-total", g.thresholds.max_total_estimate, "Largest plausible total estimate");
  app.add_option("--min-bad-trials", g.thresholds.min_unreasonable_trials,
                 "Implausible trials needed to exclude a session");

  std::string input;
  auto* ingest = app.add_subcommand("ingest", "Parse an export stream and summarize it");
  ingest->add_option("export", input, "Export file")->required();
  auto* excl = app.add_subcommand("exclude", "Apply exclusion rules to an export");
  excl->add_option("export", input, "Export file")->required();
  auto* series = app.add_subcommand("series", "Build group-mean trust series");
  series->add_option("export", input, "Export file")->required();

  auto* analyze = app.add_subcommand("analyze", "Fit OLS and ARIMAX models and cross-validate");
  analyze->add_option("export", input, "Export file")->required();
  int pmax = 4, qmax = 4, restarts = 5;
  analyze->add_option("--pmax", pmax, "Largest AR order in the AIC grid");
  analyze->add_option("--qmax", qmax, "Largest MA order in the AIC grid");
  analyze->add_option("--restarts", restarts, "Optimizer starts per fit");

  auto* render = app.add_subcommand("render", "Render tables and figure data from report.json");
  render->add_option("report", input, "Report file")->required();

  auto* simulate = app.add_subcommand("simulate", "Play a cohort of bot sessions and export it");
  int sessions = 20;
  double skill = 0.9, noise = 0.05;
  std::vector<double> phi{0.6};
  int d = 0;
  std::uint64_t cohort_seed = 1;
  simulate->add_option("--sessions", sessions, "Number of sessions (groups alternate)");
  simulate->add_option("--skill", skill, "Bot detection probability");
  simulate->add_option("--phi", phi, "AR coefficients of the synthetic trust errors");
  simulate->add_option("--d", d, "Differencing order of the synthetic trust errors");
  simulate->add_option("--noise", noise, "Innovation standard deviation");
  simulate->add_option("--cohort-seed", cohort_seed, "Seed for bot behavior and trust");

  auto* serve = app.add_subcommand("serve", "Run the experiment server");
  std::string config_path;
  serve->add_option("--config", config_path, "Server config file (JSON)");

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(g.out_dir);
    if (*ingest) return cmd_ingest(g, input);
    if (*excl) return cmd_exclude(g, input);
    if (*series) return cmd_series(g, input);
    if (*analyze) return cmd_analyze(g, input, pmax, qmax, restarts);
    if (*render) return cmd_render(g, input);
    if (*simulate) return cmd_simulate(g, sessions, skill, phi, d, noise, cohort_seed);
    if (*serve) return cmd_serve(g, config_path, data_opt->count() > 0, seed_opt->count() > 0);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 1;
}
