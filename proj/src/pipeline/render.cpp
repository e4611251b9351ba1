#include "trustlab/pipeline/render.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace trustlab::pipeline {
namespace fs = std::filesystem;

namespace {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  std::vector<std::string> notes;
};

std::string cell(const nlohmann::json& v, int precision) {
  if (v.is_null()) return "";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return fmt::format("{:.{}f}", v.get<double>(), precision);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(r[i]);
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;  // count UTF-8 code points
  return n;
}

std::string to_text(const std::string& title, const Table& t) {
  std::vector<std::size_t> width(t.header.size(), 0);
  auto grow = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], display_width(r[i].empty() ? "-" : r[i]));
    }
  };
  grow(t.header);
  for (const auto& r : t.rows) grow(r);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;

  std::string out = title + "\n" + std::string(total, '=') + "\n";
  auto line = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string s = r[i].empty() ? "-" : r[i];
      const std::string pad(width[i] - display_width(s), ' ');
      out += i == 0 ? s + pad : pad + s;
      out += "  ";
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  };
  line(t.header);
  out += std::string(total, '-') + "\n";
  for (const auto& r : t.rows) line(r);
  out += std::string(total, '-') + "\n";
  for (const auto& n : t.notes) out += n + "\n";
  return out;
}

double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

Table ols_table(const nlohmann::json& g) {
  const auto& o = g.at("ols");
  Table t{{"term", "coef", "std_err", "t", "p_value"}, {}, {}};
  for (std::size_t i = 0; i < o.at("terms").size(); ++i) {
    t.rows.push_back({o["terms"][i].get<std::string>(), cell(o["estimate"][i], 4),
                      cell(o["stderr"][i], 4), cell(o["t"][i], 3), cell(o["p"][i], 3)});
  }
  t.notes = {fmt::format("observations: {}", g.at("n").get<int>()),
             fmt::format("r_squared: {}", cell(o.at("r_squared"), 4)),
             fmt::format("log_likelihood: {}", cell(o.at("loglik"), 3)),
             fmt::format("rmse: {}", cell(o.at("rmse"), 4))};
  return t;
}

Table aic_table(const nlohmann::json& g) {
  const auto& a = g.at("aic");
  Table t;
  t.header.push_back("p\\q");
  for (const auto& q : a.at("q")) t.header.push_back(std::to_string(q.get<int>()));
  for (std::size_t i = 0; i < a.at("p").size(); ++i) {
    Row r{std::to_string(a["p"][i].get<int>())};
    for (const auto& v : a["values"][i]) r.push_back(cell(v, 2));
    t.rows.push_back(std::move(r));
  }
  const auto& best = a.at("best");
  t.notes.push_back(best.is_null() ? "best order: none"
                                   : fmt::format("best order: ARIMA({},{},{})", best[0].get<int>(),
                                                 best[1].get<int>(), best[2].get<int>()));
  return t;
}

Table arimax_table(const nlohmann::json& g) {
  Table t{{"term", "coef", "std_err", "z", "p_value"}, {}, {}};
  const auto& f = g.at("arimax");
  if (f.is_null()) {
    t.notes.push_back("fit failed: " + g.value("arimax_error", std::string("unknown")));
    return t;
  }
  for (std::size_t i = 0; i < f.at("terms").size(); ++i) {
    const auto& est = f["estimate"][i];
    const auto& se = f["stderr"][i];
    nlohmann::json z = nullptr, p = nullptr;
    if (!est.is_null() && !se.is_null() && se.get<double>() > 0.0) {
      z = est.get<double>() / se.get<double>();
      p = two_sided_normal_p(z.get<double>());
    }
    t.rows.push_back({f["terms"][i].get<std::string>(), cell(est, 4), cell(se, 4), cell(z, 3),
                      cell(p, 3)});
  }
  const auto& order = f.at("order");
  t.notes = {fmt::format("order: ARIMA({},{},{})", order[0].get<int>(), order[1].get<int>(),
                         order[2].get<int>()),
             fmt::format("log_likelihood: {}", cell(f.at("loglik"), 3)),
             fmt::format("aic: {}", cell(f.at("aic"), 3)),
             fmt::format("one_step_rmse: {}", cell(f.at("rmse"), 4))};
  if (f.value("level_normalized", false)) t.notes.push_back("capability levels pinned to zero-mean errors");
  return t;
}

std::string blocked_label(const std::string& group) { return group == "G0" ? "strategy" : "capability"; }

Table rmse_table(const nlohmann::json& report) {
  const auto& groups = report.at("groups");
  Table t{{"model"}, {}, {"\xE2\x80\xA0 cross-validated: model fitted on one group, evaluated on the other"}};
  Row blocked{"blocked"};
  Row ols{"linear_regression"};
  for (const auto& g : groups) {
    const std::string name = g.at("group");
    t.header.push_back(name);
    blocked.push_back(blocked_label(name));
    ols.push_back(cell(g.at("ols").at("rmse"), 4));
  }
  t.rows.push_back(blocked);
  t.rows.push_back(ols);
  const auto& m = report.at("arimax_rmse");
  for (std::size_t fit = 0; fit < groups.size(); ++fit) {
    Row r{groups[fit].at("group").get<std::string>() + "_arimax"};
    for (std::size_t eval = 0; eval < groups.size(); ++eval) {
      std::string c = cell(m[fit][eval], 4);
      if (!c.empty() && fit != eval) c += "\xE2\x80\xA0";
      r.push_back(c);
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

std::string fig_trust(const nlohmann::json& report) {
  Table t{{"trial"}, {}, {}};
  const auto& groups = report.at("groups");
  for (const auto& g : groups) {
    const std::string name = g.at("group");
    t.header.push_back("trust_" + name);
    t.header.push_back("capability_" + name);
    t.header.push_back("strategy_" + name);
  }
  const std::size_t n = groups[0].at("n");
  for (std::size_t k = 0; k < n; ++k) {
    Row r{std::to_string(k + 1)};
    for (const auto& g : groups) {
      const auto& s = g.at("series");
      r.push_back(k < s["values"].size() ? cell(s["values"][k], 6) : "");
      r.push_back(k < s["capability"].size() ? s["capability"][k].get<std::string>() : "");
      r.push_back(k < s["strategy"].size() ? s["strategy"][k].get<std::string>() : "");
    }
    t.rows.push_back(std::move(r));
  }
  return to_csv(t);
}

std::string fig_residuals(const nlohmann::json& g) {
  Table t{{"trial", "trust", "ols_fitted", "residual"}, {}, {}};
  const auto& o = g.at("ols");
  const auto& y = g.at("series").at("values");
  for (std::size_t k = 0; k < y.size(); ++k) {
    t.rows.push_back({std::to_string(k + 1), cell(y[k], 6), cell(o["fitted"][k], 6), cell(o["residuals"][k], 6)});
  }
  return to_csv(t);
}

std::string fig_correlogram(const nlohmann::json& g) {
  Table t{{"lag", "acf", "pacf", "band_low", "band_high"}, {}, {}};
  const auto& c = g.at("correlogram");
  const double band = c.at("band").get<double>();
  for (std::size_t k = 0; k < c.at("acf").size(); ++k) {
    t.rows.push_back({std::to_string(k), cell(c["acf"][k], 6),
                      k < c["pacf"].size() ? cell(c["pacf"][k], 6) : "", cell(-band, 6), cell(band, 6)});
  }
  return to_csv(t);
}

std::string fig_predictions(const nlohmann::json& g) {
  Table t{{"trial", "trust", "arimax_one_step"}, {}, {}};
  const auto& y = g.at("series").at("values");
  const auto& p = g.at("predictions");
  const std::size_t offset = p.at("offset");
  for (std::size_t k = 0; k < y.size(); ++k) {
    const bool have = k >= offset && k - offset < p["values"].size();
    t.rows.push_back({std::to_string(k + 1), cell(y[k], 6), have ? cell(p["values"][k - offset], 6) : ""});
  }
  return to_csv(t);
}

void check_report(const nlohmann::json& report) {
  if (!report.is_object() || !report.contains("groups") || !report["groups"].is_array() ||
      report["groups"].empty()) {
    throw RenderError("report has no groups");
  }
  if (!report.contains("arimax_rmse")) throw RenderError("report has no RMSE matrix");
  for (const auto& g : report["groups"]) {
    if (!g.contains("n") || g["n"].get<int>() == 0) throw RenderError("report contains an empty series");
    for (const char* key : {"ols", "aic", "arimax", "series", "correlogram", "predictions"}) {
      if (!g.contains(key)) throw RenderError(fmt::format("group entry lacks '{}'", key));
    }
  }
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + fmt::format(".tmp{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<fs::path> render_tables(const nlohmann::json& report, const fs::path& out_dir) {
  std::vector<std::pair<std::string, std::string>> files;
  try {
    check_report(report);
    for (const auto& g : report.at("groups")) {
      const std::string name = g.at("group");
      const Table ols = ols_table(g);
      const Table aic = aic_table(g);
      const Table arimax = arimax_table(g);
      files.emplace_back("ols_" + name + ".csv", to_csv(ols));
      files.emplace_back("ols_" + name + ".txt", to_text("OLS on capability, group " + name, ols));
      files.emplace_back("aic_" + name + ".csv", to_csv(aic));
      files.emplace_back("aic_" + name + ".txt",
                         to_text(fmt::format("AIC of ARIMA(p,{},q) errors, group {}",
                                             g["aic"]["d"].get<int>(), name), aic));
      files.emplace_back("arimax_" + name + ".csv", to_csv(arimax));
      files.emplace_back("arimax_" + name + ".txt", to_text("ARIMAX coefficients, group " + name, arimax));
      files.emplace_back("fig_residuals_" + name + ".csv", fig_residuals(g));
      files.emplace_back("fig_correlogram_" + name + ".csv", fig_correlogram(g));
      files.emplace_back("fig_predictions_" + name + ".csv", fig_predictions(g));
    }
    const Table rmse = rmse_table(report);
    files.emplace_back("rmse.csv", to_csv(rmse));
    files.emplace_back("rmse.txt", to_text("One-step prediction RMSE", rmse));
    files.emplace_back("fig_trust.csv", fig_trust(report));
  } catch (const std::exception& e) {
    const std::string msg = fmt::format("cannot render report: {}\n", e.what());
    write_file_atomic(out_dir / kRenderErrorFile, msg);
    throw RenderError(msg);
  }
  std::vector<fs::path> written;
  for (const auto& [name, content] : files) {
    write_file_atomic(out_dir / name, content);
    written.push_back(out_dir / name);
  }
  std::error_code ec;
  fs::remove(out_dir / kRenderErrorFile, ec);
  return written;
}

}  // namespace trustlab::pipeline
