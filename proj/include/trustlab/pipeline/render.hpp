#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace trustlab::pipeline {

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

class RenderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Name of the file written in place of the tables when rendering fails.
inline constexpr std::string_view kRenderErrorFile = "render_error.txt";

/// Renders a report (as produced by report_to_json) into `out_dir`:
///   ols_<G>.csv/.txt, aic_<G>.csv/.txt, arimax_<G>.csv/.txt, rmse.csv/.txt
/// plus figure data fig_trust.csv, fig_residuals_<G>.csv,
/// fig_correlogram_<G>.csv and fig_predictions_<G>.csv.
/// An empty or incomplete report writes kRenderErrorFile and throws RenderError.
std::vector<std::filesystem::path> render_tables(const nlohmann::json& report,
                                                 const std::filesystem::path& out_dir);

}  // namespace trustlab::pipeline
