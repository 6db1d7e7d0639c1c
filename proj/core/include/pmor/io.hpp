#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "pmor/analysis.hpp"
#include "pmor/error_bound.hpp"
#include "pmor/krylov.hpp"
#include "pmor/moments.hpp"
#include "pmor/param_model.hpp"

namespace pmor::io {

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

/// Extra block written with reduced models; the rest of the file is an
/// ordinary model, so every command accepts full and reduced files alike.
struct Provenance {
  std::string method;  // "separated" or "combined-baseline"
  Sided sided = Sided::Two;
  Eigen::Index r = 0;
  std::vector<PointProvenance> points;
};

struct ModelFile {
  ParametricSystem system;
  std::optional<Provenance> provenance;
};

std::string model_to_json(const ParametricSystem& sys, const Provenance* provenance = nullptr);
ModelFile model_from_json(std::string_view text);

std::string grid_to_json(const ExpansionGrid& grid);
ExpansionGrid grid_from_json(std::string_view text);

std::string plan_to_json(const ReductionPlan& plan);
ReductionPlan plan_from_json(std::string_view text);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

ModelFile load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const ParametricSystem& sys,
                const Provenance* provenance = nullptr);
ExpansionGrid load_grid(const std::filesystem::path& path);
ReductionPlan load_plan(const std::filesystem::path& path);

std::string moment_table_csv(const MomentTable& table);
/// s_re, s_im, p_1..p_l, order, abs_err, rel_err, matched
std::string match_report_csv(const MatchReport& report);
/// s_re, s_im, p_1..p_l, delta_norm, bound, observed, violated
std::string bound_report_csv(const ErrorBoundReport& report);
/// N, M_hat, violations, max_ratio (plus the maximizing lattice point).
std::string bound_summary_json(const ErrorBoundReport& report);
/// freq_hz, out, in, mag_db, phase_deg
std::string bode_csv(const FrequencyResponse& response);
/// t, y_1..y_q
std::string time_series_csv(const TimeSeries& series);
std::string comparison_csv(std::span<const ComparisonRow> rows, std::string_view model_label);
std::string reduction_report_json(const ReductionReport& report);
std::string validation_report_json(const ValidationReport& report);

}  // namespace pmor::io
