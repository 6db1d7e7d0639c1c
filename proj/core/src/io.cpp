#include "pmor/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pmor/error.hpp"

namespace pmor::io {

using nlohmann::json;

namespace {

json matrix_to_json(const CMatrix& M, bool real) {
  json triplets = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const Complex v = M(i, j);
      if (v == Complex(0.0, 0.0)) continue;
      if (real) {
        triplets.push_back({i, j, v.real()});
      } else {
        triplets.push_back({i, j, v.real(), v.imag()});
      }
    }
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"triplets", std::move(triplets)}};
}

CMatrix matrix_from_json(const json& j, const std::string& where) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  if (rows < 0 || cols < 0) fail(ErrorCode::Schema, where + ": negative matrix dimension");
  CMatrix M = CMatrix::Zero(rows, cols);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols, false);
  for (const auto& t : j.at("triplets")) {
    if (!t.is_array() || (t.size() != 3 && t.size() != 4)) {
      fail(ErrorCode::Schema, where + ": triplet must be [i, j, re] or [i, j, re, im]");
    }
    if (!t[0].is_number_integer() || !t[1].is_number_integer()) {
      fail(ErrorCode::Schema, where + ": triplet indices must be integers");
    }
    const auto i = t[0].get<Eigen::Index>();
    const auto k = t[1].get<Eigen::Index>();
    if (i < 0 || i >= rows || k < 0 || k >= cols) {
      fail(ErrorCode::Schema, where + ": triplet index out of range");
    }
    if (seen(i, k)) fail(ErrorCode::Schema, where + ": duplicate triplet entry");
    seen(i, k) = true;
    const double re = t[2].get<double>();
    const double im = t.size() == 4 ? t[3].get<double>() : 0.0;
    M(i, k) = {re, im};
  }
  return M;
}

json family_to_json(const AffineMatrixFamily& fam) {
  const bool real = fam.is_real();
  json coeffs = json::array();
  for (const auto& c : fam.coeffs()) coeffs.push_back(matrix_to_json(c, real));
  return {{"constant", matrix_to_json(fam.constant(), real)}, {"coeffs", std::move(coeffs)}};
}

AffineMatrixFamily family_from_json(const json& j, const std::string& name) {
  CMatrix constant = matrix_from_json(j.at("constant"), name + ".constant");
  std::vector<CMatrix> coeffs;
  const auto& list = j.at("coeffs");
  for (std::size_t i = 0; i < list.size(); ++i) {
    coeffs.push_back(matrix_from_json(list[i], name + ".coeffs[" + std::to_string(i) + "]"));
  }
  return AffineMatrixFamily(std::move(constant), std::move(coeffs));
}

json complex_to_json(Complex s) { return json::array({s.real(), s.imag()}); }

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorCode::Schema, "complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string sided_name(Sided s) { return s == Sided::One ? "one" : "two"; }

Sided sided_from(const std::string& text) {
  if (text == "one") return Sided::One;
  if (text == "two") return Sided::Two;
  fail(ErrorCode::Schema, "sided must be \"one\" or \"two\"");
}

template <typename F>
auto with_schema_errors(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorCode::Schema, e.what());
  }
}

class CsvWriter {
 public:
  CsvWriter& field(double v) { return raw(format_double(v)); }
  CsvWriter& field(long long v) { return raw(std::to_string(v)); }
  CsvWriter& field(std::string_view v) { return raw(v); }
  CsvWriter& end_row() {
    out_ << '\n';
    first_ = true;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  CsvWriter& raw(std::string_view v) {
    if (!first_) out_ << ',';
    out_ << v;
    first_ = false;
    return *this;
  }
  std::ostringstream out_;
  bool first_ = true;
};

void point_header(CsvWriter& csv, std::size_t l) {
  csv.field("s_re").field("s_im");
  for (std::size_t i = 1; i <= l; ++i) csv.field("p_" + std::to_string(i));
}

void point_fields(CsvWriter& csv, Complex s, const ParameterPoint& p) {
  csv.field(s.real()).field(s.imag());
  for (double v : p.values) csv.field(v);
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) fail(ErrorCode::Io, "failed to format number");
  return {buf.data(), ptr};
}

std::string model_to_json(const ParametricSystem& sys, const Provenance* provenance) {
  json j = {{"n", sys.n()}, {"m", sys.m()}, {"q", sys.q()}, {"l", sys.arity()},
            {"E", family_to_json(sys.E())}, {"A", family_to_json(sys.A())},
            {"B", family_to_json(sys.B())}, {"C", family_to_json(sys.C())}};
  if (provenance) {
    json points = json::array();
    for (const auto& pt : provenance->points) {
      points.push_back({{"s", complex_to_json(pt.s)},
                        {"p", pt.p.values},
                        {"input_depth", pt.input_depth},
                        {"output_depth", pt.output_depth}});
    }
    j["provenance"] = {{"method", provenance->method},
                       {"sided", sided_name(provenance->sided)},
                       {"r", provenance->r},
                       {"points", std::move(points)}};
  }
  return j.dump(1) + "\n";
}

ModelFile model_from_json(std::string_view text) {
  return with_schema_errors([&] {
    const json j = json::parse(text);
    ModelFile file{ParametricSystem(family_from_json(j.at("E"), "E"),
                                    family_from_json(j.at("A"), "A"),
                                    family_from_json(j.at("B"), "B"),
                                    family_from_json(j.at("C"), "C")),
                   std::nullopt};
    const auto& sys = file.system;
    if (j.at("n").get<Eigen::Index>() != sys.n() || j.at("m").get<Eigen::Index>() != sys.m() ||
        j.at("q").get<Eigen::Index>() != sys.q() || j.at("l").get<std::size_t>() != sys.arity()) {
      fail(ErrorCode::Schema, "declared n, m, q, l disagree with the matrices");
    }
    if (j.contains("provenance")) {
      const auto& pj = j.at("provenance");
      Provenance prov;
      prov.method = pj.at("method").get<std::string>();
      prov.sided = sided_from(pj.at("sided").get<std::string>());
      prov.r = pj.at("r").get<Eigen::Index>();
      for (const auto& pt : pj.at("points")) {
        prov.points.push_back({complex_from_json(pt.at("s")),
                               ParameterPoint(pt.at("p").get<std::vector<double>>()),
                               pt.at("input_depth").get<int>(), pt.at("output_depth").get<int>()});
      }
      file.provenance = std::move(prov);
    }
    return file;
  });
}

std::string grid_to_json(const ExpansionGrid& grid) {
  json S = json::array();
  for (const auto& s : grid.S) S.push_back(complex_to_json(s));
  json P = json::array();
  for (const auto& p : grid.P) P.push_back(p.values);
  return json{{"S", S}, {"P", P}, {"conjugate_closure", grid.conjugate_closure}}.dump(1) + "\n";
}

ExpansionGrid grid_from_json(std::string_view text) {
  return with_schema_errors([&] {
    const json j = json::parse(text);
    ExpansionGrid grid;
    for (const auto& s : j.at("S")) grid.S.push_back(complex_from_json(s));
    for (const auto& p : j.at("P")) grid.P.emplace_back(p.get<std::vector<double>>());
    grid.conjugate_closure = j.value("conjugate_closure", true);
    return grid;
  });
}

std::string plan_to_json(const ReductionPlan& plan) {
  json j = {{"moments_per_point", plan.moments_per_point},
            {"sided", sided_name(plan.sided)},
            {"deflation_tol", plan.deflation_tol}};
  if (plan.target_order_cap) j["target_order_cap"] = *plan.target_order_cap;
  return j.dump(1) + "\n";
}

ReductionPlan plan_from_json(std::string_view text) {
  return with_schema_errors([&] {
    const json j = json::parse(text);
    ReductionPlan plan;
    plan.moments_per_point = j.value("moments_per_point", plan.moments_per_point);
    plan.sided = sided_from(j.value("sided", std::string("two")));
    plan.deflation_tol = j.value("deflation_tol", plan.deflation_tol);
    if (j.contains("target_order_cap") && !j.at("target_order_cap").is_null()) {
      plan.target_order_cap = j.at("target_order_cap").get<Eigen::Index>();
    }
    plan.validate();
    return plan;
  });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::Io, "cannot move " + tmp.string() + " to " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

void save_model(const std::filesystem::path& path, const ParametricSystem& sys,
                const Provenance* provenance) {
  write_file_atomic(path, model_to_json(sys, provenance));
}

ExpansionGrid load_grid(const std::filesystem::path& path) { return grid_from_json(read_file(path)); }

ReductionPlan load_plan(const std::filesystem::path& path) { return plan_from_json(read_file(path)); }

std::string moment_table_csv(const MomentTable& table) {
  CsvWriter csv;
  const std::size_t l = table.entries.empty() ? 0 : table.entries.begin()->first.p.size();
  point_header(csv, l);
  csv.field("order").field("out").field("in").field("re").field("im").end_row();
  for (const auto& [key, M] : table.entries) {
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      for (Eigen::Index c = 0; c < M.cols(); ++c) {
        point_fields(csv, {key.s_re, key.s_im}, ParameterPoint(key.p));
        csv.field(static_cast<long long>(key.order))
            .field(static_cast<long long>(r))
            .field(static_cast<long long>(c))
            .field(M(r, c).real())
            .field(M(r, c).imag())
            .end_row();
      }
    }
  }
  return csv.str();
}

std::string match_report_csv(const MatchReport& report) {
  CsvWriter csv;
  point_header(csv, report.rows.empty() ? 0 : report.rows.front().p.size());
  csv.field("order").field("abs_err").field("rel_err").field("matched").end_row();
  for (const auto& row : report.rows) {
    point_fields(csv, row.s, row.p);
    csv.field(static_cast<long long>(row.order))
        .field(row.abs_err)
        .field(row.rel_err)
        .field(row.matched ? "true" : "false")
        .end_row();
  }
  return csv.str();
}

std::string bound_report_csv(const ErrorBoundReport& report) {
  CsvWriter csv;
  point_header(csv, report.rows.empty() ? 0 : report.rows.front().p.size());
  csv.field("delta_norm").field("bound").field("observed").field("violated").end_row();
  for (const auto& row : report.rows) {
    point_fields(csv, row.s, row.p);
    csv.field(row.delta_norm)
        .field(row.bound)
        .field(row.observed)
        .field(row.violated ? "true" : "false")
        .end_row();
  }
  return csv.str();
}

std::string bound_summary_json(const ErrorBoundReport& report) {
  json j = {{"N", report.N},
            {"M_hat", report.M_hat},
            {"violations", report.violations},
            {"max_ratio", report.max_ratio},
            {"safety_factor", report.safety_factor},
            {"samples", report.rows.size()},
            {"sup_lattice_points", report.sup.samples},
            {"argmax", {{"s", complex_to_json(report.sup.argmax_s)},
                        {"p", report.sup.argmax_p.values}}}};
  return j.dump(1) + "\n";
}

std::string bode_csv(const FrequencyResponse& response) {
  CsvWriter csv;
  csv.field("freq_hz").field("out").field("in").field("mag_db").field("phase_deg").end_row();
  for (std::size_t i = 0; i < response.frequencies.size(); ++i) {
    if (!response.ok(i)) continue;
    const auto& G = response.values[i];
    for (Eigen::Index r = 0; r < G.rows(); ++r) {
      for (Eigen::Index c = 0; c < G.cols(); ++c) {
        csv.field(response.frequencies[i])
            .field(static_cast<long long>(r))
            .field(static_cast<long long>(c))
            .field(response.magnitude_db(i, r, c))
            .field(response.phase_deg(i, r, c))
            .end_row();
      }
    }
  }
  return csv.str();
}

std::string time_series_csv(const TimeSeries& series) {
  CsvWriter csv;
  csv.field("t");
  const Eigen::Index q = series.outputs.empty() ? 0 : series.outputs.front().size();
  for (Eigen::Index k = 1; k <= q; ++k) csv.field("y_" + std::to_string(k));
  csv.end_row();
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    csv.field(series.times[i]);
    for (Eigen::Index k = 0; k < q; ++k) csv.field(series.outputs[i](k));
    csv.end_row();
  }
  return csv.str();
}

std::string comparison_csv(std::span<const ComparisonRow> rows, std::string_view model_label) {
  CsvWriter csv;
  csv.field("model");
  const std::size_t l = rows.empty() ? 0 : rows.front().p.size();
  for (std::size_t i = 1; i <= l; ++i) csv.field("p_" + std::to_string(i));
  csv.field("bode_max_rel").field("bode_rms_rel").field("time_max_abs").field("time_rms_abs");
  csv.end_row();
  for (const auto& row : rows) {
    csv.field(model_label);
    for (double v : row.p.values) csv.field(v);
    csv.field(row.bode_max_rel).field(row.bode_rms_rel).field(row.time_max_abs).field(row.time_rms_abs);
    csv.end_row();
  }
  return csv.str();
}

std::string reduction_report_json(const ReductionReport& report) {
  json points = json::array();
  for (const auto& pt : report.points) {
    points.push_back({{"s", complex_to_json(pt.s)},
                      {"p", pt.p.values},
                      {"input_depth", pt.input_depth},
                      {"output_depth", pt.output_depth}});
  }
  json j = {{"r", report.r},
            {"sided", sided_name(report.sided)},
            {"input_rank", report.input_rank},
            {"output_rank", report.output_rank},
            {"input_dropped", report.input_dropped},
            {"output_dropped", report.output_dropped},
            {"padded_columns", report.padded_columns},
            {"points", std::move(points)},
            {"singular_reduced_points", report.singular_reduced_points}};
  return j.dump(1) + "\n";
}

std::string validation_report_json(const ValidationReport& report) {
  json samples = json::array();
  for (const auto& s : report.samples) {
    samples.push_back({{"p", s.p.values},
                       {"stable", s.stable},
                       {"max_real_part", s.finite_count ? json(s.max_real_part) : json(nullptr)},
                       {"finite_eigenvalues", s.finite_count},
                       {"infinite_eigenvalues", s.infinite_count},
                       {"singular_E_warning", s.e_singular}});
  }
  return json{{"all_stable", report.all_stable()}, {"samples", std::move(samples)}}.dump(1) + "\n";
}

}  // namespace pmor::io
