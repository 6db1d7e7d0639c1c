#include "pmor/moments.hpp"

#include <algorithm>

#include <Eigen/LU>

#include "pmor/error.hpp"
#include "pmor/parallel.hpp"

namespace pmor {

// Deliberately separate from LUFactorization/factor_pencil: moment checks
// compare two independent solver paths.
std::vector<CMatrix> moments(const ParametricSystem& sys, Complex s, const ParameterPoint& p,
                             int count) {
  if (count < 0) fail(ErrorCode::InvalidArgument, "moment count must be nonnegative");
  const auto E = sys.E().evaluate(p);
  const auto A = sys.A().evaluate(p);
  const auto B = sys.B().evaluate(p);
  const auto C = sys.C().evaluate(p);

  const CMatrix K = s * E - A;
  Eigen::FullPivLU<CMatrix> lu(K);
  lu.setThreshold(1e-14);
  if (lu.rank() < K.rows()) {
    fail(ErrorCode::PoleAtExpansionPoint, "sE(p)-A(p) is singular at " + describe(s, p));
  }

  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(count));
  CMatrix x = lu.solve(B);
  for (int i = 0; i < count; ++i) {
    out.push_back(C * x);
    if (i + 1 < count) x = -lu.solve(E * x);
  }
  return out;
}

CMatrix moment(const ParametricSystem& sys, Complex s, const ParameterPoint& p, int order) {
  if (order < 0) fail(ErrorCode::InvalidArgument, "moment order must be nonnegative");
  return moments(sys, s, p, order + 1).back();
}

const CMatrix& MomentTable::at(Complex s, const ParameterPoint& p, int order) const {
  auto it = entries.find({s.real(), s.imag(), p.values, order});
  if (it == entries.end()) {
    fail(ErrorCode::InvalidArgument, "no moment of order " + std::to_string(order) + " at " +
                                         describe(s, p));
  }
  return it->second;
}

MomentTable moment_table(const ParametricSystem& sys, const ExpansionGrid& grid, int max_order,
                         MomentSource source) {
  grid.validate(sys.arity());
  const auto points = grid.matching_points();
  std::vector<std::vector<CMatrix>> per_point(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    per_point[i] = moments(sys, points[i].s, points[i].p, max_order + 1);
  });
  MomentTable table;
  table.source = source;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int k = 0; k <= max_order; ++k) {
      table.entries[{points[i].s.real(), points[i].s.imag(), points[i].p.values, k}] =
          per_point[i][static_cast<std::size_t>(k)];
    }
  }
  return table;
}

std::size_t MatchReport::failures() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const MatchRow& r) { return !r.matched; }));
}

MatchReport verify_matching(const ParametricSystem& full, const ParametricSystem& reduced,
                            const ExpansionGrid& grid, int count, double tol) {
  if (count < 1) fail(ErrorCode::InvalidArgument, "moment count must be at least 1");
  if (full.q() != reduced.q() || full.m() != reduced.m()) {
    fail(ErrorCode::Structural, "full and reduced systems differ in input/output dimensions");
  }
  if (full.arity() != reduced.arity()) {
    fail(ErrorCode::Structural, "full and reduced systems differ in parameter count");
  }
  const auto full_table = moment_table(full, grid, count - 1, MomentSource::Full);
  const auto reduced_table = moment_table(reduced, grid, count - 1, MomentSource::Reduced);

  MatchReport report;
  report.tol = tol;
  for (const auto& pt : grid.matching_points()) {
    for (int i = 0; i < count; ++i) {
      const auto& mf = full_table.at(pt.s, pt.p, i);
      const auto& mr = reduced_table.at(pt.s, pt.p, i);
      MatchRow row{pt.s, pt.p, i};
      row.abs_err = (mr - mf).norm();
      row.rel_err = row.abs_err / std::max(mf.norm(), kRelErrFloor);
      row.matched = row.rel_err <= tol;
      report.max_rel_err = std::max(report.max_rel_err, row.rel_err);
      report.rows.push_back(std::move(row));
    }
  }
  report.passed = report.failures() == 0;
  return report;
}

}  // namespace pmor
