#pragma once

#include <compare>
#include <map>
#include <vector>

#include "pmor/krylov.hpp"
#include "pmor/param_model.hpp"

namespace pmor {

enum class MomentSource { Full, Reduced };

struct MomentKey {
  double s_re = 0.0;
  double s_im = 0.0;
  std::vector<double> p;
  int order = 0;

  auto operator<=>(const MomentKey&) const = default;
};

struct MomentTable {
  std::map<MomentKey, CMatrix> entries;
  MomentSource source = MomentSource::Full;

  const CMatrix& at(Complex s, const ParameterPoint& p, int order) const;
  std::size_t size() const noexcept { return entries.size(); }
};

/// i-th moment m_i(s, p) = C(p) [-(sE(p)-A(p))^{-1} E(p)]^i (sE(p)-A(p))^{-1} B(p),
/// i.e. the i-th Taylor coefficient of G(., p) about s.
CMatrix moment(const ParametricSystem& sys, Complex s, const ParameterPoint& p, int order);

/// m_0 .. m_{count-1} at one point, sharing a single factorization.
std::vector<CMatrix> moments(const ParametricSystem& sys, Complex s, const ParameterPoint& p,
                             int count);

/// Moments of orders 0..max_order at every matching point of the grid.
MomentTable moment_table(const ParametricSystem& sys, const ExpansionGrid& grid, int max_order,
                         MomentSource source = MomentSource::Full);

struct MatchRow {
  Complex s;
  ParameterPoint p;
  int order = 0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  bool matched = false;
};

struct MatchReport {
  std::vector<MatchRow> rows;
  double tol = 0.0;
  double max_rel_err = 0.0;
  bool passed = false;

  std::size_t failures() const noexcept;
};

inline constexpr double kRelErrFloor = 1e-30;

/// Compares moments i < count of `full` and `reduced` at every matching
/// point; rel_err uses max(||m_i||_F, 1e-30) as denominator.
MatchReport verify_matching(const ParametricSystem& full, const ParametricSystem& reduced,
                            const ExpansionGrid& grid, int count, double tol);

inline MatchReport verify_matching(const ParametricSystem& full, const ReducedSystem& reduced,
                                   const ExpansionGrid& grid, int count, double tol) {
  return verify_matching(full, reduced.system, grid, count, tol);
}

}  // namespace pmor
