#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pmor/param_model.hpp"

namespace pmor {

inline constexpr int kDefaultMaxTaylorOrder = 6;

/// Multi-index over the variables (s, p_1, ..., p_l); s comes first.
using MultiIndex = std::vector<int>;

/// All Taylor coefficients of G of one total order about (s0, p0).
///
/// `coeffs[k]` stores the Taylor coefficient d^k G / k! (k! = prod k_j!), once
/// per sorted multi-index. The symmetric derivative tensor entry for any
/// ordering of the same multi-index is k! * coeffs[k].
struct DerivativeTensor {
  int order = 0;
  std::size_t variables = 0;  // l + 1
  std::map<MultiIndex, CMatrix> coeffs;
  Complex s0;
  ParameterPoint p0;

  /// ||D^order G||_F / order!, the Frobenius norm of the full symmetric
  /// tensor (each coefficient counted with its multinomial multiplicity).
  double scaled_frobenius_norm() const;
};

/// Taylor coefficient tensors of orders 0..up_to of G(s, p) about (s0, p0),
/// exact up to solver accuracy.
std::vector<DerivativeTensor> derivative_tensors(const ParametricSystem& sys, Complex s0,
                                                 const ParameterPoint& p0, int up_to,
                                                 int max_order = kDefaultMaxTaylorOrder);

/// Degree-N Taylor polynomial H_N(s, p) built from `tensors` (orders 0..N).
CMatrix taylor_truncate_eval(std::span<const DerivativeTensor> tensors, Complex s,
                             const ParameterPoint& p);

/// Box around (s0, p0). The frequency ranges over a rectangle in C with
/// half-widths radius_s_re, radius_s_im; each parameter over p0_i +- radius_p[i].
/// An axis with zero radius contributes its center only.
struct SampleBox {
  Complex center_s;
  ParameterPoint center_p;
  double radius_s_re = 0.0;
  double radius_s_im = 0.0;
  std::vector<double> radius_p;
  int samples_per_axis = 21;

  void validate(std::size_t arity) const;
  bool contains(Complex s, const ParameterPoint& p) const;

  struct Sample {
    Complex s;
    ParameterPoint p;
  };
  /// Uniform lattice including the box corners.
  std::vector<Sample> lattice() const;
};

struct RemainderSup {
  double M_hat = 0.0;
  Complex argmax_s;
  ParameterPoint argmax_p;
  std::size_t samples = 0;
};

/// Lattice estimate of sup ||D^{N+1} G(xi)||_F / (N+1)! over the box.
RemainderSup remainder_sup(const ParametricSystem& sys, const SampleBox& box, int N,
                           int max_order = kDefaultMaxTaylorOrder);

struct BoundOptions {
  int validation_samples = 100;
  std::uint64_t seed = 0;
  double safety_factor = 1.05;
};

struct BoundRow {
  Complex s;
  ParameterPoint p;
  double delta_norm = 0.0;
  double bound = 0.0;     // M_hat * ||delta||^{N+1}
  double observed = 0.0;  // ||G - H_N||_F
  bool violated = false;
};

struct ErrorBoundReport {
  int N = 0;
  double M_hat = 0.0;
  double safety_factor = 1.0;
  RemainderSup sup;
  std::vector<BoundRow> rows;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // max observed / bound over rows with bound > 0
};

/// Prior bound ||G - H_N|| <= M_hat ||[s - s0; p - p0]||^{N+1}, checked at
/// jittered samples drawn from the box. A row is violated when the observed
/// error exceeds safety_factor * bound plus a rounding floor.
ErrorBoundReport prior_bound(const ParametricSystem& sys, const SampleBox& box, int N,
                             const BoundOptions& options = {});

/// Euclidean norm of the stacked offset [s - s0; p - p0] (|s - s0| for s).
double offset_norm(Complex s, const ParameterPoint& p, Complex s0, const ParameterPoint& p0);

}  // namespace pmor
