#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmor/numerics.hpp"
#include "pmor/param_model.hpp"

namespace pmor {

/// Expansion points: frequencies S times parameter points P. With
/// conjugate_closure set, every non-real s in S also stands for conj(s).
struct ExpansionGrid {
  struct Point {
    Complex s;
    ParameterPoint p;
    std::size_t s_index = 0;
    std::size_t p_index = 0;
  };

  std::vector<Complex> S;
  std::vector<ParameterPoint> P;
  bool conjugate_closure = true;

  /// Checks nonemptiness, duplicates and parameter arity.
  void validate(std::size_t arity) const;

  /// S x P in grid order (frequency-major), as listed.
  std::vector<Point> points() const;
  /// S with implied conjugates inserted right after their partner.
  std::vector<Complex> closed_frequencies() const;
  /// closed_frequencies() x P, the points at which moments are compared.
  std::vector<Point> matching_points() const;
};

enum class Sided { One, Two };

struct ReductionPlan {
  int moments_per_point = 2;
  Sided sided = Sided::Two;
  double deflation_tol = kDefaultDeflationTol;
  std::optional<Eigen::Index> target_order_cap;

  void validate() const;
};

struct PointProvenance {
  Complex s;
  ParameterPoint p;
  int input_depth = 0;
  int output_depth = 0;  // equals input_depth in one-sided mode
};

/// Real orthonormal V, W with equal column count r.
struct ProjectionPair {
  RMatrix V;
  RMatrix W;
  Eigen::Index r = 0;
  std::vector<PointProvenance> provenance;
};

struct ReducedSystem {
  ParametricSystem system;
  ProjectionPair basis;
};

struct ReductionReport {
  Sided sided = Sided::Two;
  Eigen::Index r = 0;
  Eigen::Index input_rank = 0;   // before equalization
  Eigen::Index output_rank = 0;  // before equalization
  Eigen::Index input_dropped = 0;
  Eigen::Index output_dropped = 0;
  Eigen::Index padded_columns = 0;
  std::vector<PointProvenance> points;
  /// Grid points where the reduced pencil sE_r - A_r is singular.
  std::vector<std::string> singular_reduced_points;
};

struct Reduction {
  ReducedSystem reduced;
  ReductionReport report;
};

/// [f, Mf, ..., M^{depth-1} f] with f = K^{-1} B(p), M = K^{-1} E(p), K = sE(p) - A(p).
CMatrix krylov_input_block(const ParametricSystem& sys, Complex s, const ParameterPoint& p,
                           int depth);
/// [l, M2 l, ...] with l = K^{-T} C(p)^T, M2 = K^{-T} E(p)^T.
CMatrix krylov_output_block(const ParametricSystem& sys, Complex s, const ParameterPoint& p,
                            int depth);

/// Splits complex columns into real and imaginary parts (an exactly zero
/// imaginary part is skipped), keeping block order.
RMatrix realify(std::span<const CMatrix> blocks);

/// Real orthonormal basis whose span contains the real span of all blocks.
OrthonormalBasis aggregate_realify(std::span<const CMatrix> blocks,
                                   double tol = kDefaultDeflationTol);

/// Petrov-Galerkin projection, coefficient by coefficient:
/// E_{r,i} = W^T E_i V, A_{r,i} = W^T A_i V, B_{r,i} = W^T B_i, C_{r,i} = C_i V.
/// With `nominal` set, W^T A(nominal) V must be nonsingular.
ReducedSystem project(const ParametricSystem& sys, const RMatrix& V, const RMatrix& W,
                      const std::optional<ParameterPoint>& nominal = std::nullopt);

/// Multi-frequency, multi-parameter moment matching reduction.
Reduction reduce(const ParametricSystem& sys, const ExpansionGrid& grid,
                 const ReductionPlan& plan);

/// Comparator using the combined variables s and s*p_i at the first parameter
/// point only. One-sided. When `target_order` is positive the basis is deepened
/// until it reaches that order (if possible) and truncated to it.
Reduction reduce_combined_baseline(const ParametricSystem& sys, const ExpansionGrid& grid,
                                   const ReductionPlan& plan, Eigen::Index target_order = 0);

/// Multi-indices of total degree `degree` over `variables` slots in graded
/// lexicographic order, e.g. (2,0),(1,1),(0,2).
std::vector<std::vector<int>> multi_indices(std::size_t variables, int degree);

}  // namespace pmor
