#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/LU>

#include "pmor/types.hpp"

namespace pmor {

inline constexpr double kDefaultPivotTol = 1e-14;
inline constexpr double kDefaultDeflationTol = 1e-10;
inline constexpr std::size_t kDefaultDenseEigenLimit = 500;

/// Dense LU with partial pivoting of a square complex matrix.
///
/// Construction fails with ErrorCode::SingularMatrix when a pivot of U falls
/// below `pivot_tol` times the largest entry of K. The object is immutable once
/// built and may be shared read-only between threads.
class LUFactorization {
 public:
  explicit LUFactorization(const CMatrix& K, double pivot_tol = kDefaultPivotTol);

  Eigen::Index size() const noexcept { return lu_.rows(); }

  /// Solves K X = rhs.
  CMatrix solve(const CMatrix& rhs) const;
  /// Solves K^T X = rhs (plain transpose, no conjugation).
  CMatrix solve_transposed(const CMatrix& rhs) const;

  /// Packed L\U factors and the row permutation, as produced by the factorization.
  const CMatrix& factors() const noexcept { return lu_.matrixLU(); }
  std::vector<Eigen::Index> pivots() const;

 private:
  Eigen::PartialPivLU<CMatrix> lu_;
};

CMatrix lu_solve(const CMatrix& K, const CMatrix& rhs);

struct OrthonormalBasis {
  RMatrix Q;                 // n x rank, orthonormal columns
  Eigen::Index rank = 0;
  Eigen::Index dropped = 0;  // deflated input columns
  double tol = kDefaultDeflationTol;
  double threshold = 0.0;    // absolute deflation threshold, tol * ||cols||_F
};

/// Modified Gram-Schmidt with one reorthogonalization pass. A column is
/// deflated when its residual against the accepted columns drops below
/// tol * ||cols||_F. Column order of the input is preserved in Q.
OrthonormalBasis orthonormalize(const RMatrix& cols, double tol = kDefaultDeflationTol);

/// Appends `cols` to an existing basis with the same rule, keeping the
/// basis' absolute threshold. Returns the number of accepted columns.
Eigen::Index extend_basis(OrthonormalBasis& basis, const RMatrix& cols);

struct GeneralizedSpectrum {
  std::vector<Complex> finite;
  std::size_t infinite = 0;
};

/// Eigenvalues of the pencil (A, E), i.e. lambda with det(lambda E - A) = 0.
/// Uses E^{-1}A when E is safely invertible, otherwise shift-and-invert on
/// (sigma E - A)^{-1} E. Infinite eigenvalues are only counted.
GeneralizedSpectrum generalized_eigs(const CMatrix& A, const CMatrix& E,
                                     std::size_t max_dim = kDefaultDenseEigenLimit);

/// True when every entry has an exactly zero imaginary part.
bool is_real(const CMatrix& M) noexcept;

}  // namespace pmor
