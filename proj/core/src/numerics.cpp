#include "pmor/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pmor/error.hpp"

namespace pmor {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParameterArity: return "parameter-arity";
    case ErrorCode::Structural: return "structural";
    case ErrorCode::PoleAtExpansionPoint: return "pole-at-expansion-point";
    case ErrorCode::SingularMatrix: return "singular-matrix";
    case ErrorCode::SingularPencil: return "singular-pencil";
    case ErrorCode::EmptyBasis: return "empty-basis";
    case ErrorCode::DegenerateProjection: return "degenerate-projection";
    case ErrorCode::CapExceeded: return "cap-exceeded";
    case ErrorCode::OrderLimit: return "order-limit";
    case ErrorCode::StepSize: return "step-size";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Spec: return "spec";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

LUFactorization::LUFactorization(const CMatrix& K, double pivot_tol) {
  if (K.rows() != K.cols()) {
    fail(ErrorCode::Structural, "LU factorization needs a square matrix");
  }
  if (K.rows() == 0) {
    fail(ErrorCode::Structural, "LU factorization of an empty matrix");
  }
  const double scale = K.cwiseAbs().maxCoeff();
  if (scale == 0.0 || !std::isfinite(scale)) {
    fail(ErrorCode::SingularMatrix, "matrix is zero or not finite");
  }
  lu_.compute(K);
  const auto& packed = lu_.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    if (std::abs(packed(i, i)) <= pivot_tol * scale) {
      std::ostringstream msg;
      msg << "pivot " << i << " of " << packed.rows() << " below relative threshold "
          << pivot_tol;
      fail(ErrorCode::SingularMatrix, msg.str());
    }
  }
}

CMatrix LUFactorization::solve(const CMatrix& rhs) const {
  if (rhs.rows() != size()) {
    fail(ErrorCode::Structural, "right-hand side row count does not match the factorization");
  }
  return lu_.solve(rhs);
}

CMatrix LUFactorization::solve_transposed(const CMatrix& rhs) const {
  if (rhs.rows() != size()) {
    fail(ErrorCode::Structural, "right-hand side row count does not match the factorization");
  }
  return lu_.transpose().solve(rhs);
}

std::vector<Eigen::Index> LUFactorization::pivots() const {
  const auto& indices = lu_.permutationP().indices();
  return {indices.data(), indices.data() + indices.size()};
}

CMatrix lu_solve(const CMatrix& K, const CMatrix& rhs) {
  return LUFactorization(K).solve(rhs);
}

namespace {

// Two MGS passes against Q(:, 0..rank), then accept or deflate.
bool mgs_accept(RMatrix& Q, Eigen::Index& rank, RVector v, double threshold) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index k = 0; k < rank; ++k) {
      v -= Q.col(k).dot(v) * Q.col(k);
    }
  }
  const double residual = v.norm();
  if (!(residual > threshold) || residual == 0.0) return false;
  Q.col(rank++) = v / residual;
  return true;
}

}  // namespace

OrthonormalBasis orthonormalize(const RMatrix& cols, double tol) {
  if (cols.cols() < 1) {
    fail(ErrorCode::InvalidArgument, "orthonormalize needs at least one column");
  }
  if (!(tol > 0.0)) {
    fail(ErrorCode::InvalidArgument, "deflation tolerance must be positive");
  }
  OrthonormalBasis basis;
  basis.tol = tol;
  basis.threshold = tol * cols.norm();
  basis.Q.resize(cols.rows(), 0);
  extend_basis(basis, cols);
  if (basis.rank == 0) {
    fail(ErrorCode::EmptyBasis, "all columns were deflated");
  }
  return basis;
}

Eigen::Index extend_basis(OrthonormalBasis& basis, const RMatrix& cols) {
  if (basis.Q.rows() != cols.rows()) {
    fail(ErrorCode::Structural, "basis and new columns differ in row count");
  }
  RMatrix Q(cols.rows(), basis.rank + cols.cols());
  Q.leftCols(basis.rank) = basis.Q.leftCols(basis.rank);
  Eigen::Index rank = basis.rank;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    if (!mgs_accept(Q, rank, cols.col(j), basis.threshold)) ++basis.dropped;
  }
  const Eigen::Index accepted = rank - basis.rank;
  basis.Q = Q.leftCols(rank);
  basis.rank = rank;
  return accepted;
}

bool is_real(const CMatrix& M) noexcept {
  return (M.imag().array() == 0.0).all();
}

namespace {

constexpr double kInfiniteEigenTol = 1e-10;

std::vector<Complex> standard_eigs(const CMatrix& T) {
  Eigen::ComplexEigenSolver<CMatrix> solver(T, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::SingularPencil, "eigenvalue iteration did not converge");
  }
  const auto& values = solver.eigenvalues();
  return {values.data(), values.data() + values.size()};
}

}  // namespace

GeneralizedSpectrum generalized_eigs(const CMatrix& A, const CMatrix& E, std::size_t max_dim) {
  if (A.rows() != A.cols() || E.rows() != E.cols() || A.rows() != E.rows()) {
    fail(ErrorCode::Structural, "pencil matrices must be square and of equal size");
  }
  const auto n = static_cast<std::size_t>(A.rows());
  if (n > max_dim) {
    fail(ErrorCode::OrderLimit, "pencil dimension " + std::to_string(n) +
                                    " exceeds the dense eigenvalue limit " +
                                    std::to_string(max_dim));
  }

  GeneralizedSpectrum spectrum;
  const double e_scale = E.cwiseAbs().maxCoeff();
  if (e_scale > 0.0) {
    Eigen::PartialPivLU<CMatrix> e_lu(E);
    const double min_pivot = e_lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (min_pivot > 1e-12 * e_scale && e_lu.rcond() > 1e-12) {
      spectrum.finite = standard_eigs(e_lu.solve(A));
      return spectrum;
    }
  }

  // (sigma E - A)^{-1} E has eigenvalues mu = 1 / (sigma - lambda); mu = 0
  // corresponds to an infinite eigenvalue.
  const double a_scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
  const double ratio = e_scale > 0.0 ? a_scale / e_scale : 1.0;
  constexpr std::array<double, 6> kShiftSeeds{0.6180339887, -1.3247179572, 2.7182818285,
                                              -0.3183098862, 4.6692016091, -7.3890560989};
  for (double seed : kShiftSeeds) {
    const double sigma = seed * ratio;
    std::optional<LUFactorization> lu;
    try {
      lu.emplace(sigma * E - A, 1e-12);
    } catch (const Error&) {
      continue;
    }
    const CMatrix T = lu->solve(E);
    const auto mus = standard_eigs(T);
    double mu_scale = 0.0;
    for (const auto& mu : mus) mu_scale = std::max(mu_scale, std::abs(mu));
    for (const auto& mu : mus) {
      if (mu_scale == 0.0 || std::abs(mu) <= kInfiniteEigenTol * mu_scale) {
        ++spectrum.infinite;
      } else {
        spectrum.finite.push_back(sigma - 1.0 / mu);
      }
    }
    return spectrum;
  }
  fail(ErrorCode::SingularPencil, "pencil is singular for every trial shift");
}

}  // namespace pmor
