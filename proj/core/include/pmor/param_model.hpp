#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pmor/numerics.hpp"
#include "pmor/types.hpp"

namespace pmor {

inline constexpr Eigen::Index kMaxDenseOrder = 2000;

struct ParameterPoint {
  std::vector<double> values;
  std::vector<std::string> units;  // empty, or one label per component

  ParameterPoint() = default;
  ParameterPoint(std::initializer_list<double> v) : values(v) {}
  explicit ParameterPoint(std::vector<double> v, std::vector<std::string> u = {})
      : values(std::move(v)), units(std::move(u)) {}

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const ParameterPoint& a, const ParameterPoint& b) {
    return a.values == b.values;
  }
};

/// M(p) = constant + sum_i p_i coeffs[i]. All coefficient matrices share one shape.
class AffineMatrixFamily {
 public:
  AffineMatrixFamily() = default;
  AffineMatrixFamily(CMatrix constant, std::vector<CMatrix> coeffs);

  /// A family that does not depend on the parameter but still has `arity` slots.
  static AffineMatrixFamily constant_only(CMatrix constant, std::size_t arity = 0);

  Eigen::Index rows() const noexcept { return constant_.rows(); }
  Eigen::Index cols() const noexcept { return constant_.cols(); }
  std::size_t arity() const noexcept { return coeffs_.size(); }

  const CMatrix& constant() const noexcept { return constant_; }
  const std::vector<CMatrix>& coeffs() const noexcept { return coeffs_; }
  const CMatrix& coeff(std::size_t i) const { return coeffs_.at(i); }

  CMatrix evaluate(std::span<const double> p) const;
  CMatrix evaluate(const ParameterPoint& p) const { return evaluate(std::span(p.values)); }

  bool is_real() const noexcept;

  /// Applies `f` to the constant term and every coefficient independently.
  template <typename F>
  AffineMatrixFamily map(F&& f) const {
    std::vector<CMatrix> mapped;
    mapped.reserve(coeffs_.size());
    for (const auto& c : coeffs_) mapped.emplace_back(f(c));
    return AffineMatrixFamily(f(constant_), std::move(mapped));
  }

 private:
  CMatrix constant_;
  std::vector<CMatrix> coeffs_;
};

CMatrix evaluate_family(const AffineMatrixFamily& family, const ParameterPoint& p);

/// Descriptor system E(p) x' = A(p) x + B(p) u, y = C(p) x with affine
/// parameter dependence. Immutable after construction.
class ParametricSystem {
 public:
  struct Assembled {
    CMatrix E, A, B, C;
  };

  ParametricSystem() = default;
  ParametricSystem(AffineMatrixFamily E, AffineMatrixFamily A, AffineMatrixFamily B,
                   AffineMatrixFamily C);

  const AffineMatrixFamily& E() const noexcept { return E_; }
  const AffineMatrixFamily& A() const noexcept { return A_; }
  const AffineMatrixFamily& B() const noexcept { return B_; }
  const AffineMatrixFamily& C() const noexcept { return C_; }

  Eigen::Index n() const noexcept { return A_.rows(); }
  Eigen::Index m() const noexcept { return B_.cols(); }
  Eigen::Index q() const noexcept { return C_.rows(); }
  std::size_t arity() const noexcept { return A_.arity(); }

  Assembled assemble(const ParameterPoint& p) const;
  bool is_real() const noexcept;

  /// Throws ErrorCode::ParameterArity unless p has exactly arity() components.
  void check_arity(const ParameterPoint& p) const;

 private:
  AffineMatrixFamily E_, A_, B_, C_;
};

/// LU of s E(p) - A(p); a singular pencil is reported as a pole at (s, p).
LUFactorization factor_pencil(const ParametricSystem::Assembled& mats, Complex s,
                              const ParameterPoint& p);

/// G(s, p) = C(p) (s E(p) - A(p))^{-1} B(p).
CMatrix transfer_eval(const ParametricSystem& sys, Complex s, const ParameterPoint& p);

struct StabilitySample {
  ParameterPoint p;
  bool stable = false;
  double max_real_part = 0.0;  // over finite eigenvalues
  std::size_t finite_count = 0;
  std::size_t infinite_count = 0;
  bool e_singular = false;  // warning only
};

struct ValidationReport {
  std::vector<StabilitySample> samples;
  bool all_stable() const noexcept;
  bool any_singular_e() const noexcept;
};

ValidationReport validate_system(const ParametricSystem& sys,
                                 std::span<const ParameterPoint> samples,
                                 std::size_t dense_eigen_limit = kDefaultDenseEigenLimit);

std::string describe(Complex s, const ParameterPoint& p);

}  // namespace pmor
