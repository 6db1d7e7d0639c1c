#include "pmor/param_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmor/error.hpp"

namespace pmor {

namespace {

std::string shape(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

AffineMatrixFamily::AffineMatrixFamily(CMatrix constant, std::vector<CMatrix> coeffs)
    : constant_(std::move(constant)), coeffs_(std::move(coeffs)) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i].rows() != constant_.rows() || coeffs_[i].cols() != constant_.cols()) {
      fail(ErrorCode::Structural, "coefficient " + std::to_string(i + 1) + " is " +
                                      shape(coeffs_[i].rows(), coeffs_[i].cols()) +
                                      ", constant term is " +
                                      shape(constant_.rows(), constant_.cols()));
    }
  }
}

AffineMatrixFamily AffineMatrixFamily::constant_only(CMatrix constant, std::size_t arity) {
  std::vector<CMatrix> zeros(arity, CMatrix::Zero(constant.rows(), constant.cols()));
  return AffineMatrixFamily(std::move(constant), std::move(zeros));
}

CMatrix AffineMatrixFamily::evaluate(std::span<const double> p) const {
  if (p.size() != coeffs_.size()) {
    fail(ErrorCode::ParameterArity, "parameter has " + std::to_string(p.size()) +
                                        " components, family expects " +
                                        std::to_string(coeffs_.size()));
  }
  CMatrix out = constant_;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (p[i] != 0.0) out += p[i] * coeffs_[i];
  }
  return out;
}

bool AffineMatrixFamily::is_real() const noexcept {
  return pmor::is_real(constant_) &&
         std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const CMatrix& c) { return pmor::is_real(c); });
}

CMatrix evaluate_family(const AffineMatrixFamily& family, const ParameterPoint& p) {
  return family.evaluate(p);
}

ParametricSystem::ParametricSystem(AffineMatrixFamily E, AffineMatrixFamily A,
                                   AffineMatrixFamily B, AffineMatrixFamily C)
    : E_(std::move(E)), A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
  const auto l = A_.arity();
  if (E_.arity() != l || B_.arity() != l || C_.arity() != l) {
    fail(ErrorCode::Structural, "E, A, B, C must share the parameter count");
  }
  const auto n = A_.rows();
  if (n < 1 || A_.cols() != n) fail(ErrorCode::Structural, "A must be square and nonempty");
  if (n > kMaxDenseOrder) {
    fail(ErrorCode::OrderLimit, "state dimension " + std::to_string(n) +
                                    " exceeds the dense limit " + std::to_string(kMaxDenseOrder));
  }
  if (E_.rows() != n || E_.cols() != n) {
    fail(ErrorCode::Structural, "E is " + shape(E_.rows(), E_.cols()) + ", expected " + shape(n, n));
  }
  if (B_.rows() != n || B_.cols() < 1) {
    fail(ErrorCode::Structural, "B is " + shape(B_.rows(), B_.cols()) + ", expected " + shape(n, B_.cols()));
  }
  if (C_.cols() != n || C_.rows() < 1) {
    fail(ErrorCode::Structural, "C is " + shape(C_.rows(), C_.cols()) + ", expected " + shape(C_.rows(), n));
  }
}

void ParametricSystem::check_arity(const ParameterPoint& p) const {
  if (p.size() != arity()) {
    fail(ErrorCode::ParameterArity, "parameter has " + std::to_string(p.size()) +
                                        " components, system expects " + std::to_string(arity()));
  }
}

ParametricSystem::Assembled ParametricSystem::assemble(const ParameterPoint& p) const {
  check_arity(p);
  return {E_.evaluate(p), A_.evaluate(p), B_.evaluate(p), C_.evaluate(p)};
}

bool ParametricSystem::is_real() const noexcept {
  return E_.is_real() && A_.is_real() && B_.is_real() && C_.is_real();
}

std::string describe(Complex s, const ParameterPoint& p) {
  std::ostringstream out;
  out.precision(17);
  out << "s=(" << s.real() << (s.imag() < 0 ? "-" : "+") << std::abs(s.imag()) << "i), p=[";
  for (std::size_t i = 0; i < p.size(); ++i) out << (i ? "," : "") << p.values[i];
  out << "]";
  return out.str();
}

LUFactorization factor_pencil(const ParametricSystem::Assembled& mats, Complex s,
                              const ParameterPoint& p) {
  try {
    return LUFactorization(s * mats.E - mats.A);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMatrix) throw;
    fail(ErrorCode::PoleAtExpansionPoint, "sE(p)-A(p) is singular at " + describe(s, p));
  }
}

CMatrix transfer_eval(const ParametricSystem& sys, Complex s, const ParameterPoint& p) {
  const auto mats = sys.assemble(p);
  return mats.C * factor_pencil(mats, s, p).solve(mats.B);
}

bool ValidationReport::all_stable() const noexcept {
  return std::all_of(samples.begin(), samples.end(),
                     [](const StabilitySample& s) { return s.stable; });
}

bool ValidationReport::any_singular_e() const noexcept {
  return std::any_of(samples.begin(), samples.end(),
                     [](const StabilitySample& s) { return s.e_singular; });
}

ValidationReport validate_system(const ParametricSystem& sys,
                                 std::span<const ParameterPoint> samples,
                                 std::size_t dense_eigen_limit) {
  if (static_cast<std::size_t>(sys.n()) > dense_eigen_limit) {
    fail(ErrorCode::OrderLimit, "validation limited to n <= " + std::to_string(dense_eigen_limit));
  }
  ValidationReport report;
  for (const auto& p : samples) {
    const auto mats = sys.assemble(p);
    StabilitySample row;
    row.p = p;
    Eigen::FullPivLU<CMatrix> e_lu(mats.E);
    row.e_singular = e_lu.rank() < mats.E.rows();

    const auto spectrum = generalized_eigs(mats.A, mats.E, dense_eigen_limit);
    row.finite_count = spectrum.finite.size();
    row.infinite_count = spectrum.infinite;
    row.max_real_part = -std::numeric_limits<double>::infinity();
    for (const auto& lambda : spectrum.finite) {
      row.max_real_part = std::max(row.max_real_part, lambda.real());
    }
    row.stable = row.max_real_part < 0.0;
    report.samples.push_back(std::move(row));
  }
  return report;
}

}  // namespace pmor
