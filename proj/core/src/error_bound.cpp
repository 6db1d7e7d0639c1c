#include "pmor/error_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pmor/error.hpp"
#include "pmor/krylov.hpp"
#include "pmor/parallel.hpp"

namespace pmor {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double multi_factorial(const MultiIndex& k) {
  double f = 1.0;
  for (int kj : k) f *= factorial(kj);
  return f;
}

MultiIndex unit(std::size_t variables, std::size_t v) {
  MultiIndex e(variables, 0);
  e[v] = 1;
  return e;
}

bool dominates(const MultiIndex& k, const MultiIndex& j) {
  for (std::size_t v = 0; v < k.size(); ++v) {
    if (j[v] > k[v]) return false;
  }
  return true;
}

MultiIndex minus(MultiIndex k, const MultiIndex& j) {
  for (std::size_t v = 0; v < k.size(); ++v) k[v] -= j[v];
  return k;
}

std::vector<double> axis(double center, double radius, int count) {
  if (radius == 0.0 || count <= 1) return {center};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = center - radius + 2.0 * radius * i / (count - 1);
  }
  return out;
}

}  // namespace

double DerivativeTensor::scaled_frobenius_norm() const {
  const double total = factorial(order);
  double sum = 0.0;
  for (const auto& [k, c] : coeffs) sum += multi_factorial(k) / total * c.squaredNorm();
  return std::sqrt(sum);
}

std::vector<DerivativeTensor> derivative_tensors(const ParametricSystem& sys, Complex s0,
                                                 const ParameterPoint& p0, int up_to,
                                                 int max_order) {
  if (up_to < 0) fail(ErrorCode::InvalidArgument, "Taylor order must be nonnegative");
  if (up_to > max_order) {
    fail(ErrorCode::OrderLimit, "Taylor order " + std::to_string(up_to) + " exceeds the limit " +
                                    std::to_string(max_order));
  }
  const auto mats = sys.assemble(p0);
  const auto lu = factor_pencil(mats, s0, p0);
  const std::size_t l = sys.arity();
  const std::size_t variables = l + 1;

  // K(s, p) = sE(p) - A(p) is a polynomial of degree <= 2 in the offsets.
  std::vector<std::pair<MultiIndex, CMatrix>> k_terms;
  k_terms.emplace_back(unit(variables, 0), mats.E);
  for (std::size_t i = 0; i < l; ++i) {
    k_terms.emplace_back(unit(variables, i + 1), s0 * sys.E().coeff(i) - sys.A().coeff(i));
    MultiIndex mixed = unit(variables, 0);
    mixed[i + 1] = 1;
    k_terms.emplace_back(mixed, sys.E().coeff(i));
  }
  std::erase_if(k_terms, [](const auto& t) { return t.second.isZero(0.0); });

  std::map<MultiIndex, CMatrix> x;  // Taylor coefficients of K^{-1} B
  std::vector<DerivativeTensor> tensors;
  for (int degree = 0; degree <= up_to; ++degree) {
    DerivativeTensor tensor;
    tensor.order = degree;
    tensor.variables = variables;
    tensor.s0 = s0;
    tensor.p0 = p0;
    for (const auto& k : multi_indices(variables, degree)) {
      CMatrix rhs = CMatrix::Zero(sys.n(), sys.m());
      if (degree == 0) {
        rhs = mats.B;
      } else if (degree == 1 && k[0] == 0) {
        const auto i = static_cast<std::size_t>(std::find(k.begin(), k.end(), 1) - k.begin()) - 1;
        rhs = sys.B().coeff(i);
      }
      for (const auto& [j, Kj] : k_terms) {
        if (dominates(k, j)) rhs -= Kj * x.at(minus(k, j));
      }
      CMatrix xk = lu.solve(rhs);

      CMatrix gk = mats.C * xk;
      for (std::size_t i = 0; i < l; ++i) {
        if (k[i + 1] > 0) gk += sys.C().coeff(i) * x.at(minus(k, unit(variables, i + 1)));
      }
      x.emplace(k, std::move(xk));
      tensor.coeffs.emplace(k, std::move(gk));
    }
    tensors.push_back(std::move(tensor));
  }
  return tensors;
}

CMatrix taylor_truncate_eval(std::span<const DerivativeTensor> tensors, Complex s,
                             const ParameterPoint& p) {
  if (tensors.empty()) fail(ErrorCode::InvalidArgument, "no Taylor tensors to evaluate");
  const auto& base = tensors.front();
  if (p.size() + 1 != base.variables) {
    fail(ErrorCode::ParameterArity, "evaluation point has " + std::to_string(p.size()) +
                                        " parameters, tensors expect " +
                                        std::to_string(base.variables - 1));
  }
  std::vector<Complex> delta(base.variables);
  delta[0] = s - base.s0;
  for (std::size_t i = 0; i < p.size(); ++i) delta[i + 1] = p.values[i] - base.p0.values[i];

  const auto& first = base.coeffs.begin()->second;
  CMatrix sum = CMatrix::Zero(first.rows(), first.cols());
  for (const auto& tensor : tensors) {
    if (tensor.s0 != base.s0 || tensor.p0.values != base.p0.values) {
      fail(ErrorCode::InvalidArgument, "Taylor tensors do not share a base point");
    }
    for (const auto& [k, c] : tensor.coeffs) {
      Complex monomial = 1.0;
      for (std::size_t v = 0; v < k.size(); ++v) {
        for (int e = 0; e < k[v]; ++e) monomial *= delta[v];
      }
      sum += monomial * c;
    }
  }
  return sum;
}

void SampleBox::validate(std::size_t arity) const {
  if (center_p.size() != arity || radius_p.size() != arity) {
    fail(ErrorCode::ParameterArity, "sample box parameter dimensions do not match the system");
  }
  auto bad = [](double r) { return !(r >= 0.0) || !std::isfinite(r); };
  if (bad(radius_s_re) || bad(radius_s_im) || std::any_of(radius_p.begin(), radius_p.end(), bad)) {
    fail(ErrorCode::InvalidArgument, "sample box radii must be finite and nonnegative");
  }
  if (samples_per_axis < 1) fail(ErrorCode::InvalidArgument, "samples_per_axis must be >= 1");
}

bool SampleBox::contains(Complex s, const ParameterPoint& p) const {
  if (std::abs(s.real() - center_s.real()) > radius_s_re) return false;
  if (std::abs(s.imag() - center_s.imag()) > radius_s_im) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::abs(p.values[i] - center_p.values[i]) > radius_p[i]) return false;
  }
  return true;
}

std::vector<SampleBox::Sample> SampleBox::lattice() const {
  std::vector<std::vector<double>> axes;
  axes.push_back(axis(center_s.real(), radius_s_re, samples_per_axis));
  axes.push_back(axis(center_s.imag(), radius_s_im, samples_per_axis));
  for (std::size_t i = 0; i < center_p.size(); ++i) {
    axes.push_back(axis(center_p.values[i], radius_p[i], samples_per_axis));
  }
  std::vector<Sample> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    Sample sample{{axes[0][idx[0]], axes[1][idx[1]]}, {}};
    sample.p.values.resize(center_p.size());
    for (std::size_t i = 0; i < center_p.size(); ++i) sample.p.values[i] = axes[i + 2][idx[i + 2]];
    out.push_back(std::move(sample));
    std::size_t a = 0;
    while (a < axes.size() && ++idx[a] == axes[a].size()) idx[a++] = 0;
    if (a == axes.size()) break;
  }
  return out;
}

RemainderSup remainder_sup(const ParametricSystem& sys, const SampleBox& box, int N,
                           int max_order) {
  box.validate(sys.arity());
  if (N < 0) fail(ErrorCode::InvalidArgument, "truncation order must be nonnegative");
  if (N + 1 > max_order) {
    fail(ErrorCode::OrderLimit, "remainder order " + std::to_string(N + 1) +
                                    " exceeds the limit " + std::to_string(max_order));
  }
  const auto samples = box.lattice();
  std::vector<double> norms(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    try {
      const auto tensors = derivative_tensors(sys, samples[i].s, samples[i].p, N + 1, max_order);
      norms[i] = tensors.back().scaled_frobenius_norm();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PoleAtExpansionPoint) throw;
      fail(ErrorCode::PoleAtExpansionPoint,
           "pencil singular inside the sample box at " + describe(samples[i].s, samples[i].p));
    }
  });
  const auto best = std::max_element(norms.begin(), norms.end()) - norms.begin();
  RemainderSup sup;
  sup.M_hat = norms[static_cast<std::size_t>(best)];
  sup.argmax_s = samples[static_cast<std::size_t>(best)].s;
  sup.argmax_p = samples[static_cast<std::size_t>(best)].p;
  sup.samples = samples.size();
  return sup;
}

double offset_norm(Complex s, const ParameterPoint& p, Complex s0, const ParameterPoint& p0) {
  double sum = std::norm(s - s0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p.values[i] - p0.values[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

ErrorBoundReport prior_bound(const ParametricSystem& sys, const SampleBox& box, int N,
                             const BoundOptions& options) {
  if (options.validation_samples < 1) {
    fail(ErrorCode::InvalidArgument, "need at least one validation sample");
  }
  ErrorBoundReport report;
  report.N = N;
  report.safety_factor = options.safety_factor;
  report.sup = remainder_sup(sys, box, N);
  report.M_hat = report.sup.M_hat;

  const auto tensors = derivative_tensors(sys, box.center_s, box.center_p, N);

  std::mt19937_64 rng(options.seed);
  auto draw = [&](double center, double radius) {
    if (radius == 0.0) return center;
    return std::uniform_real_distribution<double>(center - radius, center + radius)(rng);
  };
  std::vector<SampleBox::Sample> samples;
  for (int i = 0; i < options.validation_samples; ++i) {
    SampleBox::Sample sample;
    const double re = draw(box.center_s.real(), box.radius_s_re);
    const double im = draw(box.center_s.imag(), box.radius_s_im);
    sample.s = {re, im};
    for (std::size_t j = 0; j < box.center_p.size(); ++j) {
      sample.p.values.push_back(draw(box.center_p.values[j], box.radius_p[j]));
    }
    samples.push_back(std::move(sample));
  }

  report.rows.resize(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto& sample = samples[i];
    BoundRow row{sample.s, sample.p};
    row.delta_norm = offset_norm(sample.s, sample.p, box.center_s, box.center_p);
    row.bound = report.M_hat * std::pow(row.delta_norm, N + 1);
    const CMatrix G = transfer_eval(sys, sample.s, sample.p);
    const CMatrix H = taylor_truncate_eval(tensors, sample.s, sample.p);
    row.observed = (G - H).norm();
    const double rounding = 1e3 * std::numeric_limits<double>::epsilon() *
                            std::max(G.norm(), H.norm());
    row.violated = row.observed > options.safety_factor * row.bound + rounding;
    report.rows[i] = std::move(row);
  });
  for (const auto& row : report.rows) {
    if (row.violated) ++report.violations;
    if (row.bound > 0.0) report.max_ratio = std::max(report.max_ratio, row.observed / row.bound);
  }
  return report;
}

}  // namespace pmor
