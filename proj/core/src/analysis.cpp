#include "pmor/analysis.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>

#include "pmor/error.hpp"
#include "pmor/parallel.hpp"

namespace pmor {

std::vector<double> log_space(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo)) {
    fail(ErrorCode::InvalidArgument, "frequency range must satisfy 0 < f_min < f_max");
  }
  if (count < 2) fail(ErrorCode::InvalidArgument, "need at least two sweep points");
  std::vector<double> out(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

double FrequencyResponse::magnitude_db(std::size_t i, Eigen::Index out, Eigen::Index in) const {
  return 20.0 * std::log10(std::abs(values.at(i)(out, in)));
}

double FrequencyResponse::phase_deg(std::size_t i, Eigen::Index out, Eigen::Index in) const {
  double deg = std::arg(values.at(i)(out, in)) * 180.0 / std::numbers::pi;
  if (deg <= -180.0) deg += 360.0;
  return deg;
}

FrequencyResponse bode(const ParametricSystem& sys, const ParameterPoint& p, double f_min,
                       double f_max, std::size_t n_points) {
  sys.check_arity(p);
  FrequencyResponse response;
  response.frequencies = log_space(f_min, f_max, n_points);
  response.values.resize(n_points);
  std::vector<std::string> errors(n_points);
  const auto mats = sys.assemble(p);
  parallel_for(n_points, [&](std::size_t i) {
    const Complex s(0.0, 2.0 * std::numbers::pi * response.frequencies[i]);
    try {
      response.values[i] = mats.C * factor_pencil(mats, s, p).solve(mats.B);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PoleAtExpansionPoint) throw;
      errors[i] = e.what();
    }
  });
  for (auto& e : errors) {
    if (!e.empty()) response.failures.push_back(std::move(e));
  }
  return response;
}

InputSpec InputSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::string rest = text.substr(colon + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = std::min(rest.find(',', start), rest.size());
      double v = 0.0;
      const char* first = rest.data() + start;
      const char* last = rest.data() + comma;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last) {
        fail(ErrorCode::InvalidArgument, "cannot parse input signal '" + text + "'");
      }
      args.push_back(v);
      start = comma + 1;
    }
  }
  if (kind == "zero" && args.empty()) return zero();
  if (kind == "step" && args.size() <= 1) return step(args.empty() ? 1.0 : args[0]);
  if (kind == "sine" && args.size() == 2) return sine(args[0], args[1]);
  fail(ErrorCode::InvalidArgument,
       "input signal must be zero, step[:A] or sine:A,F; got '" + text + "'");
}

namespace {

std::string shortest(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

}  // namespace

std::string InputSpec::name() const {
  switch (kind) {
    case Kind::Zero: return "zero";
    case Kind::Step: return "step:" + shortest(amplitude);
    case Kind::Sine: return "sine:" + shortest(amplitude) + "," + shortest(frequency_hz);
  }
  return "unknown";
}

double InputSpec::operator()(double t) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Step: return t >= 0.0 ? amplitude : 0.0;
    case Kind::Sine: return amplitude * std::sin(2.0 * std::numbers::pi * frequency_hz * t);
  }
  return 0.0;
}

TimeSeries simulate(const ParametricSystem& sys, const ParameterPoint& p, const InputSpec& input,
                    double t_end, double dt, const std::optional<RVector>& x0) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "time step must be positive");
  if (!(t_end >= 0.0)) fail(ErrorCode::InvalidArgument, "end time must be nonnegative");
  const auto mats = sys.assemble(p);
  if (!is_real(mats.E) || !is_real(mats.A) || !is_real(mats.B) || !is_real(mats.C)) {
    fail(ErrorCode::Structural, "time simulation needs a real-valued system");
  }
  const RMatrix E = mats.E.real();
  const RMatrix A = mats.A.real();
  const RMatrix B = mats.B.real();
  const RMatrix C = mats.C.real();

  const RMatrix stepping = E - dt * A;
  Eigen::PartialPivLU<RMatrix> lu(stepping);
  const double scale = stepping.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < stepping.rows(); ++i) {
    if (!(std::abs(lu.matrixLU()(i, i)) > kDefaultPivotTol * scale)) {
      fail(ErrorCode::StepSize, "E - dt*A is singular for dt=" + std::to_string(dt) +
                                    "; try a smaller time step");
    }
  }

  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  RVector x = x0.value_or(RVector::Zero(sys.n()));
  if (x.size() != sys.n()) fail(ErrorCode::Structural, "initial state has the wrong length");

  TimeSeries series;
  series.input = input;
  series.times.reserve(steps + 1);
  series.outputs.reserve(steps + 1);
  series.times.push_back(0.0);
  series.outputs.push_back(C * x);
  const RVector ones = RVector::Ones(sys.m());
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    x = lu.solve(E * x + (dt * input(t)) * (B * ones));
    series.times.push_back(t);
    series.outputs.push_back(C * x);
  }
  return series;
}

std::vector<double> magnitude_errors(const FrequencyResponse& full,
                                     const FrequencyResponse& reduced) {
  if (full.frequencies != reduced.frequencies) {
    fail(ErrorCode::Structural, "frequency responses use different sweeps");
  }
  std::vector<double> errs;
  for (std::size_t i = 0; i < full.frequencies.size(); ++i) {
    if (!full.ok(i) || !reduced.ok(i)) {
      errs.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const auto& g = full.values[i];
    const auto& gr = reduced.values[i];
    double worst = 0.0;
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      for (Eigen::Index c = 0; c < g.cols(); ++c) {
        const double mag = std::abs(g(r, c));
        const double diff = std::abs(std::abs(gr(r, c)) - mag);
        worst = std::max(worst, mag > 0.0 ? diff / mag : diff);
      }
    }
    errs.push_back(worst);
  }
  return errs;
}

std::vector<ComparisonRow> compare_models(const ParametricSystem& full,
                                          const ParametricSystem& reduced,
                                          std::span<const ParameterPoint> params,
                                          const ComparisonOptions& options) {
  if (full.m() != reduced.m() || full.q() != reduced.q() || full.arity() != reduced.arity()) {
    fail(ErrorCode::Structural, "models differ in inputs, outputs or parameter count");
  }
  std::vector<ComparisonRow> rows(params.size());
  parallel_for(params.size(), [&](std::size_t i) {
    const auto& p = params[i];
    ComparisonRow row{p};
    const auto errs = magnitude_errors(bode(full, p, options.f_min, options.f_max, options.n_freq),
                                       bode(reduced, p, options.f_min, options.f_max, options.n_freq));
    double sq = 0.0;
    for (double e : errs) {
      row.bode_max_rel = std::max(row.bode_max_rel, e);
      sq += e * e;
    }
    row.bode_rms_rel = std::sqrt(sq / static_cast<double>(errs.size()));

    const auto yf = simulate(full, p, options.input, options.t_end, options.dt);
    const auto yr = simulate(reduced, p, options.input, options.t_end, options.dt);
    sq = 0.0;
    for (std::size_t k = 0; k < yf.outputs.size(); ++k) {
      const double d = (yf.outputs[k] - yr.outputs[k]).cwiseAbs().maxCoeff();
      row.time_max_abs = std::max(row.time_max_abs, d);
      sq += d * d;
    }
    row.time_rms_abs = std::sqrt(sq / static_cast<double>(yf.outputs.size()));
    rows[i] = std::move(row);
  });
  return rows;
}

}  // namespace pmor
