#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmor/param_model.hpp"

namespace pmor {

std::vector<double> log_space(double lo, double hi, std::size_t count);

struct FrequencyResponse {
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::vector<CMatrix> values;      // q x m; empty matrix where evaluation failed
  std::vector<std::string> failures;

  bool ok(std::size_t i) const { return values[i].size() > 0; }
  double magnitude_db(std::size_t i, Eigen::Index out, Eigen::Index in) const;
  /// In (-180, 180], no unwrapping.
  double phase_deg(std::size_t i, Eigen::Index out, Eigen::Index in) const;
};

/// G(i 2 pi f, p) on a log-spaced grid of n_points in [f_min, f_max] Hz.
/// A pole on the sweep is recorded in `failures` and the sweep continues.
FrequencyResponse bode(const ParametricSystem& sys, const ParameterPoint& p, double f_min,
                       double f_max, std::size_t n_points);

struct InputSpec {
  enum class Kind { Zero, Step, Sine };
  Kind kind = Kind::Step;
  double amplitude = 1.0;
  double frequency_hz = 0.0;

  static InputSpec zero() { return {Kind::Zero, 0.0, 0.0}; }
  static InputSpec step(double amplitude = 1.0) { return {Kind::Step, amplitude, 0.0}; }
  static InputSpec sine(double amplitude, double frequency_hz) {
    return {Kind::Sine, amplitude, frequency_hz};
  }
  /// "zero", "step", "step:A", "sine:A,F".
  static InputSpec parse(const std::string& text);
  std::string name() const;

  double operator()(double t) const;
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<RVector> outputs;  // q-vectors
  InputSpec input;
};

/// Implicit Euler on E(p) x' = A(p) x + B(p) u(t); the same input signal
/// drives every input channel. x0 defaults to zero.
TimeSeries simulate(const ParametricSystem& sys, const ParameterPoint& p, const InputSpec& input,
                    double t_end, double dt, const std::optional<RVector>& x0 = std::nullopt);

struct ComparisonOptions {
  double f_min = 0.1;
  double f_max = 10.0;
  std::size_t n_freq = 50;
  InputSpec input = InputSpec::step();
  double t_end = 10.0;
  double dt = 1e-3;
};

struct ComparisonRow {
  ParameterPoint p;
  double bode_max_rel = 0.0;
  double bode_rms_rel = 0.0;
  double time_max_abs = 0.0;
  double time_rms_abs = 0.0;
};

/// Relative Bode magnitude error ||Gr| - |G|| / |G|, worst entry per frequency.
std::vector<double> magnitude_errors(const FrequencyResponse& full,
                                     const FrequencyResponse& reduced);

std::vector<ComparisonRow> compare_models(const ParametricSystem& full,
                                          const ParametricSystem& reduced,
                                          std::span<const ParameterPoint> params,
                                          const ComparisonOptions& options = {});

}  // namespace pmor
