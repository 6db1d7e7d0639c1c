// Runs every acceptance criterion and prints one PASS/FAIL line each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <pmor/analysis.hpp>
#include <pmor/error_bound.hpp>
#include <pmor/heat_rod.hpp>
#include <pmor/krylov.hpp>
#include <pmor/moments.hpp>

#include "oracles.hpp"

using namespace pmor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

ExpansionGrid heat_grid() {
  ExpansionGrid g;
  g.S = {Complex(0.0, 0.0), Complex(1.0, 1.0)};
  g.P = {{200.0}, {500.0}, {900.0}};
  return g;
}

const std::vector<ParameterPoint>& heat_params() {
  static const std::vector<ParameterPoint> p{{200.0}, {500.0}, {900.0}};
  return p;
}

// Heat rod pipeline shared by criteria 2-4.
struct HeatRun {
  ParametricSystem full;
  Reduction separated;
  Reduction baseline;
};

const HeatRun& heat_run() {
  static const HeatRun run = [] {
    HeatRun h;
    h.full = generate_heat_rod(HeatRodSpec::with_nodes(200));
    h.separated = reduce(h.full, heat_grid(), ReductionPlan{});
    ReductionPlan one;
    one.sided = Sided::One;
    h.baseline = reduce_combined_baseline(h.full, heat_grid(), one, h.separated.report.r);
    return h;
  }();
  return run;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome single_point_matching() {
  double worst_two = 0.0, worst_one = 0.0;
  bool ok = true;
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto sys = oracle::random_stable_system(40, 1, 1, 0, 1000 + seed);
    std::mt19937_64 rng(seed);
    const double s0 = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    ExpansionGrid grid;
    grid.S = {Complex(s0, 0.0)};
    grid.P = {ParameterPoint{}};
    ReductionPlan plan;
    plan.moments_per_point = 4;
    const auto two = reduce(sys, grid, plan);
    const auto r2 = verify_matching(sys, two.reduced, grid, 8, 1e-6);
    plan.sided = Sided::One;
    const auto one = reduce(sys, grid, plan);
    const auto r1 = verify_matching(sys, one.reduced, grid, 4, 1e-6);
    ok = ok && two.report.r == 4 && one.report.r == 4 && r2.passed && r1.passed;
    worst_two = std::max(worst_two, r2.max_rel_err);
    worst_one = std::max(worst_one, r1.max_rel_err);
  }
  return {ok, "20 systems n=40 r=4; two-sided m0..m7 max rel err " + sci(worst_two) +
                  ", one-sided m0..m3 max rel err " + sci(worst_one)};
}

Outcome heat_rod_grid_matching() {
  const auto& h = heat_run();
  const auto report = verify_matching(h.full, h.separated.reduced, heat_grid(), 2, 1e-6);
  const bool ok = h.separated.report.r == 12 && report.passed && report.rows.size() == 18;
  return {ok, "n=" + std::to_string(h.full.n()) + " r=" + std::to_string(h.separated.report.r) + ", " +
                  std::to_string(report.rows.size() - report.failures()) + "/" +
                  std::to_string(report.rows.size()) + " moments (9 points x 2) matched, max rel err " +
                  sci(report.max_rel_err)};
}

Outcome bode_band() {
  const auto& h = heat_run();
  bool ok = true;
  std::string detail = "max rel magnitude error on [0.1, 10] Hz:";
  for (const auto& p : heat_params()) {
    const auto full = bode(h.full, p, 0.1, 10.0, 50);
    const auto red = bode(h.separated.reduced.system, p, 0.1, 10.0, 50);
    double worst = 0.0;
    for (double e : magnitude_errors(full, red)) worst = std::max(worst, e);
    ok = ok && full.failures.empty() && red.failures.empty() && worst <= 0.01;
    detail += " C_p=" + sci(p.values[0]) + ": " + sci(worst);
  }
  return {ok, detail};
}

Outcome separation_benefit() {
  const auto& h = heat_run();
  bool ok = h.baseline.report.r == h.separated.report.r;
  std::string detail = "r=" + std::to_string(h.baseline.report.r) + "; max |y - y_r| separated vs baseline:";
  for (const auto& p : heat_params()) {
    const auto full = simulate(h.full, p, InputSpec::step(), 10.0, 1e-3);
    const auto sep = simulate(h.separated.reduced.system, p, InputSpec::step(), 10.0, 1e-3);
    const auto base = simulate(h.baseline.reduced.system, p, InputSpec::step(), 10.0, 1e-3);
    double e_sep = 0.0, e_base = 0.0;
    for (std::size_t k = 0; k < full.outputs.size(); ++k) {
      e_sep = std::max(e_sep, (full.outputs[k] - sep.outputs[k]).cwiseAbs().maxCoeff());
      e_base = std::max(e_base, (full.outputs[k] - base.outputs[k]).cwiseAbs().maxCoeff());
    }
    const double cp = p.values[0];
    const bool strict = cp == 200.0 || cp == 900.0;
    ok = ok && (strict ? e_sep < e_base : e_sep <= e_base);
    detail += " C_p=" + sci(cp) + ": " + sci(e_sep) + " vs " + sci(e_base);
  }
  return {ok, detail};
}

Outcome heat_rod_bound() {
  const auto rod = generate_heat_rod(HeatRodSpec::with_nodes(50));
  SampleBox box;
  box.center_s = Complex(1.0, 0.0);
  box.center_p = {500.0};
  box.radius_s_re = 0.5;
  box.radius_s_im = 0.5;
  box.radius_p = {100.0};
  box.samples_per_axis = 21;
  BoundOptions opt;
  opt.validation_samples = 100;
  opt.seed = 0;
  opt.safety_factor = 1.05;
  const auto report = prior_bound(rod, box, 2, opt);
  const bool ok = report.violations == 0 && report.rows.size() == 100;
  return {ok, "N=2, M_hat=" + sci(report.M_hat) + " over " + std::to_string(report.sup.samples) +
                  " lattice points, " + std::to_string(report.violations) + " violations in " +
                  std::to_string(report.rows.size()) + " samples, max observed/bound " +
                  sci(report.max_ratio)};
}

Outcome scalar_bound() {
  // G(s) = 1 / (1 - s); the (N+1)-th Taylor coefficient at xi is (1 - xi)^{-(N+2)}.
  const auto sys = oracle::scalar_system(1.0, 1.0, -1.0, 1.0);
  bool ok = true;
  std::string detail;
  for (int N : {1, 2, 3}) {
    SampleBox box;
    box.radius_s_re = 0.4;
    box.samples_per_axis = 21;
    const auto report = prior_bound(sys, box, N);
    const double closed_04 = std::pow(0.6, -(N + 2));
    const double err_04 = std::abs(report.M_hat - closed_04) / closed_04;
    bool analytic_ok = report.violations == 0;
    for (const auto& row : report.rows) {
      const double s = row.s.real();
      const double remainder = std::abs(std::pow(s, N + 1) / (1.0 - s));
      if (remainder > row.bound) analytic_ok = false;
    }
    box.radius_s_re = 0.5;
    const double M_05 = remainder_sup(sys, box, N).M_hat;
    const double closed_05 = std::pow(2.0, N + 2);
    const double err_05 = std::abs(M_05 - closed_05) / closed_05;
    ok = ok && err_04 <= 0.02 && err_05 <= 0.02 && analytic_ok;
    detail += (N > 1 ? "; " : "") + std::string("N=") + std::to_string(N) + ": M_hat " + sci(report.M_hat) +
              " vs 0.6^-(N+2) on [-0.4,0.4], " + sci(M_05) + " vs 2^(N+2) on [-0.5,0.5], " +
              (analytic_ok ? "no" : "some") + " remainder above bound";
  }
  return {ok, detail};
}

Outcome full_basis_identity() {
  const auto sys = oracle::random_stable_system(15, 2, 2, 2, 77, true);
  const RMatrix I = RMatrix::Identity(15, 15);
  const auto red = project(sys, I, I);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Complex s(u(rng), 10.0 * u(rng));
    const ParameterPoint p{u(rng), u(rng)};
    worst = std::max(worst, oracle::rel_diff(transfer_eval(red.system, s, p), transfer_eval(sys, s, p)));
  }
  return {worst <= 1e-10, "20 samples, max rel diff " + sci(worst)};
}

Outcome oracle_independence() {
  double worst = 0.0;
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto sys = oracle::random_stable_system(12, 1, 1, 0, 500 + seed);
    const double s0 = 0.1 * (seed + 1);
    const auto m = moments(sys, s0, {}, 5);
    const auto t = derivative_tensors(sys, s0, {}, 4);
    for (int i = 0; i <= 4; ++i) {
      worst = std::max(worst, oracle::rel_diff(t[i].coeffs.at(MultiIndex{i}), m[i]));
    }
  }
  return {worst <= 1e-8, "10 systems, orders 0..4, max rel diff " + sci(worst)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "single-point moment matching", 10.0, single_point_matching},
      {2, "heat rod grid matching, r = 12", 30.0, heat_rod_grid_matching},
      {3, "Bode band match within 1%", 30.0, bode_band},
      {4, "separated beats combined baseline in time domain", 60.0, separation_benefit},
      {5, "prior bound holds on the heat rod", 60.0, heat_rod_bound},
      {6, "scalar remainder supremum and bound", 5.0, scalar_bound},
      {7, "full-basis identity", 5.0, full_basis_identity},
      {8, "moment and Taylor tensor pipelines agree", 10.0, oracle_independence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_s;
    failed += pass ? 0 : 1;
    std::printf("%s [%d] %s: %s (%.2f s, limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
