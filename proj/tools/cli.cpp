#include "cli.hpp"

#include <charconv>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include <pmor/analysis.hpp>
#include <pmor/error.hpp>
#include <pmor/error_bound.hpp>
#include <pmor/heat_rod.hpp>
#include <pmor/io.hpp>
#include <pmor/krylov.hpp>
#include <pmor/moments.hpp>

namespace pmor::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFailedCheck = 2;

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find(',', pos), text.size());
    std::string item = text.substr(pos, next - pos);
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    item = first == std::string::npos ? "" : item.substr(first, last - first + 1);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
      fail(ErrorCode::InvalidArgument, "cannot read " + what + " from '" + text + "'");
    }
    out.push_back(v);
    pos = next + 1;
  }
  return out;
}

std::string fmt(double v) { return io::format_double(v); }

std::string fmt(const ParameterPoint& p) {
  std::string s = "[";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + fmt(p.values[i]);
  return s + "]";
}

std::string fmt(Complex s) {
  return fmt(s.real()) + (s.imag() < 0 ? "-" : "+") + fmt(std::abs(s.imag())) + "i";
}

std::vector<ParameterPoint> parse_points(const std::vector<std::string>& items) {
  std::vector<ParameterPoint> out;
  for (const auto& item : items) out.emplace_back(parse_numbers(item, "parameter point"));
  return out;
}

ParameterPoint single_point(const ParametricSystem& sys, const std::string& text) {
  ParameterPoint p(parse_numbers(text, "parameter point"));
  sys.check_arity(p);
  return p;
}

struct ComparisonArgs {
  std::vector<std::string> params;
  double f_min = 0.1;
  double f_max = 10.0;
  std::size_t points = 50;
  std::string input = "step";
  double t_end = 10.0;
  double dt = 1e-3;
};

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {
    app_.name("pmor");
    app_.description("Parametric moment-matching model order reduction for descriptor systems");
    app_.require_subcommand(1);
    app_.set_help_all_flag("--help-all", "Show help for every subcommand");
    add_gen_demo();
    add_validate();
    add_reduce();
    add_moments();
    add_verify();
    add_bound();
    add_bode();
    add_simulate();
    add_compare();
  }

  int run(std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    try {
      app_.parse(args);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app_.exit(e, out_, err_);
      err_ << "ERROR usage: " << e.what() << "\n";
      return 1;
    }
    try {
      return action_();
    } catch (const Error& e) {
      err_ << "ERROR " << to_string(e.code()) << ": " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      err_ << "ERROR internal: " << e.what() << "\n";
      return 1;
    }
  }

 private:
  CLI::App* command(const std::string& name, const std::string& description,
                    std::function<int()> body) {
    auto* sub = app_.add_subcommand(name, description);
    sub->callback([this, body = std::move(body)] { action_ = body; });
    return sub;
  }

  void add_gen_demo() {
    struct Args {
      std::string out, grid_out, plan_out;
      int nodes = 200;
      std::optional<double> length, kappa, rho, cp_base;
      std::optional<int> heated_first, heated_last;
      std::vector<int> sensors;
      bool neumann_left = false;
    };
    auto a = std::make_shared<Args>();
    auto* sub = command("gen-demo", "Write the finite-element heat rod model E(C_p) = E0 + C_p E1", [this, a] {
      auto spec = HeatRodSpec::with_nodes(a->nodes);
      if (a->length) spec.length = *a->length;
      if (a->kappa) spec.kappa = *a->kappa;
      if (a->rho) spec.rho = *a->rho;
      if (a->cp_base) spec.cp_base = *a->cp_base;
      if (a->heated_first) spec.heated_first = *a->heated_first;
      if (a->heated_last) spec.heated_last = *a->heated_last;
      if (!a->sensors.empty()) spec.sensor_nodes = a->sensors;
      spec.dirichlet_left = !a->neumann_left;
      const auto sys = generate_heat_rod(spec);
      io::save_model(a->out, sys);
      out_ << "model n=" << sys.n() << " m=" << sys.m() << " q=" << sys.q()
           << " l=" << sys.arity() << " written to " << a->out << "\n";
      if (!a->grid_out.empty()) {
        ExpansionGrid grid;
        grid.S = {Complex(0.0, 0.0), Complex(1.0, 1.0)};
        grid.P = {{200.0}, {500.0}, {900.0}};
        io::write_file_atomic(a->grid_out, io::grid_to_json(grid));
        out_ << "grid written to " << a->grid_out << "\n";
      }
      if (!a->plan_out.empty()) {
        io::write_file_atomic(a->plan_out, io::plan_to_json(ReductionPlan{}));
        out_ << "plan written to " << a->plan_out << "\n";
      }
      return kOk;
    });
    sub->add_option("--out", a->out, "Model JSON to write")->required();
    sub->add_option("--nodes", a->nodes, "Mesh nodes including the fixed end")->capture_default_str();
    sub->add_option("--length", a->length, "Rod length [m] (default 0.1)");
    sub->add_option("--kappa", a->kappa, "Thermal conductivity [W/(m K)] (default 50)");
    sub->add_option("--rho", a->rho, "Density [kg/m^3] (default 7800)");
    sub->add_option("--cp-base", a->cp_base, "Fixed heat capacity folded into E0 (default 0)");
    sub->add_option("--heated-first", a->heated_first, "First heated node (default: last tenth of the rod)");
    sub->add_option("--heated-last", a->heated_last, "Last heated node (default: free end)");
    sub->add_option("--sensor", a->sensors, "Sensor node, repeat for several outputs (default: free end)");
    sub->add_flag("--neumann-left", a->neumann_left, "Insulate node 0 instead of fixing its temperature");
    sub->add_option("--grid-out", a->grid_out, "Also write the grid S={0,1+i}, P={200,500,900}");
    sub->add_option("--plan-out", a->plan_out, "Also write the default two-sided plan");
  }

  void add_validate() {
    struct Args {
      std::string model, grid, out;
      std::vector<std::string> params;
      std::size_t limit = kDefaultDenseEigenLimit;
    };
    auto a = std::make_shared<Args>();
    auto* sub = command("validate", "Check stability of the pencil (A(p), E(p)) at parameter samples", [this, a] {
      const auto file = io::load_model(a->model);
      auto samples = parse_points(a->params);
      if (!a->grid.empty()) {
        const auto grid = io::load_grid(a->grid);
        samples.insert(samples.end(), grid.P.begin(), grid.P.end());
      }
      if (samples.empty()) {
        if (file.system.arity() != 0) {
          fail(ErrorCode::InvalidArgument, "give parameter samples with --param or --grid");
        }
        samples.emplace_back();
      }
      const auto report = validate_system(file.system, samples, a->limit);
      for (const auto& s : report.samples) {
        out_ << "p=" << fmt(s.p) << (s.stable ? " stable" : " UNSTABLE");
        if (s.finite_count) out_ << " max_re=" << fmt(s.max_real_part);
        out_ << " finite=" << s.finite_count << " infinite=" << s.infinite_count << "\n";
        if (s.e_singular) err_ << "warning: E(p) is singular at p=" << fmt(s.p) << "\n";
      }
      if (!a->out.empty()) io::write_file_atomic(a->out, io::validation_report_json(report));
      out_ << (report.all_stable() ? "all samples stable\n" : "stability check failed\n");
      return report.all_stable() ? kOk : kFailedCheck;
    });
    sub->add_option("--model", a->model, "Model JSON")->required();
    sub->add_option("-p,--param", a->params, "Parameter point 'v1,...,vl', repeatable");
    sub->add_option("--grid", a->grid, "Also sample every parameter point of this grid");
    sub->add_option("--out", a->out, "Write the report as JSON");
    sub->add_option("--eig-limit", a->limit, "Largest state dimension for the dense eigensolver")
        ->capture_default_str();
  }

  void add_reduce() {
    struct Args {
      std::string model, grid, plan, out_model, out_report;
      bool baseline = false;
      Eigen::Index target_order = 0;
    };
    auto a = std::make_shared<Args>();
    auto* sub = command("reduce", "Build V, W from Krylov blocks on the grid and project the model", [this, a] {
      const auto sys = io::load_model(a->model).system;
      const auto grid = io::load_grid(a->grid);
      const auto plan = a->plan.empty() ? ReductionPlan{} : io::load_plan(a->plan);
      Reduction red;
      io::Provenance prov;
      if (a->baseline) {
        Eigen::Index target = a->target_order;
        if (target <= 0) target = reduce(sys, grid, plan).report.r;
        red = reduce_combined_baseline(sys, grid, plan, target);
        prov.method = "combined-baseline";
      } else {
        red = reduce(sys, grid, plan);
        prov.method = "separated";
      }
      prov.sided = red.report.sided;
      prov.r = red.report.r;
      prov.points = red.report.points;
      io::save_model(a->out_model, red.reduced.system, &prov);
      if (!a->out_report.empty()) {
        io::write_file_atomic(a->out_report, io::reduction_report_json(red.report));
      }
      for (const auto& where : red.report.singular_reduced_points) {
        err_ << "warning: reduced pencil singular at " << where << "\n";
      }
      out_ << prov.method << " reduction r=" << red.report.r << " (input rank "
           << red.report.input_rank << ", output rank " << red.report.output_rank << ", padded "
           << red.report.padded_columns << ") written to " << a->out_model << "\n";
      return kOk;
    });
    sub->add_option("--model", a->model, "Full model JSON")->required();
    sub->add_option("--grid", a->grid, "Expansion grid JSON")->required();
    sub->add_option("--plan", a->plan, "Reduction plan JSON (default: depth 2, two-sided, tol 1e-10)");
    sub->add_option("--out-model", a->out_model, "Reduced model JSON to write")->required();
    sub->add_option("--out-report", a->out_report, "Reduction report JSON to write");
    sub->add_flag("--baseline", a->baseline,
                  "Use the combined-variable comparator (variables s and s*p_i at the first "
                  "parameter point, one-sided)");
    sub->add_option("--target-order", a->target_order,
                    "Order for --baseline (default: the order of the separated reduction)");
  }

  void add_moments() {
    struct Args {
      std::string model, grid, out;
      int orders = 2;
    };
    auto a = std::make_shared<Args>();
    auto* sub = command("moments", "Tabulate moments m_0 .. m_{k-1} at every grid point", [this, a] {
      if (a->orders < 1) fail(ErrorCode::InvalidArgument, "--orders must be at least 1");
      const auto file = io::load_model(a->model);
      const auto grid = io::load_grid(a->grid);
      const auto table = moment_table(file.system, grid, a->orders - 1,
                                      file.provenance ? MomentSource::Reduced : MomentSource::Full);
      io::write_file_atomic(a->out, io::moment_table_csv(table));
      out_ << table.size() << " moments written to " << a->out << "\n";
      return kOk;
    });
    sub->footer(
        "Moments are the Taylor coefficients of G(., p) about s:\n"
        "  m_i(s, p) = C(p) [-(sE(p) - A(p))^{-1} E(p)]^i (sE(p) - A(p))^{-1} B(p)\n"
        "computed with x_0 = (sE - A)^{-1} B, x_j = -(sE - A)^{-1} E x_{j-1}, m_i = C x_i.\n"
        "Note the inverse inside the bracket. Conjugates of complex grid frequencies are\n"
        "included when conjugate_closure is set.");
    sub->add_option("--model", a->model, "Model JSON (full or reduced)")->required();
    sub->add_option("--grid", a->grid, "Expansion grid JSON")->required();
    sub->add_option("--orders", a->orders, "Number of moment orders k (orders 0..k-1)")
        ->capture_default_str();
    sub->add_option("--out", a->out, "CSV to write")->required();
  }

  void add_verify() {
    struct Args {
      std::string full, reduced, grid, out;
      int count = 2;
      double tol = 1e-6;
    };
    auto a = std::make_shared<Args>();
    auto* sub = command("verify", "Compare moments of a reduced model against the full model", [this, a] {
      if (a->count < 1) fail(ErrorCode::InvalidArgument, "--count must be at least 1");
      const auto full = io::load_model(a->full).system;
      const auto reduced = io::load_model(a->reduced).system;
      const auto grid = io::load_grid(a->grid);
      const auto report = verify_matching(full, reduced, grid, a->count, a->tol);
      if (!a->out.empty()) io::write_file_atomic(a->out, io::match_report_csv(report));
      for (const auto& row : report.rows) {
        if (row.matched) continue;
        out_ << "FAIL s=" << fmt(row.s) << " p=" << fmt(row.p) << " order=" << row.order
             << " rel_err=" << fmt(row.rel_err) << "\n";
      }
      out_ << (report.passed ? "PASS" : "FAIL") << " " << report.rows.size() - report.failures()
           << "/" << report.rows.size() << " moments matched, max rel err "
           << fmt(report.max_rel_err) << " (tol " << fmt(a->tol) << ")\n";
      return report.passed ? kOk : kFailedCheck;
    });
    sub->add_option("--full", a->full, "Full model JSON")->required();
    sub->add_option("--reduced", a->reduced, "Reduced model JSON")->required();
    sub->add_option("--grid", a->grid, "Grid whose points must be matched")->required();
    sub->add_option("--count", a->count, "Moments per point (orders 0..count-1)")->capture_default_str();
    sub->add_option("--tol", a->tol, "Relative error tolerance")->capture_default_str();
    sub->add_option("--out", a->out, "Write every comparison row as CSV");
  }

  void add_bound() {
    struct Args {
      std::string model, center, radii, out, summary, reduced;
      std::optional<double> s_imag_radius;
      int order = 2;
      int samples_per_axis = 21;
      int validation = 100;
      std::uint64_t seed = 0;
      double safety = 1.05;
      int max_order = kDefaultMaxTaylorOrder;
    };
    auto a = std::make_shared<Args>();
    auto* sub = command("bound", "Prior Taylor remainder bound ||G - H_N|| <= M ||delta||^{N+1}", [this, a] {
      const auto sys = io::load_model(a->model).system;
      const auto center = parse_numbers(a->center, "--center");
      const auto radii = parse_numbers(a->radii, "--radii");
      const std::size_t l = sys.arity();
      if (center.size() != l + 2) {
        fail(ErrorCode::ParameterArity, "--center needs s_re,s_im followed by " + std::to_string(l) +
                                            " parameter values");
      }
      if (radii.size() != l + 1) {
        fail(ErrorCode::ParameterArity,
             "--radii needs the s radius followed by " + std::to_string(l) + " parameter radii");
      }
      SampleBox box;
      box.center_s = Complex(center[0], center[1]);
      box.center_p = ParameterPoint(std::vector<double>(center.begin() + 2, center.end()));
      box.radius_s_re = radii[0];
      box.radius_s_im = a->s_imag_radius.value_or(radii[0]);
      box.radius_p.assign(radii.begin() + 1, radii.end());
      box.samples_per_axis = a->samples_per_axis;
      BoundOptions options;
      options.validation_samples = a->validation;
      options.seed = a->seed;
      options.safety_factor = a->safety;
      if (a->order + 1 > a->max_order) {
        fail(ErrorCode::OrderLimit, "order N+1 = " + std::to_string(a->order + 1) +
                                        " exceeds --max-order " + std::to_string(a->max_order));
      }
      const auto report = prior_bound(sys, box, a->order, options);
      io::write_file_atomic(a->out, io::bound_report_csv(report));
      if (!a->summary.empty()) io::write_file_atomic(a->summary, io::bound_summary_json(report));
      out_ << "N=" << report.N << " M_hat=" << fmt(report.M_hat) << " at s=" << fmt(report.sup.argmax_s)
           << " p=" << fmt(report.sup.argmax_p) << " over " << report.sup.samples << " lattice points\n";
      out_ << report.violations << " violations in " << report.rows.size()
           << " samples, max observed/bound " << fmt(report.max_ratio) << "\n";
      if (!a->reduced.empty()) {
        // Diagnostic only: the Taylor bound says nothing rigorous about G - G_r.
        const auto red = io::load_model(a->reduced).system;
        std::size_t above = 0;
        double worst = 0.0;
        for (const auto& row : report.rows) {
          const double e = (transfer_eval(sys, row.s, row.p) - transfer_eval(red, row.s, row.p)).norm();
          worst = std::max(worst, e);
          if (e > report.safety_factor * row.bound) ++above;
        }
        out_ << "heuristic, not a bound: ||G - G_r|| exceeds the Taylor bound at " << above << " of "
             << report.rows.size() << " samples, max ||G - G_r|| " << fmt(worst) << "\n";
      }
      return report.violations == 0 ? kOk : kFailedCheck;
    });
    sub->add_option("--model", a->model, "Model JSON")->required();
    sub->add_option("--center", a->center, "Expansion point 's_re,s_im,p_1,...,p_l'")->required();
    sub->add_option("--radii", a->radii, "Half-widths 'r_s,r_p1,...,r_pl'")->required();
    sub->add_option("--s-imag-radius", a->s_imag_radius,
                    "Half-width of Im(s) (default: same as the s radius; 0 for a real segment)");
    sub->add_option("--order", a->order, "Taylor order N")->capture_default_str();
    sub->add_option("--samples-per-axis", a->samples_per_axis, "Lattice size for the supremum")
        ->capture_default_str();
    sub->add_option("--validation", a->validation, "Jittered validation samples")->capture_default_str();
    sub->add_option("--seed", a->seed, "Seed for the validation samples")->capture_default_str();
    sub->add_option("--safety", a->safety, "Safety factor on M_hat")->capture_default_str();
    sub->add_option("--max-order", a->max_order, "Largest derivative order allowed")->capture_default_str();
    sub->add_option("--out", a->out, "Per-sample CSV to write")->required();
    sub->add_option("--summary", a->summary, "Summary JSON to write");
    sub->add_option("--reduced", a->reduced, "Also report ||G - G_r|| against the bound (diagnostic)");
  }

  void add_bode() {
    struct Args {
      std::string model, param, out;
      double f_min = 0.1, f_max = 10.0;
      std::size_t points = 50;
    };
    auto a = std::make_shared<Args>();
    auto* sub = command("bode", "Frequency response G(i 2 pi f, p) on a log grid", [this, a] {
      const auto sys = io::load_model(a->model).system;
      const auto p = single_point(sys, a->param);
      const auto r = bode(sys, p, a->f_min, a->f_max, a->points);
      for (const auto& f : r.failures) err_ << "warning: " << f << "\n";
      io::write_file_atomic(a->out, io::bode_csv(r));
      out_ << r.frequencies.size() - r.failures.size() << " frequencies written to " << a->out << "\n";
      return kOk;
    });
    sub->add_option("--model", a->model, "Model JSON")->required();
    sub->add_option("-p,--param", a->param, "Parameter point 'v1,...,vl'");
    sub->add_option("--fmin", a->f_min, "Lowest frequency [Hz]")->capture_default_str();
    sub->add_option("--fmax", a->f_max, "Highest frequency [Hz]")->capture_default_str();
    sub->add_option("--points", a->points, "Number of log-spaced frequencies")->capture_default_str();
    sub->add_option("--out", a->out, "CSV to write")->required();
  }

  void add_simulate() {
    struct Args {
      std::string model, param, input = "step", out;
      double t_end = 10.0, dt = 1e-3;
    };
    auto a = std::make_shared<Args>();
    auto* sub = command("simulate", "Implicit Euler time response from rest", [this, a] {
      const auto sys = io::load_model(a->model).system;
      const auto p = single_point(sys, a->param);
      const auto ts = simulate(sys, p, InputSpec::parse(a->input), a->t_end, a->dt);
      io::write_file_atomic(a->out, io::time_series_csv(ts));
      out_ << ts.times.size() << " steps of " << ts.input.name() << " response written to " << a->out
           << "\n";
      return kOk;
    });
    sub->add_option("--model", a->model, "Model JSON")->required();
    sub->add_option("-p,--param", a->param, "Parameter point 'v1,...,vl'");
    sub->add_option("--input", a->input, "zero | step[:A] | sine:A,F")->capture_default_str();
    sub->add_option("--t-end", a->t_end, "Final time [s]")->capture_default_str();
    sub->add_option("--dt", a->dt, "Time step [s]")->capture_default_str();
    sub->add_option("--out", a->out, "CSV to write")->required();
  }

  void add_compare() {
    struct Args {
      std::string full, reduced, baseline, out;
      ComparisonArgs c;
      std::optional<double> bode_tol;
    };
    auto a = std::make_shared<Args>();
    auto* sub = command("compare", "Bode and time-domain errors of reduced models", [this, a] {
      const auto full = io::load_model(a->full).system;
      auto params = parse_points(a->c.params);
      if (params.empty()) {
        if (full.arity() != 0) fail(ErrorCode::InvalidArgument, "give parameter points with --param");
        params.emplace_back();
      }
      ComparisonOptions opt;
      opt.f_min = a->c.f_min;
      opt.f_max = a->c.f_max;
      opt.n_freq = a->c.points;
      opt.input = InputSpec::parse(a->c.input);
      opt.t_end = a->c.t_end;
      opt.dt = a->c.dt;
      const auto rows = compare_models(full, io::load_model(a->reduced).system, params, opt);
      std::string csv = io::comparison_csv(rows, "reduced");
      std::vector<ComparisonRow> base_rows;
      if (!a->baseline.empty()) {
        base_rows = compare_models(full, io::load_model(a->baseline).system, params, opt);
        const std::string more = io::comparison_csv(base_rows, "baseline");
        csv += more.substr(more.find('\n') + 1);
      }
      io::write_file_atomic(a->out, csv);
      bool ok = true;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out_ << "p=" << fmt(rows[i].p) << " bode_max_rel=" << fmt(rows[i].bode_max_rel)
             << " time_max_abs=" << fmt(rows[i].time_max_abs);
        if (!base_rows.empty()) {
          out_ << " baseline_bode_max_rel=" << fmt(base_rows[i].bode_max_rel)
               << " baseline_time_max_abs=" << fmt(base_rows[i].time_max_abs);
        }
        out_ << "\n";
        if (a->bode_tol && rows[i].bode_max_rel > *a->bode_tol) ok = false;
      }
      if (a->bode_tol) out_ << (ok ? "PASS" : "FAIL") << " in-band tolerance " << fmt(*a->bode_tol) << "\n";
      return ok ? kOk : kFailedCheck;
    });
    sub->add_option("--full", a->full, "Full model JSON")->required();
    sub->add_option("--reduced", a->reduced, "Reduced model JSON")->required();
    sub->add_option("--baseline", a->baseline, "Second reduced model to tabulate alongside");
    sub->add_option("-p,--param", a->c.params, "Parameter point 'v1,...,vl', repeatable");
    sub->add_option("--fmin", a->c.f_min, "Lowest frequency [Hz]")->capture_default_str();
    sub->add_option("--fmax", a->c.f_max, "Highest frequency [Hz]")->capture_default_str();
    sub->add_option("--points", a->c.points, "Number of log-spaced frequencies")->capture_default_str();
    sub->add_option("--input", a->c.input, "zero | step[:A] | sine:A,F")->capture_default_str();
    sub->add_option("--t-end", a->c.t_end, "Final time [s]")->capture_default_str();
    sub->add_option("--dt", a->c.dt, "Time step [s]")->capture_default_str();
    sub->add_option("--bode-tol", a->bode_tol, "Exit with status 2 if the Bode error exceeds this");
    sub->add_option("--out", a->out, "CSV to write")->required();
  }

  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_;
  std::function<int()> action_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  return cli.run(args);
}

}  // namespace pmor::cli
