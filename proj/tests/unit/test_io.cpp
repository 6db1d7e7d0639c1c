#include <doctest.h>

#include <filesystem>
#include <limits>

#include <pmor/error.hpp>
#include <pmor/heat_rod.hpp>
#include <pmor/io.hpp>

#include "oracles.hpp"

using namespace pmor;
namespace fs = std::filesystem;

namespace {

bool same_family(const AffineMatrixFamily& a, const AffineMatrixFamily& b) {
  if (a.constant() != b.constant() || a.arity() != b.arity()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (a.coeff(i) != b.coeff(i)) return false;
  return true;
}

bool same_system(const ParametricSystem& a, const ParametricSystem& b) {
  return same_family(a.E(), b.E()) && same_family(a.A(), b.A()) && same_family(a.B(), b.B()) &&
         same_family(a.C(), b.C());
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "pmor_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("shortest round-trip numbers") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 4.9e-324,
                     std::numeric_limits<double>::max()}) {
      CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
    }
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(2.0) == "2");
  }

  TEST_CASE("model round trip is bit exact") {
    const auto sys = oracle::random_stable_system(7, 2, 3, 2, 90, true);
    const auto back = io::model_from_json(io::model_to_json(sys));
    CHECK(same_system(sys, back.system));
    CHECK_FALSE(back.provenance.has_value());

    const auto path = scratch("model.json");
    io::save_model(path, sys);
    CHECK(same_system(sys, io::load_model(path).system));
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  }

  TEST_CASE("complex matrices keep their imaginary parts") {
    CMatrix M = CMatrix::Identity(2, 2);
    M(0, 1) = Complex(0.25, -1.0 / 7.0);
    const ParametricSystem sys(AffineMatrixFamily::constant_only(CMatrix::Identity(2, 2)),
                               AffineMatrixFamily::constant_only(M),
                               AffineMatrixFamily::constant_only(CMatrix::Ones(2, 1)),
                               AffineMatrixFamily::constant_only(CMatrix::Ones(1, 2)));
    const std::string text = io::model_to_json(sys);
    CHECK(same_system(sys, io::model_from_json(text).system));
  }

  TEST_CASE("real matrices omit the imaginary part") {
    const auto rod = generate_heat_rod(HeatRodSpec::with_nodes(4));
    const std::string text = io::model_to_json(rod);
    CHECK(text.find("\"l\": 1") != std::string::npos);
    const auto back = io::model_from_json(text);
    CHECK(same_system(rod, back.system));
  }

  TEST_CASE("provenance block") {
    const auto sys = oracle::random_stable_system(3, 1, 1, 1, 91);
    io::Provenance prov;
    prov.method = "separated";
    prov.sided = Sided::Two;
    prov.r = 3;
    prov.points.push_back({Complex(1.0, 1.0), ParameterPoint{500.0}, 2, 2});
    const auto back = io::model_from_json(io::model_to_json(sys, &prov));
    REQUIRE(back.provenance.has_value());
    CHECK(back.provenance->method == "separated");
    CHECK(back.provenance->points.size() == 1);
    CHECK(back.provenance->points[0].s == Complex(1.0, 1.0));
    CHECK(back.provenance->points[0].p.values[0] == 500.0);
  }

  TEST_CASE("schema violations") {
    auto code_of = [](const std::string& text) {
      try {
        io::model_from_json(text);
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::Io;
    };
    const std::string one = R"({"rows":1,"cols":1,"triplets":[[0,0,1.0]]})";
    auto model = [&](const std::string& a, const std::string& n = "1") {
      return "{\"n\":" + n + ",\"m\":1,\"q\":1,\"l\":0,\"E\":{\"constant\":" + one +
             ",\"coeffs\":[]},\"A\":{\"constant\":" + a + ",\"coeffs\":[]},\"B\":{\"constant\":" +
             one + ",\"coeffs\":[]},\"C\":{\"constant\":" + one + ",\"coeffs\":[]}}";
    };
    CHECK_NOTHROW(io::model_from_json(model(one)));
    CHECK(code_of(model(one, "2")) == ErrorCode::Schema);
    CHECK(code_of(model(R"({"rows":1,"cols":1,"triplets":[[0,0,1],[0,0,2]]})")) == ErrorCode::Schema);
    CHECK(code_of(model(R"({"rows":1,"cols":1,"triplets":[[1,0,1]]})")) == ErrorCode::Schema);
    CHECK(code_of(model(R"({"rows":1,"cols":1,"triplets":[[0,0]]})")) == ErrorCode::Schema);
    CHECK(code_of(model(R"({"rows":1,"cols":1})")) == ErrorCode::Schema);
    CHECK(code_of("not json") == ErrorCode::Schema);
    CHECK(code_of(model(R"({"rows":2,"cols":2,"triplets":[]})")) == ErrorCode::Structural);
  }

  TEST_CASE("grid and plan files") {
    ExpansionGrid g;
    g.S = {Complex(0.0, 0.0), Complex(1.0, 1.0)};
    g.P = {{200.0}, {500.0}, {900.0}};
    const auto back = io::grid_from_json(io::grid_to_json(g));
    CHECK(back.S == g.S);
    CHECK(back.P == g.P);
    CHECK(back.conjugate_closure);

    const auto plan = io::plan_from_json(R"({"moments_per_point": 2, "sided": "two", "deflation_tol": 1e-10})");
    CHECK(plan.moments_per_point == 2);
    CHECK(plan.sided == Sided::Two);
    CHECK(plan.deflation_tol == 1e-10);
    CHECK_FALSE(plan.target_order_cap.has_value());
    ReductionPlan capped;
    capped.target_order_cap = 9;
    capped.sided = Sided::One;
    const auto again = io::plan_from_json(io::plan_to_json(capped));
    CHECK(again.target_order_cap == 9);
    CHECK(again.sided == Sided::One);
    CHECK_THROWS_AS(io::plan_from_json(R"({"sided": "three"})"), Error);
    CHECK_THROWS_AS(io::plan_from_json(R"({"moments_per_point": 0})"), Error);
    CHECK_THROWS_AS(io::grid_from_json(R"({"S": [[1]], "P": [[1]]})"), Error);
  }

  TEST_CASE("missing file") {
    try {
      io::load_model(scratch("does_not_exist.json"));
      FAIL("expected io error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Io);
    }
  }

  TEST_CASE("csv headers") {
    MatchReport report;
    report.rows.push_back({Complex(1.0, 1.0), ParameterPoint{500.0}, 1, 1e-12, 2e-12, true});
    const auto csv = io::match_report_csv(report);
    CHECK(csv.rfind("s_re,s_im,p_1,order,abs_err,rel_err,matched\n", 0) == 0);
    CHECK(csv.find("1,1,500,1,1e-12,2e-12,true") != std::string::npos);

    ErrorBoundReport bound;
    bound.rows.push_back({Complex(0.5, 0.0), ParameterPoint{1.0, 2.0}, 0.1, 0.2, 0.05, false});
    CHECK(io::bound_report_csv(bound).rfind("s_re,s_im,p_1,p_2,delta_norm,bound,observed,violated\n", 0) == 0);
    const auto summary = io::bound_summary_json(bound);
    for (const char* key : {"\"N\"", "\"M_hat\"", "\"violations\"", "\"max_ratio\""}) {
      CHECK(summary.find(key) != std::string::npos);
    }

    TimeSeries ts;
    ts.times = {0.0, 0.5};
    ts.outputs = {RVector::Zero(2), RVector::Ones(2)};
    CHECK(io::time_series_csv(ts) == "t,y_1,y_2\n0,0,0\n0.5,1,1\n");
  }

  TEST_CASE("bode csv") {
    const auto sys = oracle::scalar_system(1.0, -1.0, 1.0, 1.0);
    const auto r = bode(sys, {}, 0.1, 1.0, 2);
    const auto csv = io::bode_csv(r);
    CHECK(csv.rfind("freq_hz,out,in,mag_db,phase_deg\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  }
}
