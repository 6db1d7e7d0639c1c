#include <doctest.h>

#include <algorithm>
#include <random>

#include <pmor/error.hpp>
#include <pmor/heat_rod.hpp>
#include <pmor/krylov.hpp>
#include <pmor/moments.hpp>

#include "oracles.hpp"

using namespace pmor;

namespace {

ExpansionGrid single_point(Complex s) {
  ExpansionGrid g;
  g.S = {s};
  g.P = {ParameterPoint{}};
  return g;
}

ExpansionGrid paper_grid() {
  ExpansionGrid g;
  g.S = {Complex(0.0, 0.0), Complex(1.0, 1.0)};
  g.P = {{200.0}, {500.0}, {900.0}};
  return g;
}

double subspace_distance(const RMatrix& X, const RMatrix& Y) {
  const auto qx = orthonormalize(X, 1e-12).Q;
  const auto qy = orthonormalize(Y, 1e-12).Q;
  return std::max((qx - qy * (qy.transpose() * qx)).norm(), (qy - qx * (qx.transpose() * qy)).norm());
}

bool exactly_real(const AffineMatrixFamily& f) { return f.is_real(); }

}  // namespace

TEST_SUITE("krylov-reduce") {
  TEST_CASE("grid validation") {
    ExpansionGrid g = paper_grid();
    CHECK_NOTHROW(g.validate(1));
    CHECK_THROWS_AS(g.validate(2), Error);
    g.S.push_back(Complex(1.0, -1.0));
    CHECK_THROWS_AS(g.validate(1), Error);
    g.conjugate_closure = false;
    CHECK_NOTHROW(g.validate(1));
    g = paper_grid();
    g.P.push_back({500.0});
    CHECK_THROWS_AS(g.validate(1), Error);
    g = paper_grid();
    g.S.clear();
    CHECK_THROWS_AS(g.validate(1), Error);
    CHECK(paper_grid().closed_frequencies().size() == 3);
    CHECK(paper_grid().matching_points().size() == 9);
    CHECK(paper_grid().points().size() == 6);
  }

  TEST_CASE("plan validation") {
    ReductionPlan plan;
    CHECK_NOTHROW(plan.validate());
    plan.moments_per_point = 0;
    CHECK_THROWS_AS(plan.validate(), Error);
    plan = ReductionPlan{};
    plan.deflation_tol = 0.0;
    CHECK_THROWS_AS(plan.validate(), Error);
  }

  TEST_CASE("input block by identity algebra") {
    auto one = CMatrix::Identity(2, 2);
    CMatrix B(2, 1);
    B << 1.0, 0.0;
    const ParametricSystem sys(AffineMatrixFamily::constant_only(one),
                               AffineMatrixFamily::constant_only(-one),
                               AffineMatrixFamily::constant_only(B),
                               AffineMatrixFamily::constant_only(B.transpose()));
    const CMatrix blk = krylov_input_block(sys, 0.0, {}, 2);
    REQUIRE(blk.cols() == 2);
    CHECK((blk.col(0) - B).norm() == 0.0);
    CHECK((blk.col(1) - B).norm() == 0.0);
    const CMatrix out = krylov_output_block(sys, 0.0, {}, 1);
    CHECK((out - B).norm() == 0.0);
  }

  TEST_CASE("depth one is the zeroth moment direction") {
    const auto sys = oracle::random_stable_system(8, 2, 1, 1, 21, true);
    const ParameterPoint p{0.4};
    const Complex s(0.3, 0.8);
    const auto m = sys.assemble(p);
    const CMatrix blk = krylov_input_block(sys, s, p, 1);
    CHECK(blk.cols() == 2);
    CHECK(oracle::rel_diff(blk, oracle::gauss_solve(s * m.E - m.A, m.B)) < 1e-12);
  }

  TEST_CASE("block columns follow the recurrence") {
    const auto sys = oracle::random_stable_system(8, 1, 1, 0, 22);
    const auto m = sys.assemble({});
    const CMatrix K = 1.0 * m.E - m.A;
    const CMatrix M_in = oracle::gauss_solve(K, m.E);
    const CMatrix M_out = oracle::gauss_solve(K.transpose(), m.E.transpose());
    const CMatrix in = krylov_input_block(sys, 1.0, {}, 3);
    const CMatrix out = krylov_output_block(sys, 1.0, {}, 3);
    for (int j = 0; j + 1 < 3; ++j) {
      CHECK(oracle::rel_diff(in.col(j + 1), M_in * in.col(j)) < 1e-12);
      CHECK(oracle::rel_diff(out.col(j + 1), M_out * out.col(j)) < 1e-12);
    }
    CHECK(oracle::rel_diff(out.col(0), oracle::gauss_solve(K.transpose(), m.C.transpose())) < 1e-12);
  }

  TEST_CASE("symmetric system has equal input and output blocks") {
    const auto rod = generate_heat_rod(HeatRodSpec::with_nodes(30));
    const auto& A = rod.A().constant();
    const auto& E = rod.E().coeff(0);
    const ParametricSystem sym(AffineMatrixFamily::constant_only(E),
                               AffineMatrixFamily::constant_only(A),
                               AffineMatrixFamily::constant_only(rod.C().constant().transpose()),
                               AffineMatrixFamily::constant_only(rod.C().constant()));
    const CMatrix in = krylov_input_block(sym, Complex(1.0, 1.0), {}, 3);
    const CMatrix out = krylov_output_block(sym, Complex(1.0, 1.0), {}, 3);
    CHECK(oracle::rel_diff(out, in) < 1e-13);
  }

  TEST_CASE("depth must be positive") {
    const auto sys = oracle::random_stable_system(4, 1, 1, 0, 23);
    CHECK_THROWS_AS(krylov_input_block(sys, 0.0, {}, 0), Error);
  }

  TEST_CASE("pole at an expansion point") {
    const auto sys = oracle::scalar_system(1.0, -1.0, 1.0, 1.0);
    try {
      krylov_input_block(sys, -1.0, {}, 2);
      FAIL("expected pole");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PoleAtExpansionPoint);
    }
  }

  TEST_CASE("realify keeps real columns once") {
    CMatrix blk(3, 2);
    blk << Complex(1, 0), Complex(1, 2), Complex(0, 0), Complex(0, 1), Complex(2, 0), Complex(3, 0);
    const std::vector<CMatrix> blocks{blk};
    const RMatrix R = realify(blocks);
    CHECK(R.cols() == 3);
  }

  TEST_CASE("aggregate of an orthonormal real block") {
    const RMatrix Q = RMatrix::Identity(6, 3);
    const std::vector<CMatrix> blocks{Q.cast<Complex>()};
    const auto b = aggregate_realify(blocks);
    CHECK(b.rank == 3);
    CHECK(b.dropped == 0);
    CHECK(subspace_distance(b.Q, Q) < 1e-14);
  }

  TEST_CASE("conjugate block adds nothing") {
    const auto sys = oracle::random_stable_system(10, 1, 1, 0, 24);
    const CMatrix blk = krylov_input_block(sys, Complex(0.5, 1.5), {}, 3);
    const std::vector<CMatrix> both{blk, blk.conjugate()};
    RMatrix stacked(10, 6);
    stacked << blk.real(), blk.imag();
    const auto b = aggregate_realify(both);
    CHECK(b.rank == oracle::svd_rank(stacked));
    CHECK(b.rank == 6);
    const std::vector<CMatrix> none{};
    CHECK_THROWS_AS(aggregate_realify(none), Error);
  }

  TEST_CASE("identity projection reproduces the system") {
    const auto sys = oracle::random_stable_system(6, 2, 1, 2, 25, true);
    const RMatrix I = RMatrix::Identity(6, 6);
    const auto red = project(sys, I, I, ParameterPoint{0.1, 0.2});
    CHECK(red.system.E().constant() == sys.E().constant());
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(red.system.A().coeff(i) == sys.A().coeff(i));
      CHECK(red.system.B().coeff(i) == sys.B().coeff(i));
      CHECK(red.system.C().coeff(i) == sys.C().coeff(i));
    }
  }

  TEST_CASE("coordinate projection of a diagonal system") {
    CMatrix E = CMatrix::Zero(3, 3), A = CMatrix::Zero(3, 3);
    E.diagonal() << 2.0, 3.0, 4.0;
    A.diagonal() << -5.0, -6.0, -7.0;
    const ParametricSystem sys(AffineMatrixFamily::constant_only(E),
                               AffineMatrixFamily::constant_only(A),
                               AffineMatrixFamily::constant_only(CMatrix::Ones(3, 1)),
                               AffineMatrixFamily::constant_only(CMatrix::Ones(1, 3)));
    const RMatrix e1 = RMatrix::Identity(3, 1);
    const auto red = project(sys, e1, e1);
    CHECK(red.system.n() == 1);
    CHECK(red.system.E().constant()(0, 0) == Complex(2.0));
    CHECK(red.system.A().constant()(0, 0) == Complex(-5.0));
    CHECK(red.system.B().constant()(0, 0) == Complex(1.0));
  }

  TEST_CASE("projection commutes with parameter evaluation") {
    const auto rod = generate_heat_rod(HeatRodSpec::with_nodes(60));
    ReductionPlan plan;
    const auto red = reduce(rod, paper_grid(), plan);
    const auto& V = red.reduced.basis.V;
    const auto& W = red.reduced.basis.W;
    for (double cp : {350.0, 500.0, 1234.5}) {
      const ParameterPoint p{cp};
      const auto full = rod.assemble(p);
      const auto small = red.reduced.system.assemble(p);
      const CMatrix Er = W.transpose().cast<Complex>() * full.E * V.cast<Complex>();
      const CMatrix Ar = W.transpose().cast<Complex>() * full.A * V.cast<Complex>();
      CHECK((small.E - Er).norm() <= 1e-12 * Er.norm());
      CHECK((small.A - Ar).norm() <= 1e-12 * Ar.norm());
      const Complex s(0.2, 3.0);
      const CMatrix direct = small.C * lu_solve(s * small.E - small.A, small.B);
      CHECK(oracle::rel_diff(transfer_eval(red.reduced.system, s, p), direct) < 1e-12);
    }
  }

  TEST_CASE("projection rejects mismatched bases") {
    const auto sys = oracle::random_stable_system(5, 1, 1, 0, 26);
    CHECK_THROWS_AS(project(sys, RMatrix::Identity(5, 2), RMatrix::Identity(5, 3)), Error);
    CHECK_THROWS_AS(project(sys, RMatrix::Identity(4, 2), RMatrix::Identity(4, 2)), Error);
  }

  TEST_CASE("single real point, one-sided and two-sided matching") {
    for (unsigned seed = 0; seed < 5; ++seed) {
      const auto sys = oracle::random_stable_system(20, 1, 1, 0, 30 + seed);
      const auto grid = single_point(0.5);
      ReductionPlan plan;
      plan.moments_per_point = 3;
      plan.sided = Sided::One;
      const auto one = reduce(sys, grid, plan);
      CHECK(one.report.r == 3);
      CHECK(one.reduced.basis.V == one.reduced.basis.W);
      CHECK(verify_matching(sys, one.reduced, grid, 3, 1e-6).passed);
      plan.sided = Sided::Two;
      const auto two = reduce(sys, grid, plan);
      CHECK(two.report.r == 3);
      CHECK(verify_matching(sys, two.reduced, grid, 6, 1e-6).passed);
    }
  }

  TEST_CASE("bases are orthonormal and real") {
    const auto rod = generate_heat_rod(HeatRodSpec::with_nodes(80));
    const auto red = reduce(rod, paper_grid(), ReductionPlan{});
    const auto& V = red.reduced.basis.V;
    const auto& W = red.reduced.basis.W;
    const auto r = red.reduced.basis.r;
    CHECK((V.transpose() * V - RMatrix::Identity(r, r)).norm() <= 1e-10);
    CHECK((W.transpose() * W - RMatrix::Identity(r, r)).norm() <= 1e-10);
    const auto& sys = red.reduced.system;
    CHECK(exactly_real(sys.E()));
    CHECK(exactly_real(sys.A()));
    CHECK(exactly_real(sys.B()));
    CHECK(exactly_real(sys.C()));
    CHECK(red.report.points.size() == 6);
    CHECK(red.reduced.basis.provenance.size() == 6);
  }

  TEST_CASE("parametric matching on a random system") {
    const auto sys = oracle::random_stable_system(30, 1, 1, 2, 40, true);
    ExpansionGrid grid;
    grid.S = {Complex(0.2, 0.0), Complex(0.5, 1.0)};
    grid.P = {{0.1, -0.2}, {-0.3, 0.4}};
    const auto red = reduce(sys, grid, ReductionPlan{});
    CHECK(verify_matching(sys, red.reduced, grid, 4, 1e-6).passed);
    ReductionPlan one;
    one.sided = Sided::One;
    const auto red1 = reduce(sys, grid, one);
    CHECK(verify_matching(sys, red1.reduced, grid, 2, 1e-6).passed);
  }

  TEST_CASE("transfer function is invariant under grid order") {
    const auto rod = generate_heat_rod(HeatRodSpec::with_nodes(60));
    ExpansionGrid a = paper_grid();
    ExpansionGrid b = a;
    std::reverse(b.S.begin(), b.S.end());
    std::reverse(b.P.begin(), b.P.end());
    const auto ra = reduce(rod, a, ReductionPlan{});
    const auto rb = reduce(rod, b, ReductionPlan{});
    REQUIRE(ra.report.r == rb.report.r);
    for (double cp : {200.0, 640.0}) {
      for (Complex s : {Complex(0.0, 0.5), Complex(0.0, 6.0), Complex(2.0, 0.0)}) {
        const CMatrix ga = transfer_eval(ra.reduced.system, s, {cp});
        const CMatrix gb = transfer_eval(rb.reduced.system, s, {cp});
        CHECK(oracle::rel_diff(ga, gb) <= 1e-10);
      }
    }
  }

  TEST_CASE("result does not depend on the worker count") {
    const auto rod = generate_heat_rod(HeatRodSpec::with_nodes(60));
    setenv("PMOR_THREADS", "1", 1);
    const auto serial = reduce(rod, paper_grid(), ReductionPlan{});
    setenv("PMOR_THREADS", "4", 1);
    const auto threaded = reduce(rod, paper_grid(), ReductionPlan{});
    unsetenv("PMOR_THREADS");
    CHECK(serial.reduced.basis.V == threaded.reduced.basis.V);
    CHECK(serial.reduced.basis.W == threaded.reduced.basis.W);
  }

  TEST_CASE("full basis identity") {
    const auto sys = oracle::random_stable_system(15, 2, 2, 2, 41, true);
    const RMatrix I = RMatrix::Identity(15, 15);
    const auto red = project(sys, I, I);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
      const Complex s(u(rng), 5.0 * u(rng));
      const ParameterPoint p{u(rng), u(rng)};
      CHECK(oracle::rel_diff(transfer_eval(red.system, s, p), transfer_eval(sys, s, p)) <= 1e-10);
    }
  }

  TEST_CASE("cap on the reduced order") {
    const auto rod = generate_heat_rod(HeatRodSpec::with_nodes(60));
    ReductionPlan plan;
    plan.target_order_cap = 8;
    try {
      reduce(rod, paper_grid(), plan);
      FAIL("expected cap error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::CapExceeded);
      CHECK(std::string(e.what()).find("12") != std::string::npos);
    }
  }

  TEST_CASE("arity mismatch in the grid") {
    const auto rod = generate_heat_rod(HeatRodSpec::with_nodes(20));
    ExpansionGrid g = paper_grid();
    g.P = {{1.0, 2.0}};
    try {
      reduce(rod, g, ReductionPlan{});
      FAIL("expected arity error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParameterArity);
    }
  }

  TEST_CASE("multi-indices in graded lexicographic order") {
    const auto k = multi_indices(2, 2);
    REQUIRE(k.size() == 3);
    CHECK(k[0] == std::vector<int>{2, 0});
    CHECK(k[1] == std::vector<int>{1, 1});
    CHECK(k[2] == std::vector<int>{0, 2});
    CHECK(multi_indices(3, 3).size() == 10);
  }

  TEST_CASE("baseline without parameters matches the standard method") {
    const auto sys = oracle::random_stable_system(20, 1, 1, 0, 42);
    const auto grid = single_point(0.7);
    ReductionPlan plan;
    plan.moments_per_point = 4;
    plan.sided = Sided::One;
    const auto standard = reduce(sys, grid, plan);
    ReductionPlan bplan;
    bplan.moments_per_point = 1;
    bplan.sided = Sided::One;
    const auto base = reduce_combined_baseline(sys, grid, bplan, standard.report.r);
    CHECK(base.report.r == standard.report.r);
    CHECK(subspace_distance(base.reduced.basis.V, standard.reduced.basis.V) < 1e-8);
  }

  TEST_CASE("baseline depth one has three directions for one parameter") {
    const auto sys = oracle::random_stable_system(12, 1, 1, 1, 43);
    ExpansionGrid grid;
    grid.S = {Complex(0.5, 0.0)};
    grid.P = {{0.2}, {0.6}};
    ReductionPlan plan;
    plan.moments_per_point = 1;
    const auto base = reduce_combined_baseline(sys, grid, plan);
    CHECK(base.report.r == 3);
    CHECK(base.reduced.basis.V == base.reduced.basis.W);
  }

  TEST_CASE("baseline misses off-nominal moments") {
    const auto rod = generate_heat_rod(HeatRodSpec::with_nodes(100));
    const auto grid = paper_grid();
    const auto sep = reduce(rod, grid, ReductionPlan{});
    ReductionPlan plan;
    plan.sided = Sided::One;
    const auto base = reduce_combined_baseline(rod, grid, plan, sep.report.r);
    CHECK(base.report.r == sep.report.r);
    const auto report = verify_matching(rod, base.reduced, grid, 2, 1e-6);
    CHECK_FALSE(report.passed);
    bool off_nominal_failure = false;
    for (const auto& row : report.rows) {
      if (!row.matched && row.p.values[0] != 200.0) off_nominal_failure = true;
    }
    CHECK(off_nominal_failure);
  }
}
