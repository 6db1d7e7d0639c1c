#include "pmor/krylov.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "pmor/error.hpp"
#include "pmor/parallel.hpp"

namespace pmor {

namespace {

constexpr int kMaxBaselineDepth = 12;

bool nonreal(Complex s) { return s.imag() != 0.0; }

// Krylov recurrence state at one expansion point; one LU serves every power.
struct PointKrylov {
  ParametricSystem::Assembled mats;
  std::optional<LUFactorization> lu;
  CMatrix input_block, output_block;
  CMatrix input_tail, output_tail;
  int input_depth = 0;
  int output_depth = 0;

  CMatrix next_input() {
    input_tail = lu->solve(mats.E * input_tail);
    ++input_depth;
    return input_tail;
  }
  CMatrix next_output() {
    output_tail = lu->solve_transposed(mats.E.transpose() * output_tail);
    ++output_depth;
    return output_tail;
  }
};

CMatrix grow_block(CMatrix first, int depth, const std::function<CMatrix(const CMatrix&)>& step) {
  const Eigen::Index width = first.cols();
  CMatrix block(first.rows(), width * depth);
  block.leftCols(width) = first;
  for (int j = 1; j < depth; ++j) {
    block.middleCols(j * width, width) = step(block.middleCols((j - 1) * width, width));
  }
  return block;
}

void check_depth(int depth) {
  if (depth < 1) fail(ErrorCode::InvalidArgument, "Krylov depth must be at least 1");
}

CMatrix project_matrix(const RMatrix& Wt, const CMatrix& M, const RMatrix& V) {
  if (is_real(M)) return (Wt * M.real() * V).cast<Complex>();
  return Wt.cast<Complex>() * M * V.cast<Complex>();
}

CMatrix left_project(const RMatrix& Wt, const CMatrix& M) {
  if (is_real(M)) return (Wt * M.real()).cast<Complex>();
  return Wt.cast<Complex>() * M;
}

CMatrix right_project(const CMatrix& M, const RMatrix& V) {
  if (is_real(M)) return (M.real() * V).cast<Complex>();
  return M * V.cast<Complex>();
}

std::vector<std::string> singular_points(const ParametricSystem& reduced,
                                         const ExpansionGrid& grid) {
  std::vector<std::string> out;
  for (const auto& pt : grid.matching_points()) {
    try {
      factor_pencil(reduced.assemble(pt.p), pt.s, pt.p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PoleAtExpansionPoint) throw;
      out.push_back(describe(pt.s, pt.p));
    }
  }
  return out;
}

void truncate(OrthonormalBasis& basis, Eigen::Index r) {
  if (basis.rank > r) {
    basis.dropped += basis.rank - r;
    basis.Q = basis.Q.leftCols(r).eval();
    basis.rank = r;
  }
}

}  // namespace

void ExpansionGrid::validate(std::size_t arity) const {
  if (S.empty()) fail(ErrorCode::InvalidArgument, "expansion grid has no frequencies");
  if (P.empty()) fail(ErrorCode::InvalidArgument, "expansion grid has no parameter points");
  for (std::size_t i = 0; i < S.size(); ++i) {
    for (std::size_t j = i + 1; j < S.size(); ++j) {
      if (S[i] == S[j]) {
        fail(ErrorCode::InvalidArgument, "frequency listed twice in expansion grid");
      }
      if (conjugate_closure && nonreal(S[i]) && S[j] == std::conj(S[i])) {
        fail(ErrorCode::InvalidArgument,
             "frequency and its conjugate both listed while conjugate_closure is set");
      }
    }
  }
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (P[i].size() != arity) {
      fail(ErrorCode::ParameterArity, "grid parameter point " + std::to_string(i) + " has " +
                                          std::to_string(P[i].size()) + " components, expected " +
                                          std::to_string(arity));
    }
    for (std::size_t j = i + 1; j < P.size(); ++j) {
      if (P[i] == P[j]) fail(ErrorCode::InvalidArgument, "parameter point listed twice in grid");
    }
  }
}

std::vector<ExpansionGrid::Point> ExpansionGrid::points() const {
  std::vector<Point> out;
  out.reserve(S.size() * P.size());
  for (std::size_t i = 0; i < S.size(); ++i) {
    for (std::size_t j = 0; j < P.size(); ++j) out.push_back({S[i], P[j], i, j});
  }
  return out;
}

std::vector<Complex> ExpansionGrid::closed_frequencies() const {
  std::vector<Complex> out;
  for (const auto& s : S) {
    out.push_back(s);
    if (conjugate_closure && nonreal(s)) out.push_back(std::conj(s));
  }
  return out;
}

std::vector<ExpansionGrid::Point> ExpansionGrid::matching_points() const {
  std::vector<Point> out;
  const auto freqs = closed_frequencies();
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    for (std::size_t j = 0; j < P.size(); ++j) out.push_back({freqs[i], P[j], i, j});
  }
  return out;
}

void ReductionPlan::validate() const {
  if (moments_per_point < 1) fail(ErrorCode::InvalidArgument, "moments_per_point must be >= 1");
  if (!(deflation_tol > 0.0)) fail(ErrorCode::InvalidArgument, "deflation_tol must be positive");
  if (target_order_cap && *target_order_cap < 1) {
    fail(ErrorCode::InvalidArgument, "target_order_cap must be >= 1");
  }
}

CMatrix krylov_input_block(const ParametricSystem& sys, Complex s, const ParameterPoint& p,
                           int depth) {
  check_depth(depth);
  const auto mats = sys.assemble(p);
  const auto lu = factor_pencil(mats, s, p);
  return grow_block(lu.solve(mats.B), depth,
                    [&](const CMatrix& x) { return lu.solve(mats.E * x); });
}

CMatrix krylov_output_block(const ParametricSystem& sys, Complex s, const ParameterPoint& p,
                            int depth) {
  check_depth(depth);
  const auto mats = sys.assemble(p);
  const auto lu = factor_pencil(mats, s, p);
  const CMatrix Et = mats.E.transpose();
  return grow_block(lu.solve_transposed(mats.C.transpose()), depth,
                    [&](const CMatrix& x) { return lu.solve_transposed(Et * x); });
}

RMatrix realify(std::span<const CMatrix> blocks) {
  if (blocks.empty()) return {};
  const Eigen::Index n = blocks.front().rows();
  Eigen::Index total = 0;
  for (const auto& b : blocks) {
    if (b.rows() != n) fail(ErrorCode::Structural, "Krylov blocks differ in row count");
    total += 2 * b.cols();
  }
  RMatrix out(n, total);
  Eigen::Index k = 0;
  for (const auto& b : blocks) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      out.col(k++) = b.col(j).real();
      if ((b.col(j).imag().array() != 0.0).any()) out.col(k++) = b.col(j).imag();
    }
  }
  return out.leftCols(k);
}

OrthonormalBasis aggregate_realify(std::span<const CMatrix> blocks, double tol) {
  if (blocks.empty()) fail(ErrorCode::EmptyBasis, "no Krylov blocks to aggregate");
  const RMatrix cols = realify(blocks);
  if (cols.cols() == 0) fail(ErrorCode::EmptyBasis, "Krylov blocks have no columns");
  return orthonormalize(cols, tol);
}

ReducedSystem project(const ParametricSystem& sys, const RMatrix& V, const RMatrix& W,
                      const std::optional<ParameterPoint>& nominal) {
  if (V.rows() != sys.n() || W.rows() != sys.n()) {
    fail(ErrorCode::Structural, "projection bases must have n rows");
  }
  if (V.cols() != W.cols() || V.cols() < 1) {
    fail(ErrorCode::Structural, "V and W must have the same positive column count");
  }
  const RMatrix Wt = W.transpose();
  ParametricSystem reduced(
      sys.E().map([&](const CMatrix& M) { return project_matrix(Wt, M, V); }),
      sys.A().map([&](const CMatrix& M) { return project_matrix(Wt, M, V); }),
      sys.B().map([&](const CMatrix& M) { return left_project(Wt, M); }),
      sys.C().map([&](const CMatrix& M) { return right_project(M, V); }));

  if (nominal) {
    try {
      LUFactorization check(reduced.A().evaluate(*nominal));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularMatrix) throw;
      fail(ErrorCode::DegenerateProjection,
           "W^T A(p) V is singular at the nominal parameter; try a one-sided projection");
    }
  }
  ProjectionPair pair;
  pair.V = V;
  pair.W = W;
  pair.r = V.cols();
  return {std::move(reduced), std::move(pair)};
}

namespace {

// Aggregation order by value rather than by listing order, so any
// permutation of the grid gives the same bases.
std::vector<ExpansionGrid::Point> canonical_points(const ExpansionGrid& grid) {
  auto points = grid.points();
  std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    const auto ka = std::make_tuple(a.s.real(), a.s.imag(), std::cref(a.p.values));
    const auto kb = std::make_tuple(b.s.real(), b.s.imag(), std::cref(b.p.values));
    return ka < kb;
  });
  return points;
}

std::vector<Complex> canonical_frequencies(std::vector<Complex> S) {
  std::stable_sort(S.begin(), S.end(), [](Complex a, Complex b) {
    return std::make_pair(a.real(), a.imag()) < std::make_pair(b.real(), b.imag());
  });
  return S;
}

}  // namespace

Reduction reduce(const ParametricSystem& sys, const ExpansionGrid& grid,
                 const ReductionPlan& plan) {
  plan.validate();
  grid.validate(sys.arity());
  const auto points = canonical_points(grid);
  const bool two_sided = plan.sided == Sided::Two;

  std::vector<PointKrylov> states(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    auto& st = states[i];
    const auto& pt = points[i];
    st.mats = sys.assemble(pt.p);
    st.lu.emplace(factor_pencil(st.mats, pt.s, pt.p));
    const auto& lu = *st.lu;
    const auto& mats = st.mats;
    st.input_block = grow_block(lu.solve(mats.B), plan.moments_per_point,
                                [&](const CMatrix& x) { return lu.solve(mats.E * x); });
    st.input_tail = st.input_block.rightCols(mats.B.cols());
    st.input_depth = plan.moments_per_point;
    if (two_sided) {
      const CMatrix Et = mats.E.transpose();
      st.output_block =
          grow_block(lu.solve_transposed(mats.C.transpose()), plan.moments_per_point,
                     [&](const CMatrix& x) { return lu.solve_transposed(Et * x); });
      st.output_tail = st.output_block.rightCols(mats.C.rows());
      st.output_depth = plan.moments_per_point;
    }
  });

  std::vector<CMatrix> input_blocks, output_blocks;
  for (const auto& st : states) {
    input_blocks.push_back(st.input_block);
    if (two_sided) output_blocks.push_back(st.output_block);
  }

  ReductionReport report;
  report.sided = plan.sided;
  OrthonormalBasis V = aggregate_realify(input_blocks, plan.deflation_tol);
  report.input_rank = V.rank;
  report.input_dropped = V.dropped;

  OrthonormalBasis W;
  if (two_sided) {
    W = aggregate_realify(output_blocks, plan.deflation_tol);
    report.output_rank = W.rank;
    report.output_dropped = W.dropped;

    // Deepen the smaller side's own recurrence, grid point by grid point,
    // until both bases have the same dimension.
    const bool grow_input = V.rank < W.rank;
    auto& smaller = grow_input ? V : W;
    const Eigen::Index target = std::max(V.rank, W.rank);
    const Eigen::Index before = smaller.rank;
    for (Eigen::Index sweep = 0; smaller.rank < target; ++sweep) {
      if (sweep > sys.n()) {
        fail(ErrorCode::DegenerateProjection,
             "could not equalize the ranks of V and W; try a one-sided projection");
      }
      for (auto& st : states) {
        const CMatrix next = grow_input ? st.next_input() : st.next_output();
        extend_basis(smaller, realify(std::span(&next, 1)));
        if (smaller.rank >= target) break;
      }
    }
    truncate(smaller, target);
    report.padded_columns = smaller.rank - before;
  } else {
    report.output_rank = V.rank;
  }

  Eigen::Index r = V.rank;
  if (plan.target_order_cap && r > *plan.target_order_cap) {
    fail(ErrorCode::CapExceeded, "reduced order " + std::to_string(r) + " exceeds the cap " +
                                     std::to_string(*plan.target_order_cap));
  }

  Reduction out;
  out.reduced = project(sys, V.Q, two_sided ? W.Q : V.Q, grid.P.front());
  for (std::size_t i = 0; i < points.size(); ++i) {
    PointProvenance prov{points[i].s, points[i].p, states[i].input_depth,
                         two_sided ? states[i].output_depth : states[i].input_depth};
    out.reduced.basis.provenance.push_back(prov);
  }
  report.r = r;
  report.points = out.reduced.basis.provenance;
  report.singular_reduced_points = singular_points(out.reduced.system, grid);
  if (report.singular_reduced_points.size() == grid.matching_points().size()) {
    fail(ErrorCode::DegenerateProjection,
         "reduced pencil is singular at every expansion point; use a one-sided projection");
  }
  out.report = std::move(report);
  return out;
}

std::vector<std::vector<int>> multi_indices(std::size_t variables, int degree) {
  std::vector<std::vector<int>> out;
  if (variables == 0) return out;
  if (variables == 1) return {{degree}};
  for (int first = degree; first >= 0; --first) {
    for (auto& rest : multi_indices(variables - 1, degree - first)) {
      rest.insert(rest.begin(), first);
      out.push_back(std::move(rest));
    }
  }
  return out;
}

Reduction reduce_combined_baseline(const ParametricSystem& sys, const ExpansionGrid& grid,
                                   const ReductionPlan& plan, Eigen::Index target_order) {
  plan.validate();
  grid.validate(sys.arity());
  const ParameterPoint& nominal = grid.P.front();
  const auto mats = sys.assemble(nominal);
  const std::size_t variables = sys.arity() + 1;
  std::vector<CMatrix> directions;  // E_0 pairs with s, E_i with s * p_i
  directions.push_back(sys.E().constant());
  for (const auto& Ei : sys.E().coeffs()) directions.push_back(Ei);

  struct Series {
    std::optional<LUFactorization> lu;
    std::map<std::vector<int>, CMatrix> coeffs;
    std::vector<CMatrix> columns;
  };
  const auto freqs = canonical_frequencies(grid.S);
  std::vector<Series> series(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    auto& ser = series[i];
    ser.lu.emplace(factor_pencil(mats, freqs[i], nominal));
    CMatrix x0 = ser.lu->solve(mats.B);
    ser.coeffs.emplace(std::vector<int>(variables, 0), x0);
    ser.columns.push_back(std::move(x0));
  }
  auto add_degree = [&](Series& ser, int degree) {
    for (const auto& k : multi_indices(variables, degree)) {
      CMatrix acc = CMatrix::Zero(sys.n(), sys.m());
      for (std::size_t v = 0; v < variables; ++v) {
        if (k[v] == 0) continue;
        auto prev = k;
        --prev[v];
        acc += directions[v] * ser.coeffs.at(prev);
      }
      CMatrix x = -ser.lu->solve(acc);
      ser.coeffs.emplace(k, x);
      ser.columns.push_back(std::move(x));
    }
  };

  OrthonormalBasis V;
  int depth = 0;
  for (;;) {
    ++depth;
    for (auto& ser : series) add_degree(ser, depth);
    if (depth < plan.moments_per_point) continue;

    std::vector<CMatrix> scaled;
    for (const auto& ser : series) {
      for (const auto& x : ser.columns) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
          const double nrm = x.col(j).norm();
          if (nrm > 0.0) scaled.emplace_back(x.col(j) / nrm);
        }
      }
    }
    V = aggregate_realify(scaled, plan.deflation_tol);
    if (target_order <= 0 || V.rank >= target_order || depth >= kMaxBaselineDepth) break;
  }
  if (target_order > 0) truncate(V, target_order);
  if (plan.target_order_cap && V.rank > *plan.target_order_cap) {
    fail(ErrorCode::CapExceeded, "reduced order " + std::to_string(V.rank) +
                                     " exceeds the cap " + std::to_string(*plan.target_order_cap));
  }

  Reduction out;
  out.reduced = project(sys, V.Q, V.Q, nominal);
  for (const auto& s : freqs) {
    out.reduced.basis.provenance.push_back({s, nominal, depth, depth});
  }
  out.report.sided = Sided::One;
  out.report.r = V.rank;
  out.report.input_rank = V.rank;
  out.report.output_rank = V.rank;
  out.report.input_dropped = V.dropped;
  out.report.points = out.reduced.basis.provenance;
  out.report.singular_reduced_points = singular_points(out.reduced.system, grid);
  return out;
}

}  // namespace pmor
