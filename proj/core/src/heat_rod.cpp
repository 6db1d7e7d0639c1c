#include "pmor/heat_rod.hpp"

#include <algorithm>

#include "pmor/error.hpp"

namespace pmor {

HeatRodSpec HeatRodSpec::with_nodes(int n_nodes) {
  HeatRodSpec spec;
  spec.n_nodes = n_nodes;
  spec.heated_first = n_nodes - std::max(1, n_nodes / 10);
  spec.heated_last = n_nodes - 1;
  spec.sensor_nodes = {n_nodes - 1};
  return spec;
}

void HeatRodSpec::validate() const {
  if (n_nodes < 3) fail(ErrorCode::Spec, "heat rod needs at least 3 nodes");
  if (!(length > 0.0)) fail(ErrorCode::Spec, "rod length must be positive");
  if (!(kappa > 0.0) || !(rho > 0.0)) fail(ErrorCode::Spec, "kappa and rho must be positive");
  if (!(cp_base >= 0.0)) fail(ErrorCode::Spec, "cp_base must be nonnegative");
  const int first_free = dirichlet_left ? 1 : 0;
  if (heated_first < 0 || heated_last >= n_nodes || heated_first > heated_last) {
    fail(ErrorCode::Spec, "heated span must be a node range inside [0, n_nodes)");
  }
  if (sensor_nodes.empty()) fail(ErrorCode::Spec, "at least one sensor node is required");
  for (int node : sensor_nodes) {
    if (node < first_free || node >= n_nodes) {
      fail(ErrorCode::Spec, "sensor node " + std::to_string(node) + " is not a free node");
    }
  }
}

ParametricSystem generate_heat_rod(const HeatRodSpec& spec) {
  spec.validate();
  const int nodes = spec.n_nodes;
  const double h = spec.length / (nodes - 1);

  RMatrix stiffness = RMatrix::Zero(nodes, nodes);
  RMatrix mass = RMatrix::Zero(nodes, nodes);
  for (int e = 0; e + 1 < nodes; ++e) {
    stiffness.block<2, 2>(e, e) += (spec.kappa / h) * (RMatrix(2, 2) << 1, -1, -1, 1).finished();
    mass.block<2, 2>(e, e) += (spec.rho * h / 6.0) * (RMatrix(2, 2) << 2, 1, 1, 2).finished();
  }

  RVector load = RVector::Zero(nodes);
  for (int i = spec.heated_first; i <= spec.heated_last; ++i) load(i) = h;
  load(spec.heated_first) = h / 2.0;
  load(spec.heated_last) = h / 2.0;
  if (spec.heated_first == spec.heated_last) load(spec.heated_first) = h / 2.0;

  RMatrix sense = RMatrix::Zero(static_cast<Eigen::Index>(spec.sensor_nodes.size()), nodes);
  for (std::size_t k = 0; k < spec.sensor_nodes.size(); ++k) {
    sense(static_cast<Eigen::Index>(k), spec.sensor_nodes[k]) = 1.0;
  }

  const int offset = spec.dirichlet_left ? 1 : 0;
  const int n = nodes - offset;
  const RMatrix A = -stiffness.bottomRightCorner(n, n);
  const RMatrix E1 = mass.bottomRightCorner(n, n);
  const RMatrix E0 = spec.cp_base * E1;
  const RMatrix B = load.tail(n);
  const RMatrix C = sense.rightCols(n);

  return ParametricSystem(AffineMatrixFamily(E0.cast<Complex>(), {E1.cast<Complex>()}),
                          AffineMatrixFamily::constant_only(A.cast<Complex>(), 1),
                          AffineMatrixFamily::constant_only(B.cast<Complex>(), 1),
                          AffineMatrixFamily::constant_only(C.cast<Complex>(), 1));
}

}  // namespace pmor
