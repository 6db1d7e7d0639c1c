#pragma once

#include <vector>

#include "pmor/param_model.hpp"

namespace pmor {

/// 1D rod with linear finite elements on a uniform mesh. The single
/// parameter is the specific heat capacity C_p [J/(kg K)]:
/// E(C_p) = E_0 + C_p E_1 with E_1 the consistent mass matrix times rho.
struct HeatRodSpec {
  int n_nodes = 200;
  double length = 0.1;    // m
  double kappa = 50.0;    // W/(m K)
  double rho = 7800.0;    // kg/m^3
  double cp_base = 0.0;   // J/(kg K) folded into E_0
  int heated_first = 180; // node range receiving a unit heat flux
  int heated_last = 199;
  std::vector<int> sensor_nodes{199};  // one output per node
  bool dirichlet_left = true;          // node 0 held at zero temperature

  /// Defaults scaled to `n_nodes`: heat applied over the last tenth of the
  /// rod, temperature sensed at the free end.
  static HeatRodSpec with_nodes(int n_nodes);

  void validate() const;
  /// Number of states after boundary elimination.
  int state_count() const { return dirichlet_left ? n_nodes - 1 : n_nodes; }
};

ParametricSystem generate_heat_rod(const HeatRodSpec& spec);

}  // namespace pmor
