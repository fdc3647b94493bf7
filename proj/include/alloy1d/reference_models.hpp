#pragma once

/// Models used by the acceptance suite, the tests and the bundled JSON files.

#include "alloy1d/model.hpp"

namespace alloy1d::reference {

/// V_per = 0, f = 1 on the whole cell, couplings 0 or 1 with probability 1/2.
inline ModelConfig square_well() {
  ModelConfig m;
  m.normalized = true;
  return m;
}

/// Background 10 on [-1/4, 1/4] and 0 elsewhere.
inline PiecewisePotential kronig_penney_cell(double height = 10.0) {
  return {-0.5, {0.25, 0.5, 0.25}, {0.0, height, 0.0}};
}

/// Kronig-Penney background with the square-well single site.
inline ModelConfig kronig_penney() {
  ModelConfig m = square_well();
  m.v_per = kronig_penney_cell();
  return m;
}

/// Deterministic free operator: every coupling is 0.
inline ModelConfig free_line() {
  ModelConfig m;
  m.mu = CouplingDistribution::point_mass(0.0);
  return m;
}

}  // namespace alloy1d::reference
