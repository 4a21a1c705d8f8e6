#pragma once

#include "ltr/dynamic_systems.hpp"

namespace ltr {

struct Gramians {
  RealMatrix wc;  ///< A Wc + Wc A' + B B' = 0
  RealMatrix wo;  ///< A' Wo + Wo A + C' C = 0
  SolverReport wc_report;
  SolverReport wo_report;
};

Gramians gramians(const StateSpace& sys, const Tolerances& tol = default_tolerances());

struct BalancedRealization {
  StateSpace system;
  RealVector hankel_values;  ///< descending
};

RealVector hankel_singular_values(const StateSpace& sys);

/// Square-root balancing from Cholesky factors of the gramians.
BalancedRealization balance(const StateSpace& sys);

struct Truncation {
  StateSpace reduced;
  double error_bound = 0.0;  ///< 2 * sum of discarded Hankel values
  RealVector hankel_values;
};

/// Balanced truncation to target_order states. target_order equal to the
/// current order returns the system unchanged with bound 0.
Truncation balance_and_truncate(const StateSpace& sys, Eigen::Index target_order);

/// Tustin map s = (2/Ts)(z - 1)/(z + 1).
DiscreteStateSpace bilinear_discretize(const StateSpace& sys, double ts);

}  // namespace ltr
