#pragma once

#include <cmath>
#include <cstdint>

#include "ltr/gimbal_model.hpp"
#include "ltr/lqgltr_design.hpp"
#include "ltr/random.hpp"

namespace testing {

inline ltr::RealMatrix random_matrix(ltr::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  ltr::RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

/// Random matrix shifted so its spectral abscissa is at most -margin.
inline ltr::RealMatrix random_stable(ltr::Rng& rng, Eigen::Index n, double margin = 0.5) {
  ltr::RealMatrix a = random_matrix(rng, n, n);
  const double shift = ltr::spectral_abscissa(a) + margin;
  a -= shift * ltr::RealMatrix::Identity(n, n);
  return a;
}

inline double relative_error(const ltr::ComplexMatrix& got, const ltr::ComplexMatrix& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

/// Gimbal, Design-2 augmentation and the LTR sweep shared by the design tests.
struct GimbalDesign {
  ltr::StateSpace plant = ltr::build_mimo_model(ltr::azimuth_params(), ltr::elevation_params());
  ltr::UncertaintyWeights weights = ltr::uncertainty_weights();
  ltr::StateSpace we1 =
      ltr::diagonal_weight(ltr::make_sensitivity_weight(ltr::design1_weight_params()), 2);
  ltr::StateSpace we2 =
      ltr::diagonal_weight(ltr::make_sensitivity_weight(ltr::design2_weight_params()), 2);
  ltr::LqgLtrDesign design = ltr::design_lqg_ltr(plant, we2, ltr::default_noise(2, 2),
                                                 {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7});
};

inline const GimbalDesign& gimbal_design() {
  static const GimbalDesign d;
  return d;
}

}  // namespace testing
