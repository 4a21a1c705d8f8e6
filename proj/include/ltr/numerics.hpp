#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "ltr/error.hpp"

namespace ltr {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Every numeric tolerance used by the matrix-equation solvers.
struct Tolerances {
  double lyapunov_residual = 1e-9;
  double care_residual = 1e-8;
  double symmetry = 1e-12;
  /// Eigenvalues with real part above -stability_margin are treated as unstable.
  double stability_margin = 0.0;
  int care_max_iterations = 100;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

struct SolverReport {
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct LyapunovSolution {
  RealMatrix x;
  SolverReport report;
};

struct CareSolution {
  RealMatrix x;
  SolverReport report;
};

ComplexVector eigenvalues(const RealMatrix& a);

/// Largest real part of the spectrum; -inf for an empty matrix.
double spectral_abscissa(const RealMatrix& a);

/// True when every eigenvalue lies strictly in the open left half-plane.
bool is_hurwitz(const RealMatrix& a, double margin = 0.0);

/// Solves A X + X A' + Q = 0 for stable A.
LyapunovSolution solve_lyapunov(const RealMatrix& a, const RealMatrix& q,
                                const Tolerances& tol = default_tolerances());

/// Relative residual ||A X + X A' + Q||_F / max(1, ||Q||_F).
double lyapunov_residual(const RealMatrix& a, const RealMatrix& x, const RealMatrix& q);

/// Stabilizing solution of A' X + X A - X B R^-1 B' X + Q = 0 by Newton-Kleinman iteration.
CareSolution solve_care(const RealMatrix& a, const RealMatrix& b, const RealMatrix& q,
                        const RealMatrix& r, const Tolerances& tol = default_tolerances());

/// Residual of the CARE normalized by the sum of the norms of its four terms.
double care_residual(const RealMatrix& a, const RealMatrix& b, const RealMatrix& q,
                     const RealMatrix& r, const RealMatrix& x);

/// Singular values in non-increasing order; min(rows, cols) of them.
RealVector svd_values(const ComplexMatrix& m);

inline double max_singular_value(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return svd_values(m)(0);
}

inline double min_singular_value(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  const RealVector s = svd_values(m);
  return s(s.size() - 1);
}

bool all_finite(const RealMatrix& m);
bool all_finite(const ComplexMatrix& m);
inline bool all_finite(const RealVector& v) { return v.allFinite(); }

inline RealMatrix symmetrize(const RealMatrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace ltr
