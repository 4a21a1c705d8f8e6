#include "ltr/model_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ltr {

namespace {

/// Lower factor L with L L' = W; falls back to a clamped symmetric square root
/// when W is only semidefinite in floating point.
RealMatrix gramian_factor(const RealMatrix& w) {
  Eigen::LLT<RealMatrix> llt(w);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(w);
  const RealVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

struct SquareRootFactors {
  RealMatrix lc;
  RealMatrix lo;
  RealMatrix u;
  RealMatrix v;
  RealVector hsv;
};

SquareRootFactors square_root(const StateSpace& sys) {
  const Gramians g = gramians(sys);
  SquareRootFactors f;
  f.lc = gramian_factor(g.wc);
  f.lo = gramian_factor(g.wo);
  Eigen::JacobiSVD<RealMatrix> svd(f.lo.transpose() * f.lc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  f.u = svd.matrixU();
  f.v = svd.matrixV();
  f.hsv = svd.singularValues();
  return f;
}

StateSpace project(const StateSpace& sys, const SquareRootFactors& f, Eigen::Index k) {
  const double top = f.hsv(0);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(f.hsv(i) >= 1e-10 * top) || top <= 0.0) {
      throw Error(ErrorKind::NearSingularGramian,
                  "retained Hankel value " + std::to_string(i + 1) + " is " +
                      std::to_string(f.hsv(i)) + ", below 1e-10 of the largest");
    }
  }
  const RealVector scale = f.hsv.head(k).cwiseSqrt().cwiseInverse();
  const RealMatrix t = f.lc * f.v.leftCols(k) * scale.asDiagonal();
  const RealMatrix t_inv = scale.asDiagonal() * f.u.leftCols(k).transpose() * f.lo.transpose();
  return {t_inv * sys.a * t, t_inv * sys.b, sys.c * t, sys.d};
}

}  // namespace

Gramians gramians(const StateSpace& sys, const Tolerances& tol) {
  if (!is_stable(sys)) throw Error(ErrorKind::NotStable, "gramians require a stable system");
  const LyapunovSolution c = solve_lyapunov(sys.a, sys.b * sys.b.transpose(), tol);
  const LyapunovSolution o = solve_lyapunov(sys.a.transpose(), sys.c.transpose() * sys.c, tol);
  return {c.x, o.x, c.report, o.report};
}

RealVector hankel_singular_values(const StateSpace& sys) { return square_root(sys).hsv; }

BalancedRealization balance(const StateSpace& sys) {
  const SquareRootFactors f = square_root(sys);
  return {project(sys, f, sys.order()), f.hsv};
}

Truncation balance_and_truncate(const StateSpace& sys, Eigen::Index target_order) {
  if (target_order < 1 || target_order > sys.order()) {
    throw Error(ErrorKind::InvalidParameters, "target order must be in [1, order]");
  }
  const SquareRootFactors f = square_root(sys);
  if (target_order == sys.order()) return {sys, 0.0, f.hsv};
  Truncation t;
  t.hankel_values = f.hsv;
  t.reduced = project(sys, f, target_order);
  t.error_bound = 2.0 * f.hsv.tail(sys.order() - target_order).sum();
  return t;
}

DiscreteStateSpace bilinear_discretize(const StateSpace& sys, double ts) {
  if (!(ts > 0.0)) throw Error(ErrorKind::InvalidParameters, "sample period must be positive");
  const Eigen::Index n = sys.order();
  const double h = 0.5 * ts;
  const RealMatrix id = RealMatrix::Identity(n, n);
  Eigen::FullPivLU<RealMatrix> lu(id - h * sys.a);
  if (n > 0 && (!lu.isInvertible() || lu.rcond() < 1e-14)) {
    throw Error(ErrorKind::SingularTransformation, "I - (Ts/2) A is singular");
  }
  const RealMatrix m = n > 0 ? RealMatrix(lu.inverse()) : RealMatrix(0, 0);
  const double r = std::sqrt(ts);
  return {m * (id + h * sys.a), r * m * sys.b, r * sys.c * m, sys.d + h * sys.c * m * sys.b, ts};
}

}  // namespace ltr
