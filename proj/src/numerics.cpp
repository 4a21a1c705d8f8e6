#include "ltr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace ltr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotStable: return "NotStable";
    case ErrorKind::NotStabilizable: return "NotStabilizable";
    case ErrorKind::NotDetectable: return "NotDetectable";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::ImproperTransferFunction: return "ImproperTransferFunction";
    case ErrorKind::AlgebraicLoop: return "AlgebraicLoop";
    case ErrorKind::SingularAtFrequency: return "SingularAtFrequency";
    case ErrorKind::UnstableSystem: return "UnstableSystem";
    case ErrorKind::UnstableClosedLoop: return "UnstableClosedLoop";
    case ErrorKind::InvalidParameters: return "InvalidParameters";
    case ErrorKind::NearSingularGramian: return "NearSingularGramian";
    case ErrorKind::SingularTransformation: return "SingularTransformation";
    case ErrorKind::NumericalBlowup: return "NumericalBlowup";
    case ErrorKind::InsufficientCycles: return "InsufficientCycles";
    case ErrorKind::DivergedFilter: return "DivergedFilter";
    case ErrorKind::SingularInertia: return "SingularInertia";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool all_finite(const RealMatrix& m) { return m.allFinite(); }

bool all_finite(const ComplexMatrix& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

ComplexVector eigenvalues(const RealMatrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "eigenvalues of a non-square matrix");
  }
  if (a.size() == 0) return ComplexVector(0);
  if (!a.allFinite()) throw Error(ErrorKind::NonFiniteInput, "eigenvalues: non-finite entries");
  Eigen::EigenSolver<RealMatrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "eigenvalue iteration did not converge");
  }
  return solver.eigenvalues();
}

double spectral_abscissa(const RealMatrix& a) {
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  return eigenvalues(a).real().maxCoeff();
}

bool is_hurwitz(const RealMatrix& a, double margin) {
  return spectral_abscissa(a) < -margin;
}

namespace {

void require_square(const RealMatrix& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " must be square, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

// Column-major vec(): vec(A X + X A') = (I (x) A + A (x) I) vec(X).
RealMatrix kronecker_sum(const RealMatrix& a) {
  const Eigen::Index n = a.rows();
  RealMatrix k = RealMatrix::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k.block(j * n, j * n, n, n) += a;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a(i, j) == 0.0) continue;
      k.block(i * n, j * n, n, n).diagonal().array() += a(i, j);
    }
  }
  return k;
}

bool has_full_rank(const ComplexMatrix& m, double rel_tol) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const RealVector s = svd.singularValues();
  const Eigen::Index needed = std::min(m.rows(), m.cols());
  if (s.size() < needed || needed == 0) return needed == 0;
  return s(needed - 1) > rel_tol * std::max(1.0, s(0));
}

// PBH tests restricted to closed right-half-plane modes.
bool pbh_stabilizable(const RealMatrix& a, const RealMatrix& b) {
  const ComplexVector ev = eigenvalues(a);
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k).real() < 0.0) continue;
    ComplexMatrix pencil(n, n + b.cols());
    pencil.leftCols(n) = a.cast<Complex>() - ev(k) * ComplexMatrix::Identity(n, n);
    pencil.rightCols(b.cols()) = b.cast<Complex>();
    if (!has_full_rank(pencil, 1e-10)) return false;
  }
  return true;
}

RealMatrix psd_square_root_rows(const RealMatrix& q) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(symmetrize(q));
  const RealVector lam = es.eigenvalues().cwiseMax(0.0);
  return (es.eigenvectors() * lam.cwiseSqrt().asDiagonal()).transpose();
}

RealMatrix pseudo_inverse_symmetric(const RealMatrix& z) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(symmetrize(z));
  const RealVector lam = es.eigenvalues();
  const double cutoff = 1e-10 * lam.cwiseAbs().maxCoeff();
  RealVector inv = RealVector::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i)) > cutoff) inv(i) = 1.0 / lam(i);
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

RealMatrix initial_stabilizing_gain(const RealMatrix& a, const RealMatrix& b,
                                    const Eigen::LLT<RealMatrix>& r_llt, const Tolerances& tol) {
  if (is_hurwitz(a, tol.stability_margin)) return RealMatrix::Zero(b.cols(), a.rows());
  // Shift the spectrum into the right half-plane and apply Bass' construction.
  const double shift = a.norm() + 1.0;
  const RealMatrix shifted = -(a + shift * RealMatrix::Identity(a.rows(), a.cols()));
  const RealMatrix g = b * r_llt.solve(b.transpose());
  const LyapunovSolution z = solve_lyapunov(shifted, 2.0 * g, tol);
  RealMatrix k = r_llt.solve(b.transpose()) * pseudo_inverse_symmetric(z.x);
  if (!is_hurwitz(a - b * k, tol.stability_margin)) {
    throw Error(ErrorKind::NotStabilizable,
                "could not construct an initial stabilizing gain; (A, B) is not stabilizable");
  }
  return k;
}

}  // namespace

double lyapunov_residual(const RealMatrix& a, const RealMatrix& x, const RealMatrix& q) {
  return (a * x + x * a.transpose() + q).norm() / std::max(1.0, q.norm());
}

LyapunovSolution solve_lyapunov(const RealMatrix& a, const RealMatrix& q, const Tolerances& tol) {
  require_square(a, "Lyapunov A");
  require_square(q, "Lyapunov Q");
  if (a.rows() != q.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "Lyapunov A and Q differ in size");
  }
  if (!a.allFinite() || !q.allFinite()) {
    throw Error(ErrorKind::NonFiniteInput, "Lyapunov inputs contain non-finite entries");
  }
  const Eigen::Index n = a.rows();
  LyapunovSolution out;
  if (n == 0) {
    out.x = RealMatrix(0, 0);
    out.report = {0.0, 0, true};
    return out;
  }
  const double abscissa = spectral_abscissa(a);
  if (!(abscissa < 0.0)) {
    std::ostringstream os;
    os << "Lyapunov operator requires a Hurwitz A; spectral abscissa = " << abscissa;
    throw Error(ErrorKind::NotStable, os.str());
  }

  const RealMatrix k = kronecker_sum(a);
  const Eigen::PartialPivLU<RealMatrix> lu(k);
  const RealVector rhs = -Eigen::Map<const RealVector>(q.data(), n * n);
  RealVector vx = lu.solve(rhs);
  // One step of iterative refinement.
  vx += lu.solve(rhs - k * vx);

  out.x = symmetrize(Eigen::Map<const RealMatrix>(vx.data(), n, n));
  out.report.iterations = 1;
  out.report.residual_norm = lyapunov_residual(a, out.x, q);
  out.report.converged = out.report.residual_norm <= tol.lyapunov_residual;
  return out;
}

double care_residual(const RealMatrix& a, const RealMatrix& b, const RealMatrix& q,
                     const RealMatrix& r, const RealMatrix& x) {
  const RealMatrix ax = a.transpose() * x;
  const RealMatrix xgx = x * b * r.llt().solve(b.transpose() * x);
  const RealMatrix res = ax + ax.transpose() - xgx + q;
  const double scale = 2.0 * ax.norm() + xgx.norm() + q.norm();
  return res.norm() / std::max(scale, std::numeric_limits<double>::min());
}

CareSolution solve_care(const RealMatrix& a, const RealMatrix& b, const RealMatrix& q,
                        const RealMatrix& r, const Tolerances& tol) {
  require_square(a, "CARE A");
  require_square(q, "CARE Q");
  require_square(r, "CARE R");
  const Eigen::Index n = a.rows();
  if (b.rows() != n || q.rows() != n || r.rows() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "CARE operand dimensions are inconsistent");
  }
  if (!a.allFinite() || !b.allFinite() || !q.allFinite() || !r.allFinite()) {
    throw Error(ErrorKind::NonFiniteInput, "CARE inputs contain non-finite entries");
  }
  const Eigen::LLT<RealMatrix> r_llt(symmetrize(r));
  if (r_llt.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidParameters, "CARE R must be symmetric positive definite");
  }

  CareSolution out;
  if (n == 0) {
    out.x = RealMatrix(0, 0);
    out.report = {0.0, 0, true};
    return out;
  }
  if (!pbh_stabilizable(a, b)) {
    throw Error(ErrorKind::NotStabilizable, "(A, B) has an uncontrollable closed right-half-plane mode");
  }
  // Detectability of (Q^1/2, A) is the dual PBH test.
  if (!pbh_stabilizable(a.transpose(), psd_square_root_rows(q).transpose())) {
    throw Error(ErrorKind::NotDetectable, "(Q^1/2, A) has an unobservable closed right-half-plane mode");
  }

  const RealMatrix qs = symmetrize(q);
  RealMatrix k = initial_stabilizing_gain(a, b, r_llt, tol);
  RealMatrix best_x;
  double best_residual = std::numeric_limits<double>::infinity();
  double previous = best_residual;
  int without_progress = 0;

  for (int it = 1; it <= tol.care_max_iterations; ++it) {
    const RealMatrix closed = a - b * k;
    const RealMatrix rhs = qs + k.transpose() * r * k;
    LyapunovSolution step;
    try {
      step = solve_lyapunov(closed.transpose(), rhs, tol);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotStable) throw;
      throw Error(ErrorKind::ConvergenceFailure,
                  "Newton-Kleinman iterate lost stability; best residual " +
                      std::to_string(best_residual));
    }
    k = r_llt.solve(b.transpose() * step.x);
    const double residual = care_residual(a, b, qs, r, step.x);
    out.report.iterations = it;
    if (residual < best_residual) {
      best_residual = residual;
      best_x = step.x;
      without_progress = 0;
    } else {
      ++without_progress;
    }
    // Quadratic convergence has ended once a step no longer gains a decade.
    const bool contracting = residual < 0.1 * previous;
    previous = residual;
    if (best_residual <= tol.care_residual && !contracting) break;
    // The residual is not monotone along Newton iterates, so only a long stall stops early.
    if (without_progress >= 10) break;
  }

  out.x = symmetrize(best_x);
  out.report.residual_norm = best_residual;
  out.report.converged = best_residual <= tol.care_residual;
  if (!out.report.converged) {
    throw Error(ErrorKind::ConvergenceFailure,
                "Newton-Kleinman did not reach the residual tolerance; best residual " +
                    std::to_string(best_residual));
  }
  const RealMatrix closed = a - b * r_llt.solve(b.transpose() * out.x);
  if (!is_hurwitz(closed)) {
    throw Error(ErrorKind::ConvergenceFailure, "CARE solution is not stabilizing");
  }
  return out;
}

RealVector svd_values(const ComplexMatrix& m) {
  if (!all_finite(m)) throw Error(ErrorKind::NonFiniteInput, "svd_values: non-finite entries");
  if (m.size() == 0) return RealVector(0);
  if (m.rows() == 1 && m.cols() == 1) return RealVector::Constant(1, std::abs(m(0, 0)));
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues();
}

}  // namespace ltr
