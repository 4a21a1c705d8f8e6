#include <doctest.h>

#include <cmath>

#include "ltr/numerics.hpp"
#include "oracles/expected_values.hpp"
#include "support.hpp"

using namespace ltr;
using testing::random_matrix;
using testing::random_stable;

namespace {

RealMatrix scalar(double v) { return RealMatrix::Constant(1, 1, v); }

/// Gram-matrix oracle: square roots of the eigenvalues of M^H M, descending.
RealVector gram_singular_values(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.adjoint() * m);
  RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().reverse();
  return ev.head(std::min(m.rows(), m.cols()));
}

ComplexMatrix random_complex(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  return random_matrix(rng, rows, cols).cast<Complex>() +
         Complex(0.0, 1.0) * random_matrix(rng, rows, cols).cast<Complex>();
}

}  // namespace

TEST_CASE("lyapunov scalar and decoupled examples") {
  CHECK(solve_lyapunov(scalar(-1.0), scalar(2.0)).x(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  const LyapunovSolution s = solve_lyapunov(-RealMatrix::Identity(2, 2), RealMatrix::Identity(2, 2));
  CHECK((s.x - 0.5 * RealMatrix::Identity(2, 2)).norm() < 1e-14);
  CHECK(s.report.converged);
}

TEST_CASE("lyapunov random stable order 8 with Q = C'C") {
  Rng rng(11);
  const RealMatrix a = random_stable(rng, 8);
  const RealMatrix c = random_matrix(rng, 3, 8);
  const LyapunovSolution s = solve_lyapunov(a, c.transpose() * c);
  CHECK(s.report.residual_norm <= 1e-9);
  CHECK(lyapunov_residual(a, s.x, c.transpose() * c) <= 1e-9);
  CHECK((s.x - s.x.transpose()).norm() <= 1e-12 * s.x.norm());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(s.x);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
}

TEST_CASE("lyapunov rejects unstable and mismatched operands") {
  try {
    solve_lyapunov(scalar(0.5), scalar(1.0));
    FAIL("expected NotStable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotStable);
  }
  try {
    solve_lyapunov(-RealMatrix::Identity(2, 2), RealMatrix::Identity(3, 3));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("care scalar example") {
  const CareSolution s = solve_care(scalar(-1.0), scalar(1.0), scalar(1.0), scalar(1.0));
  CHECK(s.x(0, 0) == doctest::Approx(expected::care_scalar).epsilon(1e-12));
  CHECK(s.report.converged);
  CHECK(s.report.residual_norm <= 1e-8);
}

TEST_CASE("care with Q = 0 and stable A is zero") {
  Rng rng(3);
  const RealMatrix a = random_stable(rng, 4);
  const CareSolution s = solve_care(a, random_matrix(rng, 4, 2), RealMatrix::Zero(4, 4),
                                    RealMatrix::Identity(2, 2));
  CHECK(s.x.norm() < 1e-12);
}

TEST_CASE("care on an unstable plant is stabilizing") {
  Rng rng(5);
  RealMatrix a = random_matrix(rng, 6, 6);
  a += (1.0 - spectral_abscissa(a)) * RealMatrix::Identity(6, 6);  // abscissa +1
  const RealMatrix b = random_matrix(rng, 6, 2);
  const RealMatrix r = RealMatrix::Identity(2, 2);
  const CareSolution s = solve_care(a, b, RealMatrix::Identity(6, 6), r);
  CHECK(care_residual(a, b, RealMatrix::Identity(6, 6), r, s.x) <= 1e-8);
  CHECK(is_hurwitz(a - b * r.inverse() * b.transpose() * s.x));
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(s.x);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("care error categories") {
  const RealMatrix a = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  const RealMatrix b = (RealMatrix(2, 1) << 0.0, 1.0).finished();
  try {
    solve_care(a, b, RealMatrix::Identity(2, 2), scalar(1.0));
    FAIL("expected NotStabilizable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotStabilizable);
  }
  const RealMatrix b_full = RealMatrix::Identity(2, 2);
  const RealMatrix q = Eigen::Vector2d(0.0, 1.0).asDiagonal();
  try {
    solve_care(a, b_full, q, RealMatrix::Identity(2, 2));
    FAIL("expected NotDetectable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotDetectable);
  }
}

TEST_CASE("care scalar solution grows with Q") {
  double last = -1.0;
  for (double q : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0}) {
    const double x = solve_care(scalar(-1.0), scalar(1.0), scalar(q), scalar(1.0)).x(0, 0);
    CHECK(x == doctest::Approx(-1.0 + std::sqrt(1.0 + q)).epsilon(1e-12));
    CHECK(x > last);
    last = x;
  }
}

TEST_CASE("riccati and lyapunov residuals on 100 random stable instances") {
  Rng rng(2024);
  double worst_lyap = 0.0;
  double worst_care = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index n = 1 + k % 20;
    const RealMatrix a = random_stable(rng, n, 0.1);
    const RealMatrix c = random_matrix(rng, 2, n);
    const RealMatrix q = c.transpose() * c + 1e-3 * RealMatrix::Identity(n, n);
    const LyapunovSolution l = solve_lyapunov(a, q);
    worst_lyap = std::max(worst_lyap, lyapunov_residual(a, l.x, q));
    const RealMatrix b = random_matrix(rng, n, 2);
    const CareSolution s = solve_care(a, b, q, RealMatrix::Identity(2, 2));
    worst_care = std::max(worst_care, care_residual(a, b, q, RealMatrix::Identity(2, 2), s.x));
    CHECK(s.report.converged);
  }
  CHECK(worst_lyap <= 1e-9);
  CHECK(worst_care <= 1e-8);
}

TEST_CASE("svd examples") {
  const RealVector id = svd_values(ComplexMatrix::Identity(2, 2));
  CHECK(id(0) == doctest::Approx(1.0));
  CHECK(id(1) == doctest::Approx(1.0));
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = Complex(0.0, 4.0);
  const RealVector s = svd_values(d);
  CHECK(s(0) == doctest::Approx(4.0));
  CHECK(s(1) == doctest::Approx(3.0));
  CHECK(svd_values(ComplexMatrix::Ones(3, 2)).size() == 2);
}

TEST_CASE("svd agrees with the Gram eigenvalue oracle") {
  Rng rng(17);
  for (int k = 0; k < 50; ++k) {
    const ComplexMatrix m = random_complex(rng, 2 + k % 3, 2 + (k / 3) % 3);
    CHECK((svd_values(m) - gram_singular_values(m)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("svd of unitary matrices and scaled matrices") {
  Rng rng(23);
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix m = random_complex(rng, 4, 4);
    const ComplexMatrix q = Eigen::HouseholderQR<ComplexMatrix>(m).householderQ();
    CHECK((svd_values(q) - RealVector::Ones(4)).cwiseAbs().maxCoeff() <= 1e-10);
    const RealVector base = svd_values(m);
    for (Complex c : {Complex(2.0), Complex(-1.0), Complex(0.0, 1.0)}) {
      CHECK((svd_values(c * m) - std::abs(c) * base).cwiseAbs().maxCoeff() <= 1e-10 * base(0));
    }
  }
}

TEST_CASE("non-finite inputs are rejected") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = std::nan("");
  CHECK_THROWS_AS(svd_values(m), Error);
  RealMatrix a = -RealMatrix::Identity(2, 2);
  a(1, 0) = INFINITY;
  CHECK_THROWS_AS(solve_lyapunov(a, RealMatrix::Identity(2, 2)), Error);
}
