#pragma once

#include <cstddef>
#include <vector>

#include "ltr/numerics.hpp"

namespace ltr {

/// Continuous LTI system x' = A x + B u, y = C x + D u. Order 0 is a static gain.
struct StateSpace {
  RealMatrix a;
  RealMatrix b;
  RealMatrix c;
  RealMatrix d;

  StateSpace() = default;
  StateSpace(RealMatrix a_, RealMatrix b_, RealMatrix c_, RealMatrix d_);

  static StateSpace gain(const RealMatrix& d);

  [[nodiscard]] Eigen::Index order() const { return a.rows(); }
  [[nodiscard]] Eigen::Index inputs() const { return d.cols(); }
  [[nodiscard]] Eigen::Index outputs() const { return d.rows(); }
};

/// Discrete LTI system x[k+1] = A x[k] + B u[k], y[k] = C x[k] + D u[k].
struct DiscreteStateSpace {
  RealMatrix a;
  RealMatrix b;
  RealMatrix c;
  RealMatrix d;
  double sample_period = 0.0;

  DiscreteStateSpace() = default;
  DiscreteStateSpace(RealMatrix a_, RealMatrix b_, RealMatrix c_, RealMatrix d_, double ts);

  [[nodiscard]] Eigen::Index order() const { return a.rows(); }
  [[nodiscard]] Eigen::Index inputs() const { return d.cols(); }
  [[nodiscard]] Eigen::Index outputs() const { return d.rows(); }
};

/// Rational transfer function with coefficients in descending powers of s.
struct TransferFunction {
  std::vector<double> num;
  std::vector<double> den;

  [[nodiscard]] Complex evaluate(Complex s) const;
  [[nodiscard]] Complex at_frequency(double omega) const { return evaluate({0.0, omega}); }
  [[nodiscard]] double dc_gain() const { return evaluate(0.0).real(); }
  /// Limit of the response as |s| -> infinity; zero for strictly proper functions.
  [[nodiscard]] double high_frequency_gain() const;
};

TransferFunction operator*(const TransferFunction& lhs, const TransferFunction& rhs);

std::vector<double> poly_multiply(const std::vector<double>& p, const std::vector<double>& q);
Complex poly_evaluate(const std::vector<double>& p, Complex s);
/// Roots of a real polynomial through the companion matrix.
ComplexVector poly_roots(const std::vector<double>& p);

struct FrequencyResponse {
  std::vector<double> omega;  ///< rad/s, strictly ascending
  std::vector<ComplexMatrix> values;
};

struct FrequencyGridSpec {
  double f_lo_hz = 0.1;
  double f_hi_hz = 1000.0;
  int points_per_decade = 400;
};

/// Logarithmic grid in rad/s, both end points included.
std::vector<double> log_grid(const FrequencyGridSpec& spec);
std::vector<double> log_grid_hz(double f_lo_hz, double f_hi_hz, int points);

StateSpace tf_to_ss(const TransferFunction& tf);

/// u -> first -> second; the result maps u to second(first(u)).
StateSpace connect_series(const StateSpace& first, const StateSpace& second);
/// y = lhs u + rhs u.
StateSpace connect_parallel(const StateSpace& lhs, const StateSpace& rhs);
/// y = lhs u - rhs u.
StateSpace subtract(const StateSpace& lhs, const StateSpace& rhs);
StateSpace connect_diagonal(const StateSpace& first, const StateSpace& second);

enum class FeedbackSign { Negative, Positive };

/// Closed loop from r to y with y = G u and u = r -/+ K y.
StateSpace connect_feedback(const StateSpace& g, const StateSpace& k,
                            FeedbackSign sign = FeedbackSign::Negative);

StateSpace scale_output(const StateSpace& sys, double factor);

/// x = T z: returns (T^-1 A T, T^-1 B, C T, D).
StateSpace similarity_transform(const StateSpace& sys, const RealMatrix& t);

/// Diagonal power-of-two state scaling that equalizes row and column norms of
/// [A B; C 0]. The transfer function is unchanged.
StateSpace balance_states(const StateSpace& sys);

bool is_stable(const StateSpace& sys);

/// C (sI - A)^-1 B + D at a complex point s.
ComplexMatrix evaluate(const StateSpace& sys, Complex s);
/// Response at s = j omega; throws SingularAtFrequency when j omega is a pole.
ComplexMatrix evaluate_at(const StateSpace& sys, double omega);
/// Static gain -C A^-1 B + D.
RealMatrix dc_gain(const StateSpace& sys);

FrequencyResponse frequency_response(const StateSpace& sys, const std::vector<double>& omega,
                                     std::size_t workers = 1);

/// Response of a discrete system at z = exp(j omega Ts).
ComplexMatrix evaluate_at(const DiscreteStateSpace& sys, double omega);
FrequencyResponse frequency_response(const DiscreteStateSpace& sys,
                                     const std::vector<double>& omega);

/// Descending singular values at every grid point.
std::vector<RealVector> sigma_envelope(const FrequencyResponse& fr);

struct HinfOptions {
  FrequencyGridSpec band{};
  double relative_tolerance = 1e-6;
};

struct HinfResult {
  double value = 0.0;
  double omega = 0.0;  ///< attaining frequency, rad/s; +inf when attained at infinity
};

/// Peak gain by grid scan (including DC and infinity) with golden-section refinement.
HinfResult hinf_norm_peak(const StateSpace& sys, const HinfOptions& options = {});
inline double hinf_norm(const StateSpace& sys, const HinfOptions& options = {}) {
  return hinf_norm_peak(sys, options).value;
}

}  // namespace ltr
