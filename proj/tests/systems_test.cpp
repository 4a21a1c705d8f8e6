#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ltr/dynamic_systems.hpp"
#include "ltr/gimbal_model.hpp"
#include "ltr/lqgltr_design.hpp"
#include "ltr/parallel.hpp"
#include "ltr/robustness.hpp"
#include "ltr/text_io.hpp"
#include "oracles/expected_values.hpp"
#include "support.hpp"

using namespace ltr;
using testing::random_matrix;
using testing::random_stable;
using testing::relative_error;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TransferFunction tf(std::vector<double> num, std::vector<double> den) { return {num, den}; }

ComplexMatrix siso(Complex v) { return ComplexMatrix::Constant(1, 1, v); }

}  // namespace

TEST_CASE("tf_to_ss examples") {
  const StateSpace first = tf_to_ss(tf({1.0}, {1.0, 1.0}));
  CHECK(first.order() == 1);
  CHECK(first.a(0, 0) == doctest::Approx(-1.0));
  const StateSpace gain = tf_to_ss(tf({3.0}, {1.0}));
  CHECK(gain.order() == 0);
  CHECK(gain.d(0, 0) == 3.0);
  CHECK(tf_to_ss(axis_transfer_function(azimuth_params())).order() == 5);
  try {
    tf_to_ss(tf({1.0, 0.0, 0.0}, {1.0, 1.0}));
    FAIL("expected ImproperTransferFunction");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ImproperTransferFunction);
  }
}

TEST_CASE("realization round trip at 20 random frequencies") {
  Rng rng(31);
  const std::vector<TransferFunction> cases = {
      tf({2.0, 3.0, 1.0}, {1.0, 4.0, 5.0, 2.0}),
      tf({1.0, -2.0, 7.0}, {2.0, 1.0, 3.0}),
      axis_transfer_function(elevation_params()),
      make_sensitivity_weight(design1_weight_params()),
  };
  for (const TransferFunction& t : cases) {
    const StateSpace sys = tf_to_ss(t);
    for (int k = 0; k < 20; ++k) {
      const double w = std::pow(10.0, rng.uniform(-2.0, 4.0));
      CHECK(relative_error(evaluate_at(sys, w), siso(t.at_frequency(w))) <= 1e-8);
    }
  }
}

TEST_CASE("connection examples") {
  const StateSpace lag = tf_to_ss(tf({1.0}, {1.0, 1.0}));
  const StateSpace two = connect_series(lag, lag);
  const StateSpace integ = tf_to_ss(tf({1.0}, {1.0, 0.0}));
  const StateSpace closed = connect_feedback(integ, StateSpace::gain(RealMatrix::Ones(1, 1)));
  for (double w : {0.01, 0.3, 1.0, 7.0, 100.0}) {
    const Complex s(0.0, w);
    CHECK(relative_error(evaluate_at(two, w), siso(1.0 / ((s + 1.0) * (s + 1.0)))) <= 1e-8);
    CHECK(relative_error(evaluate_at(closed, w), siso(1.0 / (s + 1.0))) <= 1e-8);
  }
  const StateSpace g = build_mimo_model(azimuth_params(), elevation_params());
  CHECK(g.order() == 10);
  for (double w : log_grid({0.1, 1000.0, 10})) {
    const ComplexMatrix r = evaluate_at(g, w);
    CHECK(r(0, 1) == Complex(0.0));
    CHECK(r(1, 0) == Complex(0.0));
  }
}

TEST_CASE("interconnections match algebraic composition") {
  Rng rng(41);
  const auto random_system = [&](Eigen::Index n, Eigen::Index p, Eigen::Index m) {
    return StateSpace(random_stable(rng, n), random_matrix(rng, n, m), random_matrix(rng, p, n),
                      0.3 * random_matrix(rng, p, m));
  };
  const StateSpace g = random_system(4, 2, 3);
  const StateSpace h = random_system(3, 2, 2);
  const StateSpace k = random_system(2, 3, 2);
  const StateSpace par = random_system(3, 2, 3);
  for (int i = 0; i < 10; ++i) {
    const double w = std::pow(10.0, rng.uniform(-2.0, 3.0));
    const ComplexMatrix gw = evaluate_at(g, w);
    const ComplexMatrix hw = evaluate_at(h, w);
    const ComplexMatrix kw = evaluate_at(k, w);
    const ComplexMatrix pw = evaluate_at(par, w);
    CHECK(relative_error(evaluate_at(connect_series(g, h), w), hw * gw) <= 1e-8);
    CHECK(relative_error(evaluate_at(connect_parallel(g, par), w), gw + pw) <= 1e-8);
    CHECK(relative_error(evaluate_at(subtract(g, par), w), gw - pw) <= 1e-8);
    CHECK(relative_error(evaluate_at(connect_feedback(g, k), w), gw * (ComplexMatrix::Identity(3, 3) + kw * gw).inverse()) <= 1e-8);
    CHECK(relative_error(evaluate_at(connect_feedback(g, k, FeedbackSign::Positive), w),
                         gw * (ComplexMatrix::Identity(3, 3) - kw * gw).inverse()) <= 1e-8);
    const ComplexMatrix dg = evaluate_at(connect_diagonal(g, h), w);
    CHECK(relative_error(dg.topLeftCorner(2, 3), gw) <= 1e-12);
    CHECK(relative_error(dg.bottomRightCorner(2, 2), hw) <= 1e-12);
    CHECK(dg.topRightCorner(2, 2).norm() == 0.0);
  }
}

TEST_CASE("interconnection errors") {
  const StateSpace a = StateSpace::gain(RealMatrix::Ones(2, 3));
  const StateSpace b = StateSpace::gain(RealMatrix::Ones(3, 3));
  try {
    connect_series(a, b);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  try {
    connect_feedback(StateSpace::gain(RealMatrix::Ones(1, 1)), StateSpace::gain(-RealMatrix::Ones(1, 1)));
    FAIL("expected AlgebraicLoop");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AlgebraicLoop);
  }
}

TEST_CASE("frequency response examples") {
  const StateSpace lag = tf_to_ss(tf({1.0}, {1.0, 1.0}));
  const Complex v = evaluate_at(lag, 1.0)(0, 0);
  CHECK(std::abs(v) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::arg(v) * 180.0 / std::numbers::pi == doctest::Approx(-45.0).epsilon(1e-12));
  const StateSpace az = build_axis_model(azimuth_params());
  CHECK(dc_gain(az)(0, 0) == doctest::Approx(expected::az_dc_gain).epsilon(1e-10));
  CHECK(std::abs(evaluate_at(az, 1e-6)(0, 0)) == doctest::Approx(expected::az_dc_gain).epsilon(1e-6));
  const StateSpace pade = tf_to_ss(pade_factor(0.0045));
  for (double w : log_grid({0.1, 1000.0, 50})) {
    CHECK(std::abs(std::abs(evaluate_at(pade, w)(0, 0)) - 1.0) <= 1e-10);
    CHECK(std::abs(sigma_envelope(frequency_response(pade, {w})).front()(0) - 1.0) <= 1e-10);
  }
  const StateSpace integ = tf_to_ss(tf({1.0}, {1.0, 0.0}));
  try {
    evaluate_at(integ, 0.0);
    FAIL("expected SingularAtFrequency");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularAtFrequency);
  }
}

TEST_CASE("frequency response is independent of worker count") {
  const StateSpace g = build_mimo_model(azimuth_params(), elevation_params());
  const std::vector<double> grid = log_grid({});
  const FrequencyResponse serial = frequency_response(g, grid, 1);
  const FrequencyResponse threaded = frequency_response(g, grid, 4);
  REQUIRE(serial.values.size() == grid.size());
  bool identical = true;
  for (std::size_t i = 0; i < grid.size(); ++i) identical = identical && serial.values[i] == threaded.values[i];
  CHECK(identical);
}

TEST_CASE("log grids") {
  const std::vector<double> grid = log_grid({});
  CHECK(grid.size() == 1601);
  CHECK(grid.front() == doctest::Approx(kTwoPi * 0.1));
  CHECK(grid.back() == doctest::Approx(kTwoPi * 1000.0));
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  CHECK(log_grid_hz(1.0, 100.0, 3)[1] == doctest::Approx(kTwoPi * 10.0));
}

TEST_CASE("sigma envelope examples") {
  const StateSpace lag = tf_to_ss(tf({1.0}, {1.0, 2.0}));
  const std::vector<double> grid = log_grid({0.1, 100.0, 5});
  const std::vector<RealVector> s = sigma_envelope(frequency_response(lag, grid));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(s[i](0) == doctest::Approx(std::abs(evaluate_at(lag, grid[i])(0, 0))));
  }
  const StateSpace diag = connect_diagonal(lag, tf_to_ss(tf({5.0}, {1.0, 50.0})));
  const std::vector<RealVector> d = sigma_envelope(frequency_response(diag, grid));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ComplexMatrix r = evaluate_at(diag, grid[i]);
    CHECK(d[i](0) == doctest::Approx(std::max(std::abs(r(0, 0)), std::abs(r(1, 1)))));
  }
  const std::vector<RealVector> id =
      sigma_envelope(frequency_response(StateSpace::gain(RealMatrix::Identity(2, 2)), grid));
  for (const RealVector& v : id) CHECK((v - RealVector::Ones(2)).norm() < 1e-14);
}

TEST_CASE("hinf norm examples") {
  CHECK(hinf_norm(tf_to_ss(tf({1.0}, {1.0, 1.0}))) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(hinf_norm(StateSpace::gain(Eigen::Vector2d(2.0, 3.0).asDiagonal())) == 3.0);
  const StateSpace we = tf_to_ss(make_sensitivity_weight(design1_weight_params()));
  CHECK(dc_gain(we)(0, 0) == doctest::Approx(100.0).epsilon(1e-3));
  CHECK(hinf_norm(we, {{1e-4, 1e4, 400}, 1e-9}) == doctest::Approx(expected::we1_hinf).epsilon(1e-6));
  try {
    hinf_norm(tf_to_ss(tf({1.0}, {1.0, -1.0})));
    FAIL("expected UnstableSystem");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnstableSystem);
  }
}

TEST_CASE("hinf norm is invariant under similarity transforms") {
  Rng rng(53);
  const StateSpace sys(random_stable(rng, 6, 0.2), random_matrix(rng, 6, 2), random_matrix(rng, 2, 6),
                       RealMatrix::Zero(2, 2));
  const RealMatrix t = random_matrix(rng, 6, 6) + 3.0 * RealMatrix::Identity(6, 6);
  const double base = hinf_norm(sys);
  CHECK(hinf_norm(similarity_transform(sys, t)) == doctest::Approx(base).epsilon(1e-6));
  CHECK(hinf_norm(balance_states(sys)) == doctest::Approx(base).epsilon(1e-6));
}

TEST_CASE("S + T = I on the gimbal loop") {
  const testing::GimbalDesign& d = testing::gimbal_design();
  const LoopMaps maps = closed_loop_maps(d.plant, d.design.at(1e-4).compensator);
  double worst = 0.0;
  for (double w : log_grid({})) {
    const ComplexMatrix sum = evaluate_at(maps.s_o, w) + evaluate_at(maps.t_o, w);
    worst = std::max(worst, (sum - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("parallel_for visits each index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 100);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw Error(ErrorKind::InvalidParameters, "boom");
                  }),
                  Error);
}

TEST_CASE("state-space text round trip") {
  Rng rng(61);
  const StateSpace sys(random_stable(rng, 3), random_matrix(rng, 3, 2), random_matrix(rng, 2, 3),
                       random_matrix(rng, 2, 2));
  const DiscreteStateSpace dsys(0.5 * RealMatrix::Identity(2, 2), RealMatrix::Ones(2, 1),
                                RealMatrix::Ones(1, 2), RealMatrix::Zero(1, 1), 5e-4);
  std::stringstream ss;
  write_preamble(ss, "compensator", "00ff");
  write_state_space(ss, "K", sys);
  write_discrete_state_space(ss, "Kd", dsys);
  std::stringstream in(ss.str());
  CHECK(read_config_hash(in) == "00ff");
  std::stringstream in2(ss.str());
  const StateSpace back = read_state_space(in2, "K");
  CHECK(back.a == sys.a);
  CHECK(back.b == sys.b);
  CHECK(back.c == sys.c);
  CHECK(back.d == sys.d);
  std::stringstream in3(ss.str());
  const DiscreteStateSpace dback = read_discrete_state_space(in3, "Kd");
  CHECK(dback.a == dsys.a);
  CHECK(dback.sample_period == 5e-4);
  std::stringstream missing(ss.str());
  CHECK_THROWS_AS(read_state_space(missing, "Q"), Error);
  std::stringstream bad("begin statespace K\nmatrix A 1 1\nx\n");
  try {
    read_state_space(bad, "K");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
}

TEST_CASE("frequency response table layout") {
  const StateSpace g = StateSpace::gain(Eigen::Vector2d(1.0, 2.0).asDiagonal());
  std::stringstream ss;
  write_frequency_response(ss, frequency_response(g, {kTwoPi}));
  std::string header;
  std::getline(ss, header);
  CHECK(header == "frequency_hz re_11 im_11 re_12 im_12 re_21 im_21 re_22 im_22");
  std::string row;
  std::getline(ss, row);
  CHECK(row == "1 1 0 0 0 0 0 2 0");
}
