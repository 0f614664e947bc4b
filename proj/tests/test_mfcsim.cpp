#include "doctest.h"

#include <cmath>

#include "mfcforge/loopanalysis.hpp"
#include "mfcforge/mfcsim.hpp"
#include "support.hpp"

using namespace mfcforge;

namespace {

// Exact ZOH model of y'' = F + alpha u: x = (y, y'), disturbance column carries F.
StateSpace ultra_local_plant(double alpha, double ts) {
  StateSpace c;
  c.A = Eigen::Matrix2d{{0, 1}, {0, 0}};
  c.B = Eigen::Vector2d(0, alpha);
  c.E = Eigen::Vector2d(0, 1);
  c.C = Eigen::RowVector2d(1, 0);
  c.D = Eigen::MatrixXd::Zero(1, 1);
  return zoh_discretize(c, ts);
}

}  // namespace

TEST_CASE("filtered derivative recursion") {
  DerivativeFilter d{1.0, 0.1};
  CHECK(filtered_derivative_step(d, 1.0) == doctest::Approx(10.0));
  CHECK(filtered_derivative_step(d, 1.5) == doctest::Approx(5.0));

  DerivativeFilter c4{4.0, 0.1};
  double prev = filtered_derivative_step(c4, 1.0);
  for (int k = 0; k < 10; ++k) {
    const double y = filtered_derivative_step(c4, 1.0);
    CHECK(y == doctest::Approx(prev * 0.75));
    prev = y;
  }

  // impulse response equals long division of (1/Ts)(z - 1)/(C z + 1 - C)
  const double C = 2.5, ts = 0.05;
  DerivativeFilter f{C, ts};
  std::vector<double> h(20);
  for (int k = 0; k < 20; ++k) h[k] = filtered_derivative_step(f, k == 0 ? 1.0 : 0.0);
  // series in z^-1: num = (1 - z^-1)/Ts, den = C + (1 - C) z^-1
  std::vector<double> q(20, 0.0), rem(21, 0.0);
  rem[0] = 1.0 / ts;
  rem[1] = -1.0 / ts;
  for (int k = 0; k < 20; ++k) {
    q[k] = rem[k] / C;
    rem[k + 1] -= q[k] * (1.0 - C);
  }
  for (int k = 0; k < 20; ++k) CHECK(std::abs(h[k] - q[k]) < 1e-12 * std::max(1.0, std::abs(q[k])));
}

TEST_CASE("estimator and control law arithmetic") {
  UltraLocalState s(2, {1.0, 0.1});
  CHECK(s.stages.size() == 2);
  s.u_prev = 0.01;
  CHECK(f_estimate(s, 2.0, 100.0) == doctest::Approx(1.0));
  s.u_prev = 0.0;
  CHECK(f_estimate(s, 2.0, 100.0) == doctest::Approx(2.0));
  CHECK(ipd_law(0.0, 0.5, 0.0, {1.0, 0.0, 1.0, 2}, 0.0) == doctest::Approx(0.5));
  CHECK(ipd_law(0.7, 0.0, 0.0, {1.0, 1.0, 3.0, 2}, 0.7) == doctest::Approx(0.0));
  CHECK_THROWS_AS(ipd_law(0, 0, 0, {1, 1, 0.0, 2}, 0), DomainError);
  CHECK_THROWS_AS(UltraLocalState(3, {1.0, 0.1}), DomainError);
}

TEST_CASE("references") {
  const auto step = make_reference(step_reference(), 5, 0.1);
  for (double v : step) CHECK(v == 1.0);
  const auto smooth = smoothed_step_reference(0.5);
  CHECK(std::abs(smooth.value(5.0, 0.05) - 1.0) < 1e-3);
  CHECK(smooth.value(0.0, 0.05) == 0.0);
  const auto sharp = smoothed_step_reference(1e-4);
  CHECK(sharp.value(0.05, 0.05) == doctest::Approx(1.0));
  CHECK_THROWS_AS(smoothed_step_reference(0.0), DomainError);
  CHECK_THROWS_AS(smoothed_step_reference(-1.0), DomainError);
  // analytic derivatives vs central differences
  const double h = 1e-5;
  for (double t : {0.2, 0.7, 1.9}) {
    CHECK(smooth.derivative(t, 1, 0.05) ==
          doctest::Approx((smooth.value(t + h, 0.05) - smooth.value(t - h, 0.05)) / (2 * h)).epsilon(1e-6));
    CHECK(smooth.derivative(t, 2, 0.05) ==
          doctest::Approx((smooth.derivative(t + h, 1, 0.05) - smooth.derivative(t - h, 1, 0.05)) / (2 * h)).epsilon(1e-6));
  }
  CHECK(step_reference().derivative(1.0, 2, 0.1) == 0.0);
  const auto s = sampled_reference({0, 1, 3});
  CHECK(s.value(0.2, 0.1) == 3.0);
  CHECK(s.derivative(0.2, 1, 0.1) == doctest::Approx(20.0));
}

TEST_CASE("zero reference gives an identically zero trace") {
  const auto plant = support::reference_discrete();
  const auto trace =
      simulate_tracking(plant, support::published_controllers()[0], support::published_filter(), step_reference(0.0), 300);
  REQUIRE(trace.size() == 300);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    CHECK(trace.y[k] == 0.0);
    CHECK(trace.u[k] == 0.0);
  }
}

TEST_CASE("MFC runtime matches the linear iPD2 loop") {
  const auto plant = support::reference_discrete();
  const auto g = ss_to_tf(plant);
  const auto f = support::published_filter();
  for (const auto& gains : support::published_controllers()) {
    const auto mfc = simulate_tracking(plant, gains, f, step_reference(), 2000);
    const auto lin = step_response(controller_tf(gains, f), g, 2000);
    REQUIRE(mfc.size() == lin.size());
    double worst = 0;
    for (std::size_t k = 0; k < mfc.size(); ++k) worst = std::max(worst, std::abs(mfc.y[k] - lin.y[k]));
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("estimator recovers a constant disturbance on an exact ultra-local plant") {
  const double ts = 0.1, alpha = 1.0, F = 0.7;
  const auto plant = ultra_local_plant(alpha, ts);
  // error dynamics s^2 + Kd s + Kp with wn = 1, zeta = 1
  const IpdGains gains{1.0, 2.0, alpha, 2};
  const FilterConfig f{1.2, ts};
  const auto delta = char_poly(controller_tf(gains, f), ss_to_tf(plant)).toVector();
  REQUIRE(support::oracle_spectral_radius(delta) < 0.95);
  IpdController ctrl(gains, f);
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  double e = 0;
  for (int k = 0; k < 300; ++k) {
    const double y = plant.C.row(0).dot(x);
    e = 1.0 - y;
    const double u = ctrl.step(e, 0.0);
    x = plant.A * x + plant.B.col(0) * u + plant.E.col(0) * F;
  }
  CHECK(std::abs(ctrl.state().F_hat - F) < 1e-6);
  CHECK(std::abs(e) < 1e-6);
  const auto trace = simulate_tracking(plant, gains, f, step_reference(), 300, {.disturbance = F});
  CHECK(std::abs(trace.e.back()) < 1e-6);
}

TEST_CASE("simulation guards") {
  const auto plant = support::reference_discrete();
  const FilterConfig f = support::published_filter();
  // a large proportional gain destabilizes the loop
  const auto trace = simulate_tracking(plant, {50.0, 0.0, 1.0, 2}, f, step_reference(), 5000);
  CHECK(trace.diverged);
  CHECK(trace.size() < 5000);
  CHECK_THROWS_AS(simulate_tracking(plant, support::published_controllers()[0], {4.0, 0.1}, step_reference(), 10),
                  InputError);
  CHECK_THROWS_AS(simulate_tracking(build_lateral_ss(VehicleParams::reference_car()), support::published_controllers()[0],
                                    f, step_reference(), 10),
                  InputError);
}

TEST_CASE("simulation is deterministic") {
  const auto plant = support::reference_discrete();
  const auto a = simulate_tracking(plant, support::published_controllers()[1], support::published_filter(),
                                   smoothed_step_reference(), 500);
  const auto b = simulate_tracking(plant, support::published_controllers()[1], support::published_filter(),
                                   smoothed_step_reference(), 500);
  CHECK(a.y == b.y);
  CHECK(a.u == b.u);
}
