#include "doctest.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "mfcforge/lateralplant.hpp"
#include "support.hpp"

using namespace mfcforge;
using support::cd;

namespace {

StateSpace random_system(int n) {
  StateSpace ss;
  ss.A = Eigen::MatrixXd::Random(n, n) * support::uniform(0.2, 3.0);
  ss.B = Eigen::MatrixXd::Random(n, 1);
  ss.C = Eigen::MatrixXd::Random(1, n);
  ss.D = Eigen::MatrixXd::Zero(1, 1);
  return ss;
}

cd resolvent(const StateSpace& ss, cd z) {
  const Eigen::Index n = ss.states();
  const Eigen::MatrixXcd m = z * Eigen::MatrixXcd::Identity(n, n) - ss.A.cast<cd>();
  const Eigen::VectorXcd x = m.partialPivLu().solve(ss.B.col(0).cast<cd>());
  return (ss.C.row(0).cast<cd>() * x)(0) + ss.D(0, 0);
}

}  // namespace

TEST_CASE("lateral model entries for the reference car") {
  const auto p = VehicleParams::reference_car();
  const auto ss = build_lateral_ss(p);
  REQUIRE(ss.A.rows() == 4);
  const double cf = 2 * 37022.5, cr = 2 * 35900.0;
  CHECK(ss.A(0, 1) == 1.0);
  CHECK(ss.A(1, 1) == doctest::Approx(-(cf + cr) / (1372 * 9.72)));
  CHECK(ss.A(1, 2) == doctest::Approx((cf + cr) / 1372));
  CHECK(ss.A(3, 3) == doctest::Approx(-(cf * 0.98 * 0.98 + cr * 1.48 * 1.48) / (1990 * 9.72)));
  CHECK(ss.B(1, 0) == doctest::Approx(cf / 1372));
  CHECK(ss.B(3, 0) == doctest::Approx(cf * 0.98 / 1990));
  CHECK(ss.C(0, 0) == 1.0);
  CHECK(ss.E.cols() == 1);
  CHECK_FALSE(ss.is_discrete());
}

TEST_CASE("vehicle parameter validation") {
  auto p = VehicleParams::reference_car();
  p.m = -1;
  CHECK_THROWS_AS(build_lateral_ss(p), DomainError);
  p = VehicleParams::reference_car();
  p.vx = 0;
  CHECK_THROWS_AS(build_lateral_ss(p), DomainError);
}

TEST_CASE("matrix exponential of a rotation generator") {
  Eigen::Matrix2d a;
  a << 0, 2.5, -2.5, 0;
  const Eigen::Matrix2d e = matrix_exp(a);
  CHECK(e(0, 0) == doctest::Approx(std::cos(2.5)).epsilon(1e-13));
  CHECK(e(0, 1) == doctest::Approx(std::sin(2.5)).epsilon(1e-13));
  CHECK(e(1, 0) == doctest::Approx(-std::sin(2.5)).epsilon(1e-13));
}

TEST_CASE("ZOH maps eigenvalues through exp(lambda Ts)") {
  for (int n = 0; n < 100; ++n) {
    const auto ss = random_system(support::uniform_int(1, 5));
    const double ts = support::uniform(0.01, 0.3);
    const auto d = zoh_discretize(ss, ts);
    REQUIRE(d.is_discrete());
    Eigen::EigenSolver<Eigen::MatrixXd> ec(ss.A), ed(d.A);
    for (Eigen::Index i = 0; i < ss.A.rows(); ++i) {
      const cd mapped = std::exp(ec.eigenvalues()(i) * ts);
      double best = INFINITY;
      for (Eigen::Index j = 0; j < d.A.rows(); ++j) best = std::min(best, std::abs(ed.eigenvalues()(j) - mapped));
      CHECK(best < 1e-9 * std::max(1.0, std::abs(mapped)));
    }
  }
}

TEST_CASE("ZOH of the double integrator") {
  StateSpace ss;
  ss.A = Eigen::Matrix2d{{0, 1}, {0, 0}};
  ss.B = Eigen::Vector2d(0, 1);
  ss.C = Eigen::RowVector2d(1, 0);
  ss.D = Eigen::MatrixXd::Zero(1, 1);
  const double ts = 0.1;
  const auto tf = ss_to_tf(zoh_discretize(ss, ts));
  // Ts^2 (z + 1) / (2 (z - 1)^2)
  CHECK(tf.den() == Poly{1, -2, 1});
  CHECK(tf.num()[1] == doctest::Approx(ts * ts / 2).epsilon(1e-12));
  CHECK(tf.num()[0] == doctest::Approx(ts * ts / 2).epsilon(1e-12));
}

TEST_CASE("transfer function agrees with the resolvent") {
  for (int n = 0; n < 50; ++n) {
    const auto d = zoh_discretize(random_system(support::uniform_int(1, 6)), support::uniform(0.01, 0.2));
    const auto tf = ss_to_tf(d);
    for (int i = 0; i < 5; ++i) {
      const cd z = std::polar(support::uniform(0.5, 2.0), support::uniform(0.0, 3.1));
      const cd want = resolvent(d, z);
      CHECK(std::abs(tf(z) - want) <= 1e-8 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("discretized reference plant") {
  const auto g = support::reference_plant();
  CHECK(g.den().degree() == 4);
  CHECK(g.den().leading() == 1.0);
  CHECK(g.ts() == 0.05);
  // two integrators: double pole at z = 1
  CHECK(std::abs(g.den()(1.0)) < 1e-12);
  CHECK(std::abs(g.den().derivative()(1.0)) < 1e-10);
  CHECK(g.num().degree() == 3);
}

TEST_CASE("augment_with_filter_poles") {
  const DiscreteTF g(Poly{1.0}, Poly{-0.5, 1.0}, 0.1);
  const auto a = augment_with_filter_poles(g, 2.0, 2);
  for (int i = 0; i < 5; ++i) {
    const cd z = std::polar(support::uniform(0.5, 2.0), support::uniform(0.0, 3.1));
    const cd f = z / (2.0 * z - 1.0);
    CHECK(std::abs(a(z) - g(z) * f * f) < 1e-12);
  }
  CHECK_THROWS_AS(augment_with_filter_poles(g, 0.5, 1), DomainError);
  CHECK_THROWS_AS(augment_with_filter_poles(g, 2.0, 3), DomainError);
  // C = 1 leaves the plant unchanged after cancelling z / z
  const auto same = augment_with_filter_poles(g, 1.0, 1);
  CHECK(same.num() == g.num());
  CHECK(same.den() == g.den());
}

TEST_CASE("state space validation") {
  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(ss.validate(), InputError);
  ss = random_system(2);
  CHECK_THROWS_AS(zoh_discretize(ss, -1.0), std::exception);
}
