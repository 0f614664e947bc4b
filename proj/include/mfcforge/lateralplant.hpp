#pragma once

// Bicycle-model lateral error dynamics, zero-order-hold discretization and
// discrete transfer-function extraction.

#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "mfcforge/discrete_tf.hpp"

namespace mfcforge {

struct VehicleParams {
  double m = 0.0;   ///< mass [kg]
  double vx = 0.0;  ///< longitudinal speed [m/s]
  double Iz = 0.0;  ///< yaw inertia [kg m^2]
  double Cf = 0.0;  ///< front cornering stiffness [N/rad]
  double Cr = 0.0;  ///< rear cornering stiffness [N/rad]
  double lf = 0.0;  ///< CoG to front axle [m]
  double lr = 0.0;  ///< CoG to rear axle [m]

  /// Throws DomainError unless every field is finite and strictly positive.
  void validate() const;

  /// Passenger car used throughout the examples: 1372 kg at 9.72 m/s.
  static VehicleParams reference_car();
};

/// Linear state-space model. B holds the control input(s); E holds
/// disturbance inputs that take part in simulation but not in design.
struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;
  Eigen::MatrixXd E;
  std::optional<double> ts;  ///< sample time; empty for continuous time

  bool is_discrete() const { return ts.has_value(); }
  Eigen::Index states() const { return A.rows(); }

  /// Throws InputError on inconsistent dimensions or a non-positive sample time.
  void validate() const;
};

/// Matrix exponential by scaling and squaring with a 24-term Taylor series.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime> matrix_exp(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  const Scalar norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > Scalar(0.5)) squarings = static_cast<int>(std::ceil(std::log2(norm / Scalar(0.5))));
  const Mat scaled = a / std::ldexp(Scalar(1), squarings);
  Mat term = Mat::Identity(a.rows(), a.cols());
  Mat sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = (term * scaled) / Scalar(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Continuous lateral-error model with states (e_y, de_y, e_psi, de_psi),
/// steering input, lateral-error output and desired-yaw-rate disturbance in E.
StateSpace build_lateral_ss(const VehicleParams& params);

/// Zero-order-hold discretization of B and E via the augmented-matrix exponential.
StateSpace zoh_discretize(const StateSpace& ss, double ts);

/// N(z)/D(z) from the first input and first output using the Leverrier-Faddeev
/// resolvent recursion. Coefficients below 1e-12 of the largest are zeroed.
DiscreteTF ss_to_tf(const StateSpace& ss);

/// G(z) * z^order / (C z + 1 - C)^order, with common powers of z cancelled.
DiscreteTF augment_with_filter_poles(const DiscreteTF& g, double filter_c, int order);

}  // namespace mfcforge
