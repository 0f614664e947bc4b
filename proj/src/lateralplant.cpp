#include "mfcforge/lateralplant.hpp"

#include <algorithm>
#include <string>

namespace mfcforge {

void VehicleParams::validate() const {
  const double fields[] = {m, vx, Iz, Cf, Cr, lf, lr};
  const char* names[] = {"m", "vx", "Iz", "Cf", "Cr", "lf", "lr"};
  for (int i = 0; i < 7; ++i) {
    if (!(fields[i] > 0.0) || !std::isfinite(fields[i]))
      throw DomainError(std::string("vehicle parameter '") + names[i] + "' must be finite and > 0");
  }
}

VehicleParams VehicleParams::reference_car() {
  return {.m = 1372.0, .vx = 9.72, .Iz = 1990.0, .Cf = 37022.5, .Cr = 35900.0, .lf = 0.98, .lr = 1.48};
}

void StateSpace::validate() const {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw InputError("state space: A must be square");
  if (B.rows() != n) throw InputError("state space: B row count must match A");
  if (C.cols() != n) throw InputError("state space: C column count must match A");
  if (D.rows() != C.rows() || D.cols() != B.cols()) throw InputError("state space: D must be outputs x inputs");
  if (E.size() != 0 && E.rows() != n) throw InputError("state space: E row count must match A");
  if (ts && !(*ts > 0.0)) throw InputError("state space: sample time must be positive");
}

StateSpace build_lateral_ss(const VehicleParams& p) {
  if (p.vx == 0.0) throw DomainError("build_lateral_ss: vx = 0 makes the model singular");
  p.validate();
  const double cf2 = 2.0 * p.Cf;
  const double cr2 = 2.0 * p.Cr;

  StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(4, 4);
  ss.A(0, 1) = 1.0;
  ss.A(1, 1) = -(cf2 + cr2) / (p.m * p.vx);
  ss.A(1, 2) = (cf2 + cr2) / p.m;
  ss.A(1, 3) = (-cf2 * p.lf + cr2 * p.lr) / (p.m * p.vx);
  ss.A(2, 3) = 1.0;
  ss.A(3, 1) = (cr2 * p.lr - cf2 * p.lf) / (p.Iz * p.vx);
  ss.A(3, 2) = (cf2 * p.lf - cr2 * p.lr) / p.Iz;
  ss.A(3, 3) = (-cf2 * p.lf * p.lf - cr2 * p.lr * p.lr) / (p.Iz * p.vx);

  ss.B = Eigen::MatrixXd::Zero(4, 1);
  ss.B(1, 0) = cf2 / p.m;
  ss.B(3, 0) = cf2 * p.lf / p.Iz;

  ss.E = Eigen::MatrixXd::Zero(4, 1);
  ss.E(1, 0) = -(cf2 * p.lf - cr2 * p.lr) / (p.m * p.vx) - p.vx;
  ss.E(3, 0) = -(cf2 * p.lf * p.lf + cr2 * p.lr * p.lr) / (p.Iz * p.vx);

  ss.C = Eigen::MatrixXd::Zero(1, 4);
  ss.C(0, 0) = 1.0;
  ss.D = Eigen::MatrixXd::Zero(1, 1);
  return ss;
}

StateSpace zoh_discretize(const StateSpace& ss, double ts) {
  if (!(ts > 0.0) || !std::isfinite(ts)) throw DomainError("zoh_discretize: Ts must be positive");
  if (ss.is_discrete()) throw InputError("zoh_discretize: model is already discrete");
  ss.validate();
  const Eigen::Index n = ss.states();
  const Eigen::Index nb = ss.B.cols();
  const Eigen::Index ne = ss.E.size() == 0 ? 0 : ss.E.cols();
  const Eigen::Index width = n + nb + ne;

  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(width, width);
  aug.topLeftCorner(n, n) = ss.A * ts;
  aug.block(0, n, n, nb) = ss.B * ts;
  if (ne > 0) aug.block(0, n + nb, n, ne) = ss.E * ts;
  const Eigen::MatrixXd phi = matrix_exp(aug);

  StateSpace out;
  out.A = phi.topLeftCorner(n, n);
  out.B = phi.block(0, n, n, nb);
  out.E = ne > 0 ? Eigen::MatrixXd(phi.block(0, n + nb, n, ne)) : Eigen::MatrixXd();
  out.C = ss.C;
  out.D = ss.D;
  out.ts = ts;
  return out;
}

DiscreteTF ss_to_tf(const StateSpace& ss) {
  if (!ss.is_discrete()) throw InputError("ss_to_tf: expects a discrete model");
  ss.validate();
  const Eigen::Index n = ss.states();
  const Eigen::VectorXd b = ss.B.col(0);
  const Eigen::RowVectorXd c = ss.C.row(0);
  const double d = ss.D(0, 0);

  // det(zI - A) = z^n + a[n-1] z^(n-1) + ... + a[0];
  // adj(zI - A) = sum_k M_k z^(n-1-k), M_0 = I, M_k = A M_{k-1} + a[n-k] I.
  std::vector<double> a(n + 1, 0.0);
  a[n] = 1.0;
  std::vector<double> num(n + 1, 0.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    num[n - k] += c * m * b;
    const Eigen::MatrixXd am = ss.A * m;
    a[n - k] = -am.trace() / static_cast<double>(k);
    m = am + a[n - k] * Eigen::MatrixXd::Identity(n, n);
  }
  for (Eigen::Index k = 0; k <= n; ++k) num[k] += d * a[k];

  constexpr double kCleanup = 1e-12;
  const Poly den = Poly(a).cleaned(kCleanup);
  const Poly nump = Poly(num).cleaned(kCleanup);
  return {nump, den, *ss.ts};
}

DiscreteTF augment_with_filter_poles(const DiscreteTF& g, double filter_c, int order) {
  if (order != 1 && order != 2) throw DomainError("augment_with_filter_poles: order must be 1 or 2");
  if (!(filter_c >= 1.0)) throw DomainError("augment_with_filter_poles: C < 1 puts the filter pole outside the unit circle");
  const Poly filter{1.0 - filter_c, filter_c};
  Poly num = g.num() * Poly::monomial(order);
  Poly den = g.den() * filter.pow(order);
  const int common = std::min(num.lowOrderZeros(), den.lowOrderZeros());
  if (common > 0) {
    num = Poly(Poly::Coeffs(num.coeffs().tail(num.degree() + 1 - common)));
    den = Poly(Poly::Coeffs(den.coeffs().tail(den.degree() + 1 - common)));
  }
  return {num, den, g.ts()};
}

}  // namespace mfcforge
