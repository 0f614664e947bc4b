#pragma once

// Real polynomials with ascending coefficients, unit-circle (Tchebychev)
// decomposition, and root location.

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mfcforge/errors.hpp"

namespace mfcforge {

/// Polynomial with real coefficients; coefficient k multiplies x^k.
/// Trailing (highest-power) exact zeros are trimmed on construction so the
/// zero polynomial has no coefficients and degree -1.
template <typename Scalar>
class Polynomial {
 public:
  using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Polynomial() = default;
  explicit Polynomial(Coeffs coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<Scalar> coeffs) : coeffs_(static_cast<Eigen::Index>(coeffs.size())) {
    std::copy(coeffs.begin(), coeffs.end(), coeffs_.data());
    trim();
  }
  explicit Polynomial(const std::vector<Scalar>& coeffs)
      : coeffs_(Eigen::Map<const Coeffs>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()))) {
    trim();
  }

  static Polynomial constant(Scalar c) { return Polynomial{c}; }
  static Polynomial monomial(int power, Scalar c = Scalar(1)) {
    Coeffs v = Coeffs::Zero(power + 1);
    v(power) = c;
    return Polynomial(std::move(v));
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool isZero() const { return coeffs_.size() == 0; }
  const Coeffs& coeffs() const { return coeffs_; }
  std::vector<Scalar> toVector() const { return {coeffs_.data(), coeffs_.data() + coeffs_.size()}; }

  /// Coefficient of x^k; zero beyond the degree.
  Scalar operator[](int k) const { return (k >= 0 && k <= degree()) ? coeffs_(k) : Scalar(0); }
  Scalar leading() const { return isZero() ? Scalar(0) : coeffs_(degree()); }
  Scalar maxAbsCoeff() const { return isZero() ? Scalar(0) : coeffs_.cwiseAbs().maxCoeff(); }

  /// Horner evaluation; works for real and complex arguments.
  template <typename T>
  T operator()(const T& x) const {
    T acc(0);
    for (int k = degree(); k >= 0; --k) acc = acc * x + T(coeffs_(k));
    return acc;
  }

  Polynomial derivative() const {
    if (degree() < 1) return {};
    Coeffs d(degree());
    for (int k = 1; k <= degree(); ++k) d(k - 1) = Scalar(k) * coeffs_(k);
    return Polynomial(std::move(d));
  }

  Polynomial monic() const {
    if (isZero()) throw DomainError("monic: zero polynomial");
    return Polynomial(Coeffs(coeffs_ / leading()));
  }

  /// Zero every coefficient below rel * max|coeff|, then retrim.
  Polynomial cleaned(Scalar rel) const {
    if (isZero()) return {};
    const Scalar cut = rel * maxAbsCoeff();
    Coeffs v = coeffs_;
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (std::abs(v(k)) < cut) v(k) = Scalar(0);
    return Polynomial(std::move(v));
  }

  /// x^deg p(1/x): coefficient order reversed, then trimmed.
  Polynomial reversed() const { return Polynomial(Coeffs(coeffs_.reverse())); }

  /// Number of exact zero coefficients at the low end (multiplicity of the root at 0).
  int lowOrderZeros() const {
    int n = 0;
    while (n <= degree() && coeffs_(n) == Scalar(0)) ++n;
    return n;
  }

  Polynomial& operator+=(const Polynomial& o) {
    const Eigen::Index n = std::max(coeffs_.size(), o.coeffs_.size());
    Coeffs v = Coeffs::Zero(n);
    v.head(coeffs_.size()) += coeffs_;
    v.head(o.coeffs_.size()) += o.coeffs_;
    coeffs_ = std::move(v);
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) { return *this += -o; }
  Polynomial& operator*=(Scalar s) {
    coeffs_ *= s;
    trim();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(const Polynomial& a) { return Polynomial(Coeffs(-a.coeffs_)); }
  friend Polynomial operator*(Polynomial a, Scalar s) { return a *= s; }
  friend Polynomial operator*(Scalar s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.isZero() || b.isZero()) return {};
    Coeffs v = Coeffs::Zero(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (Eigen::Index i = 0; i < a.coeffs_.size(); ++i)
      v.segment(i, b.coeffs_.size()) += a.coeffs_(i) * b.coeffs_;
    return Polynomial(std::move(v));
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.coeffs_.size() == b.coeffs_.size() && a.coeffs_ == b.coeffs_;
  }

  Polynomial pow(int e) const {
    Polynomial r{Scalar(1)};
    for (int i = 0; i < e; ++i) r *= *this;
    return r;
  }

 private:
  void trim() {
    Eigen::Index n = coeffs_.size();
    while (n > 0 && coeffs_(n - 1) == Scalar(0)) --n;
    coeffs_.conservativeResize(n);
  }

  Coeffs coeffs_;
};

using Poly = Polynomial<double>;

/// Unit-circle decomposition p(e^{j theta}) = R(u) + j sqrt(1-u^2) T(u), u = -cos(theta).
template <typename Scalar>
struct TchebyForm {
  Polynomial<Scalar> R;
  Polynomial<Scalar> T;
};

/// Generalized Tchebychev pair (c_k, s_k) with c_k(u) = cos(k theta),
/// s_k(u) = sin(k theta) / sin(theta) and u = -cos(theta).
template <typename Scalar = double>
std::pair<Polynomial<Scalar>, Polynomial<Scalar>> cheb_pair(int k) {
  if (k < 1) throw DomainError("cheb_pair: k must be >= 1");
  using P = Polynomial<Scalar>;
  const P u{Scalar(0), Scalar(1)};
  const P one_minus_u2{Scalar(1), Scalar(0), Scalar(-1)};
  P c = -u;
  P s{Scalar(1)};
  for (int i = 1; i < k; ++i) {
    P c_next = -(u * c) - one_minus_u2 * s;
    P s_next = c - u * s;
    c = std::move(c_next);
    s = std::move(s_next);
  }
  return {c, s};
}

template <typename Scalar>
TchebyForm<Scalar> tcheby_form(const Polynomial<Scalar>& p) {
  if (p.isZero()) throw DomainError("tcheby_form: zero polynomial");
  using P = Polynomial<Scalar>;
  const P u{Scalar(0), Scalar(1)};
  const P one_minus_u2{Scalar(1), Scalar(0), Scalar(-1)};
  P R{p[0]};
  P T;
  P c = -u;
  P s{Scalar(1)};
  for (int k = 1; k <= p.degree(); ++k) {
    R += p[k] * c;
    T += p[k] * s;
    P c_next = -(u * c) - one_minus_u2 * s;
    P s_next = c - u * s;
    c = std::move(c_next);
    s = std::move(s_next);
  }
  return {R, T};
}

/// All complex roots, computed as eigenvalues of the companion matrix and
/// polished with a few Newton steps.
template <typename Scalar>
std::vector<std::complex<Scalar>> roots(const Polynomial<Scalar>& p) {
  const int n = p.degree();
  if (n < 1) throw DomainError("roots: polynomial must have degree >= 1");
  using Cx = std::complex<Scalar>;
  std::vector<Cx> out;
  out.reserve(n);
  // Roots at the origin are exact; strip them so the companion matrix stays well scaled.
  const int zeros = p.lowOrderZeros();
  for (int i = 0; i < zeros; ++i) out.emplace_back(Scalar(0), Scalar(0));
  const int m = n - zeros;
  if (m == 0) return out;
  typename Polynomial<Scalar>::Coeffs q = p.coeffs().segment(zeros, m + 1) / p.leading();
  if (m == 1) {
    out.emplace_back(-q(0), Scalar(0));
    return out;
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> companion =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(m, m);
  companion.bottomLeftCorner(m - 1, m - 1).setIdentity();
  companion.col(m - 1) = -q.head(m);
  Eigen::EigenSolver<decltype(companion)> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("roots: eigenvalue iteration failed");
  const Polynomial<Scalar> dp = p.derivative();
  for (Eigen::Index i = 0; i < m; ++i) {
    Cx z = solver.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      const Cx f = p(z);
      const Cx df = dp(z);
      if (std::abs(df) == Scalar(0)) break;
      const Cx next = z - f / df;
      if (!(std::abs(p(next)) < std::abs(f))) break;
      z = next;
    }
    // Keep real roots real.
    if (solver.eigenvalues()(i).imag() == Scalar(0)) z = Cx(z.real(), Scalar(0));
    out.push_back(z);
  }
  return out;
}

/// Number of roots strictly inside the unit circle. Throws MarginalRootError if
/// any root has ||root| - 1| < tol. Constants have no roots.
template <typename Scalar>
int count_in_unit_disc(const Polynomial<Scalar>& p, Scalar tol = Scalar(1e-9)) {
  if (p.isZero()) throw DomainError("count_in_unit_disc: zero polynomial");
  if (p.degree() < 1) return 0;
  int count = 0;
  for (const auto& r : roots(p)) {
    const Scalar mag = std::abs(r);
    if (std::abs(mag - Scalar(1)) < tol) throw MarginalRootError("count_in_unit_disc: root on the unit circle");
    if (mag < Scalar(1)) ++count;
  }
  return count;
}

/// Real zeros of odd multiplicity in the open interval (lo, hi), strictly
/// increasing. Zeros are located by sign changes between bracket nodes: a
/// uniform grid refined with separators between approximate roots, so nearly
/// coincident real roots that eigenvalue noise turns complex are still found.
template <typename Scalar>
std::vector<Scalar> odd_zeros_in_open_interval(const Polynomial<Scalar>& p, std::type_identity_t<Scalar> lo,
                                               std::type_identity_t<Scalar> hi) {
  if (!(lo < hi)) throw DomainError("odd_zeros_in_open_interval: lo must be < hi");
  std::vector<Scalar> result;
  if (p.degree() < 1) return result;

  constexpr int kGrid = 256;
  const Scalar width = hi - lo;
  const Scalar edge = Scalar(1e-9) * width;
  std::vector<Scalar> cand;
  const Polynomial<Scalar> q = p.cleaned(Scalar(1e-13));
  if (q.degree() >= 1) {
    for (const auto& r : roots(q)) {
      if (std::abs(r.imag()) > Scalar(0.25) * width) continue;
      if (r.real() > lo && r.real() < hi) cand.push_back(r.real());
    }
  }
  std::sort(cand.begin(), cand.end());

  std::vector<Scalar> nodes;
  nodes.reserve(kGrid + cand.size() + 2);
  for (int i = 0; i <= kGrid; ++i) nodes.push_back(lo + edge + (width - 2 * edge) * Scalar(i) / Scalar(kGrid));
  for (std::size_t i = 0; i + 1 < cand.size(); ++i) nodes.push_back((cand[i] + cand[i + 1]) / 2);
  std::sort(nodes.begin(), nodes.end());

  auto sgn = [&](Scalar x) {
    const Scalar v = p(x);
    return (v > 0) - (v < 0);
  };
  Scalar a = nodes.front();
  int sa = sgn(a);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const Scalar node = nodes[i];
    const int sn = sgn(node);
    if (sn == 0) continue;
    if (sa == 0) {
      a = node;
      sa = sn;
      continue;
    }
    if (sn != sa) {
      Scalar x = a;
      Scalar b = node;
      while (b - x > Scalar(1e-13) * std::max(Scalar(1), std::abs(b))) {
        const Scalar mid = (x + b) / 2;
        if (mid <= x || mid >= b) break;
        const int sm = sgn(mid);
        if (sm == 0) {
          x = b = mid;
          break;
        }
        if (sm == sa) {
          x = mid;
        } else {
          b = mid;
        }
      }
      result.push_back((x + b) / 2);
    }
    a = node;
    sa = sn;
  }
  return result;
}

}  // namespace mfcforge
