#pragma once

// Independent oracles and generators shared by the test binaries.

#include <array>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mfcforge/lateralplant.hpp"
#include "mfcforge/mfcbridge.hpp"

namespace support {

using cd = std::complex<double>;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(0x5eed2024ULL);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }
inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

// Roots through ComplexEigenSolver on a companion matrix built here, not
// through the library.
inline std::vector<cd> companion_roots(const std::vector<double>& asc) {
  std::vector<double> a = asc;
  while (!a.empty() && a.back() == 0.0) a.pop_back();
  const int n = static_cast<int>(a.size()) - 1;
  std::vector<cd> out;
  if (n < 1) return out;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) m(0, i) = -a[n - 1 - i] / a[n];
  for (int i = 1; i < n; ++i) m(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  for (int i = 0; i < n; ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

inline double oracle_spectral_radius(const std::vector<double>& asc) {
  double r = 0.0;
  for (const auto& z : companion_roots(asc)) r = std::max(r, std::abs(z));
  return r;
}

// Jury / Schur-Cohn reduction: p is Schur stable iff |a0| < |an| and the
// reduced polynomial (an p(z) - a0 z^n p(1/z)) / z is Schur stable.
inline bool jury_stable(std::vector<double> a) {
  while (!a.empty() && a.back() == 0.0) a.pop_back();
  while (a.size() > 1) {
    const std::size_t n = a.size() - 1;
    if (!(std::abs(a[0]) < std::abs(a[n]))) return false;
    std::vector<double> q(n);
    for (std::size_t k = 1; k <= n; ++k) q[k - 1] = a[n] * a[k] - a[0] * a[n - k];
    a = std::move(q);
  }
  return !a.empty();
}

// Monic real polynomial (ascending) with the given roots; complex roots must
// come in conjugate pairs.
inline std::vector<double> poly_from_roots(const std::vector<cd>& roots) {
  std::vector<cd> c{1.0};
  for (const auto& r : roots) {
    std::vector<cd> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  std::vector<double> out;
  for (const auto& v : c) out.push_back(v.real());
  return out;
}

// Random conjugate-closed root set with moduli drawn from [rmin, rmax].
inline std::vector<cd> random_roots(int degree, double rmin, double rmax) {
  std::vector<cd> r;
  while (static_cast<int>(r.size()) < degree) {
    const double mag = uniform(rmin, rmax);
    if (degree - static_cast<int>(r.size()) >= 2 && uniform(0.0, 1.0) < 0.5) {
      const double ang = uniform(0.1, 3.0);
      r.push_back(std::polar(mag, ang));
      r.push_back(std::polar(mag, -ang));
    } else {
      r.emplace_back(uniform(0.0, 1.0) < 0.5 ? mag : -mag, 0.0);
    }
  }
  return r;
}

inline mfcforge::DiscreteTF reference_plant(double ts = 0.05) {
  using namespace mfcforge;
  return ss_to_tf(zoh_discretize(build_lateral_ss(VehicleParams::reference_car()), ts));
}

inline mfcforge::StateSpace reference_discrete(double ts = 0.05) {
  using namespace mfcforge;
  return zoh_discretize(build_lateral_ss(VehicleParams::reference_car()), ts);
}

// The four iPD2 controllers of the reference study, C = 4, Ts = 0.05.
inline const std::array<mfcforge::IpdGains, 4>& published_controllers() {
  static const std::array<mfcforge::IpdGains, 4> c{{
      {0.00093, 0.043, 315.7, 2},
      {0.09078, 0.167, 161.9, 2},
      {0.0, 0.301, 116.1, 2},
      {0.0, 0.649, 792.6, 2},
  }};
  return c;
}

inline mfcforge::FilterConfig published_filter() { return {4.0, 0.05}; }

}  // namespace support
