#pragma once

#include <complex>

#include "mfcforge/polycore.hpp"

namespace mfcforge {

/// Rational discrete-time transfer function N(z)/D(z) at sample time Ts.
/// The denominator is kept monic and deg N <= deg D.
class DiscreteTF {
 public:
  DiscreteTF() = default;
  DiscreteTF(Poly num, Poly den, double ts);

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  double ts() const { return ts_; }

  std::complex<double> operator()(std::complex<double> z) const { return num_(z) / den_(z); }

  /// Series connection; sample times must match.
  friend DiscreteTF operator*(const DiscreteTF& a, const DiscreteTF& b);

 private:
  Poly num_;
  Poly den_{1.0};
  double ts_ = 1.0;
};

/// Throws InputError when the two sample times differ by more than 1e-12 relative.
void require_same_ts(double a, double b, const char* what);

}  // namespace mfcforge
