#include "mfcforge/discrete_tf.hpp"

#include <cmath>
#include <string>

namespace mfcforge {

DiscreteTF::DiscreteTF(Poly num, Poly den, double ts) : ts_(ts) {
  if (den.isZero()) throw DomainError("DiscreteTF: zero denominator");
  if (!(ts > 0.0) || !std::isfinite(ts)) throw DomainError("DiscreteTF: sample time must be positive");
  if (num.degree() > den.degree()) throw DomainError("DiscreteTF: improper transfer function");
  const double lead = den.leading();
  num_ = num * (1.0 / lead);
  den_ = den.monic();
}

DiscreteTF operator*(const DiscreteTF& a, const DiscreteTF& b) {
  require_same_ts(a.ts(), b.ts(), "series connection");
  return {a.num() * b.num(), a.den() * b.den(), a.ts()};
}

void require_same_ts(double a, double b, const char* what) {
  if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b)))
    throw InputError(std::string(what) + ": sample time mismatch");
}

}  // namespace mfcforge
