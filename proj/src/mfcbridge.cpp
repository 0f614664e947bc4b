#include "mfcforge/mfcbridge.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "mfcforge/lateralplant.hpp"

namespace mfcforge {

namespace {

const Poly kZ{0.0, 1.0};
const Poly kZMinusOne{-1.0, 1.0};

Poly filter_poly(const FilterConfig& f) { return Poly{1.0 - f.C, f.C}; }

void require_alpha(double alpha, const char* what) {
  if (alpha == 0.0 || !std::isfinite(alpha)) throw DomainError(std::string(what) + ": alpha must be finite and nonzero");
}

// Grid over the polygon's bounding box aligned with its longest edge, so thin
// slivers still receive grid*grid candidate points.
std::vector<Eigen::Vector2d> polygon_grid(const ConvexPolygon& poly, int grid) {
  const auto& v = poly.vertices;
  Eigen::Vector2d dir(1.0, 0.0);
  double longest = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::Vector2d e = v[(i + 1) % v.size()] - v[i];
    if (e.norm() > longest) {
      longest = e.norm();
      dir = e / e.norm();
    }
  }
  const Eigen::Vector2d normal(-dir.y(), dir.x());
  double a0 = INFINITY, a1 = -INFINITY, b0 = INFINITY, b1 = -INFINITY;
  for (const auto& p : v) {
    a0 = std::min(a0, p.dot(dir));
    a1 = std::max(a1, p.dot(dir));
    b0 = std::min(b0, p.dot(normal));
    b1 = std::max(b1, p.dot(normal));
  }
  std::vector<Eigen::Vector2d> out;
  for (int i = 0; i < grid; ++i) {
    const double a = a0 + (i + 0.5) / grid * (a1 - a0);
    for (int j = 0; j < grid; ++j) {
      const double b = b0 + (j + 0.5) / grid * (b1 - b0);
      const Eigen::Vector2d p = a * dir + b * normal;
      if (poly.contains(p)) out.push_back(p);
    }
  }
  return out;
}

}  // namespace

void FilterConfig::validate() const {
  if (!(ts > 0.0) || !std::isfinite(ts)) throw DomainError("filter: Ts must be positive");
  if (!(C >= 1.0) || !std::isfinite(C)) throw DomainError("filter: C must be >= 1");
}

void IpdGains::validate() const {
  require_alpha(alpha, "iPD gains");
  if (order != 1 && order != 2) throw DomainError("iPD gains: order must be 1 or 2");
}

DiscreteTF derivative_filter_tf(const FilterConfig& f) {
  f.validate();
  return {kZMinusOne * (1.0 / f.ts), filter_poly(f), f.ts};
}

PiGains ipd1_to_pi(const IpdGains& g, const FilterConfig& f) {
  require_alpha(g.alpha, "ipd1_to_pi");
  f.validate();
  const double lead = (g.Kp * f.ts * f.C + g.Kd + 1.0) / (g.alpha * f.ts);
  const double tail = (g.Kp * f.ts * (f.C - 1.0) + g.Kd + 1.0) / (g.alpha * f.ts);
  if (lead == 0.0) throw SingularityError("ipd1_to_pi: K1 = 0 leaves K2 undefined");
  return {lead, tail / lead};
}

IpdGains pi_to_ipd1(const PiGains& pi, const FilterConfig& f, double alpha) {
  require_alpha(alpha, "pi_to_ipd1");
  f.validate();
  IpdGains out;
  out.order = 1;
  out.alpha = alpha;
  out.Kp = alpha * pi.K1 * (1.0 - pi.K2);
  out.Kd = alpha * f.ts * pi.K1 * (1.0 - f.C + pi.K2 * f.C) - 1.0;
  return out;
}

PidGains ipd2_to_pid(const IpdGains& g, const FilterConfig& f) {
  require_alpha(g.alpha, "ipd2_to_pid");
  f.validate();
  const double ts = f.ts;
  const double c = f.C;
  const double scale = g.alpha * ts * ts;
  PidGains out;
  out.K2 = (g.Kp * ts * ts * c * c + g.Kd * ts * c + 1.0) / scale;
  out.K1 = (2.0 * g.Kp * ts * ts * c * (1.0 - c) + g.Kd * ts * (1.0 - 2.0 * c) - 2.0) / scale;
  out.K0 = (g.Kp * ts * ts * (c - 1.0) * (c - 1.0) + g.Kd * ts * (c - 1.0) + 1.0) / scale;
  return out;
}

IpdGains pid_to_ipd2_semilinear(const PidGains& pid, const FilterConfig& f) {
  f.validate();
  const double ts = f.ts;
  const double c = f.C;
  Eigen::Matrix3d m;
  m << 1.0, 1.0, 1.0,
       2.0 * ts * (1.0 - c), ts * (1.0 - 2.0 * c), -2.0 * ts * c,
       ts * ts * (c - 1.0) * (c - 1.0), ts * ts * (c * c - c), ts * ts * c * c;
  const Eigen::Vector3d k(pid.K2, pid.K1, pid.K0);
  const Eigen::Vector3d v = m * k;
  const double magnitude = (m.row(2).cwiseAbs().transpose().cwiseProduct(k.cwiseAbs())).sum();
  if (!(std::abs(v(2)) > 1e-12 * magnitude)) throw SingularityError("pid_to_ipd2_semilinear: 1/alpha vanishes");
  IpdGains out;
  out.order = 2;
  out.alpha = 1.0 / v(2);
  out.Kp = v(0) * out.alpha;
  out.Kd = v(1) * out.alpha;
  return out;
}

IpdGains pid_to_ipd2_nonlinear(const PidGains& pid, const FilterConfig& f) {
  f.validate();
  const double ts = f.ts;
  const double c = f.C;
  const double ts2 = ts * ts;
  Eigen::Matrix3d m;
  m << ts2 * c * c, ts * c, -ts2 * pid.K2,
       ts2 * 2.0 * c * (1.0 - c), ts * (1.0 - 2.0 * c), -ts2 * pid.K1,
       ts2 * (c - 1.0) * (c - 1.0), ts * (c - 1.0), -ts2 * pid.K0;
  const Eigen::Vector3d rhs(-1.0, 2.0, -1.0);
  const double row_scale = m.row(0).norm() * m.row(1).norm() * m.row(2).norm();
  if (!(std::abs(m.determinant()) > 1e-12 * row_scale))
    throw SingularityError("pid_to_ipd2_nonlinear: transform matrix is singular");
  const Eigen::Vector3d x = m.fullPivLu().solve(rhs);
  IpdGains out;
  out.order = 2;
  out.Kp = x(0);
  out.Kd = x(1);
  out.alpha = x(2);
  return out;
}

DiscreteTF controller_tf(const PiGains& g, double ts) { return {Poly{-g.K1 * g.K2, g.K1}, kZMinusOne, ts}; }

DiscreteTF controller_tf(const PidGains& g, double ts) { return {Poly{g.K0, g.K1, g.K2}, kZ * kZMinusOne, ts}; }

DiscreteTF controller_tf(const IpdGains& g, const FilterConfig& f) {
  g.validate();
  f.validate();
  const double ts = f.ts;
  const double c = f.C;
  const Poly filt = filter_poly(f);
  if (g.order == 1) {
    const Poly inner{-(g.Kp * ts * (c - 1.0) + g.Kd + 1.0), g.Kp * ts * c + g.Kd + 1.0};
    return {kZ * inner, (g.alpha * ts) * (kZMinusOne * filt), ts};
  }
  const Poly inner = (g.Kp * ts * ts) * (filt * filt) + (g.Kd * ts) * (kZMinusOne * filt) + kZMinusOne * kZMinusOne;
  return {kZ * inner, (g.alpha * ts * ts) * (kZMinusOne * filt * filt), ts};
}

DiscreteTF controller_tf(const GainsRecord& record) {
  return std::visit(
      [&](const auto& g) -> DiscreteTF {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, IpdGains>) {
          return controller_tf(g, record.filter);
        } else {
          return controller_tf(g, record.filter.ts);
        }
      },
      record.gains);
}

DiscreteTF design_plant(const GainsRecord& record, const DiscreteTF& g) {
  if (std::holds_alternative<PiGains>(record.gains)) return augment_with_filter_poles(g, record.filter.C, 1);
  if (std::holds_alternative<PidGains>(record.gains)) return augment_with_filter_poles(g, record.filter.C, 2);
  return g;
}

const char* to_string(InverseMethod m) { return m == InverseMethod::Semilinear ? "semilinear" : "nonlinear"; }

InverseMethod parse_inverse_method(const std::string& text) {
  if (text == "semilinear") return InverseMethod::Semilinear;
  if (text == "nonlinear") return InverseMethod::Nonlinear;
  throw InputError("method must be 'semilinear' or 'nonlinear', got '" + text + "'");
}

MapResult map_set(const StabilizingSet& set, const FilterConfig& f, const MapOptions& options) {
  if (set.kind != ControllerKind::PID) throw InputError("map_set: iPD2 mapping needs a PID set");
  f.validate();
  MapResult out;
  for (const auto& record : sample_set(set, f, options.grid, options.slice_stride)) {
    const auto& pid = std::get<PidGains>(record.gains);
    try {
      const IpdGains ipd = options.method == InverseMethod::Nonlinear ? pid_to_ipd2_nonlinear(pid, f)
                                                                       : pid_to_ipd2_semilinear(pid, f);
      out.points.push_back({pid, ipd});
    } catch (const SingularityError&) {
      ++out.singular;
    }
  }
  return out;
}

std::vector<GainsRecord> sample_set(const StabilizingSet& set, const FilterConfig& f, int grid, int slice_stride) {
  if (grid < 1) throw DomainError("sample_set: grid must be >= 1");
  if (slice_stride < 1) throw DomainError("sample_set: slice stride must be >= 1");
  std::vector<GainsRecord> out;
  for (std::size_t s = 0; s < set.slices.size(); s += static_cast<std::size_t>(slice_stride)) {
    const auto& slice = set.slices[s];
    for (const auto& iv : slice.intervals) {
      for (int i = 0; i < grid; ++i) {
        const double k2 = iv.lo + (i + 0.5) / grid * iv.length();
        out.push_back({PiGains{slice.gate, k2}, f});
      }
    }
    for (const auto& poly : slice.polygons) {
      for (const auto& p : polygon_grid(poly, grid))
        out.push_back({PidGains::from_gate(slice.gate, p.x(), p.y()), f});
    }
  }
  return out;
}

}  // namespace mfcforge
