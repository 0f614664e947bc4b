#include "mfcforge/tchebset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>

namespace mfcforge {

namespace {

const Poly kU{0.0, 1.0};
const Poly kUPlusOne{1.0, 1.0};
const Poly kOneMinusU2{1.0, 0.0, -1.0};

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Result of turning i * R(t) > 0 into a usable constraint.
enum class Constraint { Active, AlwaysTrue, Violated };

Constraint classify(const AffineForm& f, int sign) {
  const double scale = std::abs(f.k1) + std::abs(f.k2) + std::abs(f.c);
  if (scale <= 1e-10) return Constraint::Violated;
  if (std::abs(f.k1) + std::abs(f.k2) <= 1e-12 * scale) return sign * f.c > 0.0 ? Constraint::AlwaysTrue : Constraint::Violated;
  return Constraint::Active;
}

}  // namespace

const char* to_string(ControllerKind kind) { return kind == ControllerKind::PI ? "pi" : "pid"; }

ControllerKind parse_controller_kind(const std::string& text) {
  if (text == "pi") return ControllerKind::PI;
  if (text == "pid") return ControllerKind::PID;
  throw InputError("controller kind must be 'pi' or 'pid', got '" + text + "'");
}

PTriple p_triple(const Poly& num, const Poly& den) {
  if (num.isZero() || den.isZero()) throw DomainError("p_triple: zero polynomial");
  const auto n = tcheby_form(num);
  const auto d = tcheby_form(den);
  return {
      d.R * n.R + kOneMinusU2 * d.T * n.T,
      n.R * d.T - d.R * n.T,
      n.R * n.R + kOneMinusU2 * n.T * n.T,
  };
}

RTForms::RTForms(ControllerKind kind, PTriple p)
    : kind_(kind),
      p_(std::move(p)),
      r_base_(-(kUPlusOne * p_.p1) - kOneMinusU2 * p_.p2),
      t_base_(p_.p1 - kUPlusOne * p_.p2) {}

AffineForm RTForms::R_at(double u, double gate) const {
  const double p3 = p_.p3(u);
  const double base = r_base_(u);
  if (kind_ == ControllerKind::PI) {
    // R = base - K1 (u + K2) P3 with K1 = gate.
    return {0.0, -gate * p3, base - gate * u * p3};
  }
  // R = base - ((2 K2 - K3) u - K1) P3 with K3 = gate.
  return {p3, -2.0 * u * p3, base + gate * u * p3};
}

double RTForms::R(double u, double K1, double K2, double K3) const {
  const double p3 = p_.p3(u);
  if (kind_ == ControllerKind::PI) return r_base_(u) - K1 * (u + K2) * p3;
  return r_base_(u) - ((2.0 * K2 - K3) * u - K1) * p3;
}

RTForms rt_forms(ControllerKind kind, const PTriple& p) { return {kind, p}; }

SignatureInfo signature(const Poly& num, const Poly& den, ControllerKind kind) {
  if (num.isZero() || den.isZero()) throw DomainError("signature: zero polynomial");
  SignatureInfo info;
  info.l1 = num.degree();
  const int n1 = den.degree();
  info.i_nr = count_in_unit_disc(num.reversed());
  info.i_delta = kind == ControllerKind::PI ? n1 + 1 : n1 + 2;
  info.sigma = info.i_delta + info.i_nr - info.l1 - (kind == ControllerKind::PID ? 1 : 0);
  return info;
}

void SweepConfig::validate() const {
  if (steps < 2) throw DomainError("sweep: steps must be >= 2");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("sweep: need finite lo < hi");
}

void RegionBox::validate() const {
  if (!(k1_lo < k1_hi) || !(k2_lo < k2_hi)) throw DomainError("region box: need lo < hi on both axes");
  for (double v : {k1_lo, k1_hi, k2_lo, k2_hi})
    if (!std::isfinite(v)) throw DomainError("region box: bounds must be finite");
}

std::vector<GateZeros> gate_sweep(const RTForms& forms, int sigma, const SweepConfig& sweep) {
  sweep.validate();
  std::vector<GateZeros> out;
  for (int i = 0; i < sweep.steps; ++i) {
    const double gate = sweep.gate(i);
    auto zeros = odd_zeros_in_open_interval(forms.T(gate), -1.0, 1.0);
    if (static_cast<int>(zeros.size()) >= sigma - 1) out.push_back({gate, std::move(zeros)});
  }
  return out;
}

std::vector<SignString> admissible_strings(int k, int sigma, int sign_t_at_minus1) {
  if (k < 0) throw DomainError("admissible_strings: k must be >= 0");
  if (k > 20) throw ResourceError("admissible_strings: k > 20 zeros is beyond exhaustive enumeration");
  if (sign_t_at_minus1 != 1 && sign_t_at_minus1 != -1) throw DomainError("admissible_strings: sign must be +1 or -1");
  std::vector<SignString> out;
  const int len = k + 2;
  const std::uint32_t count = 1u << len;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    SignString s;
    s.entries.resize(len);
    for (int j = 0; j < len; ++j) s.entries[j] = (mask >> (len - 1 - j)) & 1u ? 1 : -1;
    int sum = s.entries[0];
    for (int j = 1; j <= k; ++j) sum += 2 * (j % 2 == 0 ? 1 : -1) * s.entries[j];
    sum += ((k + 1) % 2 == 0 ? 1 : -1) * s.entries[k + 1];
    if (sign_t_at_minus1 * sum == 2 * sigma) out.push_back(std::move(s));
  }
  return out;
}

EndpointSign sign_at_minus_one(const Poly& t) {
  Poly d = t;
  for (int p = 0; !d.isZero(); ++p) {
    const double v = d(-1.0);
    const double scale = d.coeffs().cwiseAbs().sum();
    if (std::abs(v) > 1e-9 * scale) return {v > 0.0 ? 1 : -1, p};
    d = d.derivative();
  }
  return {0, 0};
}

double ConvexPolygon::area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) a += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  return 0.5 * a;
}

bool ConvexPolygon::contains(const Eigen::Vector2d& p) const {
  if (vertices.size() < 3) return false;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto& a = vertices[i];
    const auto& b = vertices[(i + 1) % vertices.size()];
    if (cross(b - a, p - a) <= 0.0) return false;
  }
  return true;
}

double ConvexPolygon::distance(const Eigen::Vector2d& p) const {
  if (contains(p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices.size(); ++i)
    best = std::min(best, segment_distance(p, vertices[i], vertices[(i + 1) % vertices.size()]));
  return best;
}

Eigen::AlignedBox2d ConvexPolygon::bounds() const {
  Eigen::AlignedBox2d box;
  for (const auto& v : vertices) box.extend(v);
  return box;
}

std::optional<ConvexPolygon> intersect_half_planes(const std::vector<HalfPlane>& planes, const RegionBox& box) {
  std::vector<Eigen::Vector2d> poly = {
      {box.k1_lo, box.k2_lo}, {box.k1_hi, box.k2_lo}, {box.k1_hi, box.k2_hi}, {box.k1_lo, box.k2_hi}};
  const double extent = std::max(box.k1_hi - box.k1_lo, box.k2_hi - box.k2_lo);
  for (const auto& hp : planes) {
    const double norm = std::hypot(hp.a, hp.b);
    if (norm == 0.0) {
      if (hp.c > 0.0) continue;
      return std::nullopt;
    }
    const double a = hp.a / norm;
    const double b = hp.b / norm;
    const double c = hp.c / norm;
    auto value = [&](const Eigen::Vector2d& v) { return a * v.x() + b * v.y() + c; };
    std::vector<Eigen::Vector2d> next;
    next.reserve(poly.size() + 1);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const auto& p = poly[i];
      const auto& q = poly[(i + 1) % poly.size()];
      const double vp = value(p);
      const double vq = value(q);
      if (vp >= 0.0) next.push_back(p);
      if ((vp >= 0.0) != (vq >= 0.0)) next.push_back(p + (vp / (vp - vq)) * (q - p));
    }
    // Drop vertices that coincide after clipping.
    std::vector<Eigen::Vector2d> dedup;
    for (const auto& v : next) {
      if (!dedup.empty() && (v - dedup.back()).norm() <= 1e-14 * extent) continue;
      dedup.push_back(v);
    }
    while (dedup.size() > 1 && (dedup.front() - dedup.back()).norm() <= 1e-14 * extent) dedup.pop_back();
    poly = std::move(dedup);
    if (poly.size() < 3) return std::nullopt;
  }
  ConvexPolygon out{std::move(poly)};
  if (out.area() < 1e-12) return std::nullopt;
  return out;
}

std::vector<double> evaluation_points(const std::vector<double>& zeros) {
  std::vector<double> t;
  t.reserve(zeros.size() + 2);
  t.push_back(-1.0);
  t.insert(t.end(), zeros.begin(), zeros.end());
  t.push_back(1.0);
  return t;
}

std::optional<Interval> pi_region_for_string(const SignString& s, const std::vector<double>& zeros,
                                             const RTForms& forms, double gate, const RegionBox& box) {
  const auto t = evaluation_points(zeros);
  if (s.entries.size() != t.size()) throw DomainError("pi_region_for_string: string length must be k + 2");
  Interval iv{box.k2_lo, box.k2_hi};
  for (std::size_t j = 0; j < t.size(); ++j) {
    const AffineForm f = forms.R_at(t[j], gate);
    const int sign = s.entries[j];
    switch (classify(f, sign)) {
      case Constraint::Violated:
        return std::nullopt;
      case Constraint::AlwaysTrue:
        continue;
      case Constraint::Active:
        break;
    }
    const double slope = sign * f.k2;
    const double root = -f.c / f.k2;
    if (slope > 0.0) {
      iv.lo = std::max(iv.lo, root);
    } else {
      iv.hi = std::min(iv.hi, root);
    }
  }
  if (!(iv.length() > 1e-12)) return std::nullopt;
  return iv;
}

std::optional<ConvexPolygon> pid_region_for_string(const SignString& s, const std::vector<double>& zeros,
                                                   const RTForms& forms, double gate, const RegionBox& box) {
  const auto t = evaluation_points(zeros);
  if (s.entries.size() != t.size()) throw DomainError("pid_region_for_string: string length must be k + 2");
  std::vector<HalfPlane> planes;
  planes.reserve(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    const AffineForm f = forms.R_at(t[j], gate);
    const int sign = s.entries[j];
    switch (classify(f, sign)) {
      case Constraint::Violated:
        return std::nullopt;
      case Constraint::AlwaysTrue:
        continue;
      case Constraint::Active:
        planes.push_back({sign * f.k1, sign * f.k2, sign * f.c});
        break;
    }
  }
  return intersect_half_planes(planes, box);
}

StabRegionSlice stabilizing_slice(const RTForms& forms, int sigma, double gate, const RegionBox& box) {
  StabRegionSlice slice;
  slice.gate = gate;
  const Poly t = forms.T(gate);
  const auto zeros = odd_zeros_in_open_interval(t, -1.0, 1.0);
  const int k = static_cast<int>(zeros.size());
  if (k < sigma - 1) return slice;
  const EndpointSign end = sign_at_minus_one(t);
  if (end.sign == 0) return slice;
  for (const auto& s : admissible_strings(k, sigma, end.sign)) {
    if (forms.kind() == ControllerKind::PI) {
      if (auto iv = pi_region_for_string(s, zeros, forms, gate, box)) slice.intervals.push_back(*iv);
    } else {
      if (auto poly = pid_region_for_string(s, zeros, forms, gate, box)) slice.polygons.push_back(std::move(*poly));
    }
  }
  return slice;
}

StabilizingSet stabilizing_set(const DiscreteTF& g, ControllerKind kind, const SweepConfig& sweep,
                               const RegionBox& box, const SetOptions& options) {
  sweep.validate();
  box.validate();
  StabilizingSet set;
  set.kind = kind;
  set.sweep = sweep;
  set.box = box;
  set.signature = signature(g.num(), g.den(), kind);
  const RTForms forms(kind, p_triple(g.num(), g.den()));

  std::vector<StabRegionSlice> all(sweep.steps);
  const unsigned threads = std::clamp(options.threads, 1u, static_cast<unsigned>(sweep.steps));
  auto work = [&](unsigned worker) {
    for (int i = static_cast<int>(worker); i < sweep.steps; i += static_cast<int>(threads))
      all[i] = stabilizing_slice(forms, set.signature.sigma, sweep.gate(i), box);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& s : all)
    if (!s.empty()) set.slices.push_back(std::move(s));
  return set;
}

const StabRegionSlice* StabilizingSet::nearest_slice(double gate) const {
  if (slices.empty()) return nullptr;
  const double pos = std::round((gate - sweep.lo) / sweep.spacing());
  const int index = std::clamp(static_cast<int>(pos), 0, sweep.steps - 1);
  const double grid_gate = sweep.gate(index);
  auto it = std::lower_bound(slices.begin(), slices.end(), grid_gate - 1e-9 * sweep.spacing(),
                             [](const StabRegionSlice& s, double g) { return s.gate < g; });
  if (it == slices.end() || std::abs(it->gate - grid_gate) > 1e-9 * sweep.spacing()) return nullptr;
  return &*it;
}

bool slice_contains(const StabRegionSlice& slice, double K1, double K2, double tol) {
  for (const auto& iv : slice.intervals)
    if (iv.contains(K2, tol)) return true;
  const Eigen::Vector2d p(K1, K2);
  for (const auto& poly : slice.polygons)
    if (tol > 0.0 ? poly.distance(p) <= tol : poly.contains(p)) return true;
  return false;
}

}  // namespace mfcforge
