#pragma once

// Complete stabilizing set of discrete Two Term (PI) and Three Term (PID)
// controllers by Tchebychev root counting.
//
//   PI : C(z) = K1 (z - K2) / (z - 1),          gate = K1, unknown K2
//   PID: C(z) = (K2 z^2 + K1 z + K0) / (z(z-1)), gate = K3 = K2 - K0, unknowns (K1, K2)
//
// For each gate value T(u; gate) is fixed; its odd zeros in (-1, 1) plus the
// endpoints give the points where R must take the signs of an admissible
// string. Each string yields an interval (PI) or a convex polygon (PID).

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mfcforge/discrete_tf.hpp"

namespace mfcforge {

enum class ControllerKind { PI, PID };

const char* to_string(ControllerKind kind);
/// Accepts "pi" / "pid"; throws InputError otherwise.
ControllerKind parse_controller_kind(const std::string& text);

struct PTriple {
  Poly p1;  ///< R_D R_N + (1-u^2) T_D T_N
  Poly p2;  ///< R_N T_D - R_D T_N
  Poly p3;  ///< R_N^2 + (1-u^2) T_N^2, nonnegative on [-1, 1]
};

PTriple p_triple(const Poly& num, const Poly& den);

/// Value of R at a point as an affine function of the unknowns:
/// R = k1 * K1 + k2 * K2 + c. For PI the k1 slot is unused (K1 is the gate).
struct AffineForm {
  double k1 = 0.0;
  double k2 = 0.0;
  double c = 0.0;

  double operator()(double K1, double K2) const { return k1 * K1 + k2 * K2 + c; }
};

/// Parametric R(u; ...) and T(u; gate) for one controller kind.
class RTForms {
 public:
  RTForms(ControllerKind kind, PTriple p);

  ControllerKind kind() const { return kind_; }
  const PTriple& p() const { return p_; }

  /// T(u; gate) = gate * P3 + P1 - (u + 1) P2.
  Poly T(double gate) const { return gate * p_.p3 + t_base_; }
  /// -(u+1) P1 - (1-u^2) P2, the gain-free part of R.
  const Poly& r_base() const { return r_base_; }

  /// R at u with the gate fixed, affine in the remaining unknowns.
  AffineForm R_at(double u, double gate) const;

  /// Full R(u): PI uses (K1, K2); PID uses (K1, K2, K3).
  double R(double u, double K1, double K2, double K3 = 0.0) const;

 private:
  ControllerKind kind_;
  PTriple p_;
  Poly r_base_;
  Poly t_base_;
};

RTForms rt_forms(ControllerKind kind, const PTriple& p);

struct SignatureInfo {
  int sigma = 0;
  int i_delta = 0;  ///< required number of closed-loop roots inside the unit circle (= deg delta)
  int i_nr = 0;     ///< roots of the reversed numerator inside the unit circle
  int l1 = 0;       ///< deg N
};

/// Throws MarginalRootError if N has a root on the unit circle.
SignatureInfo signature(const Poly& num, const Poly& den, ControllerKind kind);

struct SweepConfig {
  double lo = 0.0;
  double hi = 1.0;
  int steps = 400;

  /// Throws DomainError unless steps >= 2 and lo < hi.
  void validate() const;
  double gate(int i) const { return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1); }
  double spacing() const { return (hi - lo) / static_cast<double>(steps - 1); }
};

/// Search box for the unknowns. PI uses only the K2 range.
struct RegionBox {
  double k1_lo = -100.0;
  double k1_hi = 100.0;
  double k2_lo = -100.0;
  double k2_hi = 100.0;

  void validate() const;
};

struct GateZeros {
  double gate = 0.0;
  std::vector<double> zeros;  ///< odd zeros of T in (-1, 1), increasing
};

/// Gate values whose T(u; gate) has at least sigma - 1 odd zeros in (-1, 1).
std::vector<GateZeros> gate_sweep(const RTForms& forms, int sigma, const SweepConfig& sweep);

struct SignString {
  std::vector<int> entries;  ///< i_0 ... i_{k+1}, each +1 or -1

  friend bool operator==(const SignString&, const SignString&) = default;
};

/// All strings of length k + 2 satisfying the signature identity, by
/// exhaustive enumeration. Throws ResourceError for k > 20.
std::vector<SignString> admissible_strings(int k, int sigma, int sign_t_at_minus1);

/// Sign of the first derivative of T that does not vanish at u = -1
/// (relative tolerance 1e-9), together with the number of vanishing derivatives.
struct EndpointSign {
  int sign = 0;
  int multiplicity = 0;
};
EndpointSign sign_at_minus_one(const Poly& t);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x, double tol = 0.0) const { return x > lo - tol && x < hi + tol; }
};

/// Convex polygon with counter-clockwise vertices.
struct ConvexPolygon {
  std::vector<Eigen::Vector2d> vertices;

  double area() const;
  bool contains(const Eigen::Vector2d& p) const;
  /// Euclidean distance to the polygon; 0 inside.
  double distance(const Eigen::Vector2d& p) const;
  Eigen::AlignedBox2d bounds() const;
};

/// Half-plane a x + b y + c > 0 with (x, y) = (K1, K2).
struct HalfPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// Intersection of half-planes clipped to a box; empty when the area is below 1e-12.
std::optional<ConvexPolygon> intersect_half_planes(const std::vector<HalfPlane>& planes, const RegionBox& box);

/// Points t_0 = -1, t_1..t_k = zeros, t_{k+1} = +1.
std::vector<double> evaluation_points(const std::vector<double>& zeros);

/// PI region for one admissible string: interval in K2 (gate = K1).
std::optional<Interval> pi_region_for_string(const SignString& s, const std::vector<double>& zeros,
                                             const RTForms& forms, double gate, const RegionBox& box);

/// PID region for one admissible string: convex polygon in (K1, K2) (gate = K3).
std::optional<ConvexPolygon> pid_region_for_string(const SignString& s, const std::vector<double>& zeros,
                                                   const RTForms& forms, double gate, const RegionBox& box);

struct StabRegionSlice {
  double gate = 0.0;
  std::vector<Interval> intervals;     ///< PI: K2 intervals
  std::vector<ConvexPolygon> polygons; ///< PID: (K1, K2) polygons

  bool empty() const { return intervals.empty() && polygons.empty(); }
};

struct StabilizingSet {
  ControllerKind kind = ControllerKind::PID;
  SweepConfig sweep;
  RegionBox box;
  SignatureInfo signature;
  std::vector<StabRegionSlice> slices;  ///< strictly increasing gates

  bool empty() const { return slices.empty(); }
  /// Slice at the sweep gate nearest to the given value; nullptr when that
  /// gate has no region.
  const StabRegionSlice* nearest_slice(double gate) const;
};

struct SetOptions {
  unsigned threads = 1;
};

/// Runs the full procedure on G for every gate of the sweep. Slices without
/// any region are omitted; an empty result means no stabilizer exists in the sweep.
StabilizingSet stabilizing_set(const DiscreteTF& g, ControllerKind kind, const SweepConfig& sweep,
                               const RegionBox& box, const SetOptions& options = {});

/// Regions of one gate value (exposed for testing and single-slice queries).
StabRegionSlice stabilizing_slice(const RTForms& forms, int sigma, double gate, const RegionBox& box);

/// Whether the point lies in a region of the given slice, allowing a distance tolerance.
bool slice_contains(const StabRegionSlice& slice, double K1, double K2, double tol = 0.0);

}  // namespace mfcforge
