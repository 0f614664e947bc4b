#pragma once

// Exact algebraic maps between Two/Three Term controller gains and
// first/second order intelligent PD (model-free) gains, for a derivative
// filtered by D(z) = (1/Ts) (z - 1) / (C z + 1 - C).

#include <variant>
#include <vector>

#include "mfcforge/discrete_tf.hpp"
#include "mfcforge/tchebset.hpp"

namespace mfcforge {

struct FilterConfig {
  double C = 1.0;   ///< filter constant; pole at (C - 1) / C
  double ts = 0.05; ///< sample time [s]

  /// Throws DomainError unless ts > 0 and C >= 1.
  void validate() const;
};

struct PiGains {
  double K1 = 0.0;
  double K2 = 0.0;
};

/// Three Term gains of (K2 z^2 + K1 z + K0) / (z (z - 1)); K3 = K2 - K0 is the sweep gate.
struct PidGains {
  double K2 = 0.0;
  double K1 = 0.0;
  double K0 = 0.0;

  double K3() const { return K2 - K0; }
  static PidGains from_gate(double K3, double K1, double K2) { return {K2, K1, K2 - K3}; }
};

/// iPD gains for an ultra-local model of order 1 or 2. The integral gain is
/// always zero.
struct IpdGains {
  double Kp = 0.0;
  double Kd = 0.0;
  double alpha = 1.0;
  int order = 2;

  void validate() const;
};

using AnyGains = std::variant<PiGains, PidGains, IpdGains>;

/// Controller gains plus the derivative filter they were designed with.
struct GainsRecord {
  AnyGains gains;
  FilterConfig filter;
};

DiscreteTF derivative_filter_tf(const FilterConfig& f);

/// First order iPD -> Two Term gains: C_iPD1(z) = K1 (z - K2)/(z - 1) * z/(C z + 1 - C).
PiGains ipd1_to_pi(const IpdGains& g, const FilterConfig& f);
/// Inverse of ipd1_to_pi for a caller-chosen alpha (the free parameter).
IpdGains pi_to_ipd1(const PiGains& pi, const FilterConfig& f, double alpha);

/// Second order iPD -> Three Term gains.
PidGains ipd2_to_pid(const IpdGains& g, const FilterConfig& f);
/// Linear map to (Kp/alpha, Kd/alpha, 1/alpha), then rescaled. Throws
/// SingularityError when 1/alpha vanishes.
IpdGains pid_to_ipd2_semilinear(const PidGains& pid, const FilterConfig& f);
/// Solves the 3x3 system in (Kp, Kd, alpha). Throws SingularityError when the
/// matrix is numerically singular (|det| < 1e-12 times the product of row norms).
IpdGains pid_to_ipd2_nonlinear(const PidGains& pid, const FilterConfig& f);

DiscreteTF controller_tf(const PiGains& g, double ts);
DiscreteTF controller_tf(const PidGains& g, double ts);
/// iPD1 / iPD2 controller including its filter denominator powers.
DiscreteTF controller_tf(const IpdGains& g, const FilterConfig& f);
DiscreteTF controller_tf(const GainsRecord& record);

/// Plant that a record's gains act on: G itself for iPD gains, G augmented
/// with the filter poles for PI (order 1) and PID (order 2).
DiscreteTF design_plant(const GainsRecord& record, const DiscreteTF& g);

enum class InverseMethod { Semilinear, Nonlinear };
const char* to_string(InverseMethod m);
InverseMethod parse_inverse_method(const std::string& text);

struct MappedPoint {
  PidGains pid;
  IpdGains ipd;
};

struct MapResult {
  std::vector<MappedPoint> points;
  std::size_t singular = 0;  ///< sampled points without a finite iPD image
};

struct MapOptions {
  int grid = 30;  ///< samples per axis over each polygon bounding box
  InverseMethod method = InverseMethod::Nonlinear;
  int slice_stride = 1;  ///< use every n-th slice
};

/// Samples every PID polygon on a grid clipped to the polygon and maps each
/// sample to iPD2 gains, skipping singular points.
MapResult map_set(const StabilizingSet& set, const FilterConfig& f, const MapOptions& options = {});

/// Grid samples of every region of a set, in slice order (PI: K2 grid per interval).
std::vector<GainsRecord> sample_set(const StabilizingSet& set, const FilterConfig& f, int grid, int slice_stride = 1);

}  // namespace mfcforge
