#pragma once

// Time-domain model-free control: ultra-local model y^(n) = F + alpha u,
// online estimate of F from filtered derivatives, and the iPD law.

#include <vector>

#include "mfcforge/lateralplant.hpp"
#include "mfcforge/mfcbridge.hpp"
#include "mfcforge/sim_trace.hpp"

namespace mfcforge {

/// One stage of (1/Ts)(z - 1)/(C z + 1 - C); state starts at zero.
struct DerivativeFilter {
  double C = 1.0;
  double ts = 0.05;
  double prev_in = 0.0;
  double prev_out = 0.0;
};

/// C y_k + (1 - C) y_{k-1} = (x_k - x_{k-1}) / Ts
double filtered_derivative_step(DerivativeFilter& f, double sample);

struct UltraLocalState {
  int order = 2;
  double F_hat = 0.0;
  std::vector<DerivativeFilter> stages;  ///< one per derivative order
  double u_prev = 0.0;

  UltraLocalState() = default;
  UltraLocalState(int order, const FilterConfig& f);
};

/// F_hat = y^(n) - alpha u_{k-1}; stores and returns it.
double f_estimate(UltraLocalState& state, double y_deriv_n, double alpha);

/// u = (-F_hat + yr^(n) + Kp e + Kd e') / alpha
double ipd_law(double f_hat, double e, double e_dot, const IpdGains& gains, double yr_deriv_n);

class IpdController {
 public:
  IpdController(const IpdGains& gains, const FilterConfig& filter);

  /// Filters e through the derivative cascade, updates F_hat and returns u_k.
  /// The output derivative estimate is yr^(n) - e^(n).
  double step(double e, double yr_deriv_n);

  const UltraLocalState& state() const { return state_; }
  const IpdGains& gains() const { return gains_; }

 private:
  IpdGains gains_;
  UltraLocalState state_;
};

enum class ReferenceKind { Step, SmoothedStep, Sampled };

/// Reference trajectory with analytic derivatives for the step kinds.
/// Smoothed step: A (1 - (1 + s/tau) e^{-s/tau}), s = t - start, a critically
/// damped second order shaping of the step.
struct ReferenceSignal {
  ReferenceKind kind = ReferenceKind::Step;
  double amplitude = 1.0;
  double tau = 0.5;
  double start = 0.0;
  std::vector<double> samples;  ///< Sampled kind, one per Ts

  double value(double t, double ts) const;
  /// n-th time derivative (n <= 2). Zero for steps; backward differences for samples.
  double derivative(double t, int n, double ts) const;
};

ReferenceSignal step_reference(double amplitude = 1.0, double start = 0.0);
/// Throws DomainError for tau <= 0.
ReferenceSignal smoothed_step_reference(double tau = 0.5, double amplitude = 1.0, double start = 0.0);
ReferenceSignal sampled_reference(std::vector<double> samples);

/// Samples at t = k Ts, k = 0..n-1.
std::vector<double> make_reference(const ReferenceSignal& ref, int n, double ts);

struct TrackingOptions {
  double disturbance = 0.0;  ///< constant value on the first disturbance column of E
};

/// Closed-loop simulation of the iPD runtime on a discrete single-input plant
/// from zero state. Stops with diverged = true once |y| exceeds 1e6.
SimTrace simulate_tracking(const StateSpace& plant, const IpdGains& gains, const FilterConfig& filter,
                           const ReferenceSignal& ref, int steps, const TrackingOptions& options = {});

}  // namespace mfcforge
