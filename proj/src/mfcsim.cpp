#include "mfcforge/mfcsim.hpp"

#include <cmath>
#include <string>

namespace mfcforge {

double filtered_derivative_step(DerivativeFilter& f, double sample) {
  const double out = ((sample - f.prev_in) / f.ts - (1.0 - f.C) * f.prev_out) / f.C;
  f.prev_in = sample;
  f.prev_out = out;
  return out;
}

UltraLocalState::UltraLocalState(int n, const FilterConfig& f) : order(n) {
  if (n != 1 && n != 2) throw DomainError("ultra-local model order must be 1 or 2");
  f.validate();
  stages.assign(static_cast<std::size_t>(n), DerivativeFilter{f.C, f.ts, 0.0, 0.0});
}

double f_estimate(UltraLocalState& state, double y_deriv_n, double alpha) {
  state.F_hat = y_deriv_n - alpha * state.u_prev;
  return state.F_hat;
}

double ipd_law(double f_hat, double e, double e_dot, const IpdGains& gains, double yr_deriv_n) {
  if (gains.alpha == 0.0) throw DomainError("ipd_law: alpha must be nonzero");
  return (-f_hat + yr_deriv_n + gains.Kp * e + gains.Kd * e_dot) / gains.alpha;
}

IpdController::IpdController(const IpdGains& gains, const FilterConfig& filter)
    : gains_(gains), state_(gains.order, filter) {
  gains_.validate();
}

double IpdController::step(double e, double yr_deriv_n) {
  double d = e;
  double e_dot = 0.0;
  for (std::size_t i = 0; i < state_.stages.size(); ++i) {
    d = filtered_derivative_step(state_.stages[i], d);
    if (i == 0) e_dot = d;
  }
  f_estimate(state_, yr_deriv_n - d, gains_.alpha);
  const double u = ipd_law(state_.F_hat, e, e_dot, gains_, yr_deriv_n);
  state_.u_prev = u;
  return u;
}

double ReferenceSignal::value(double t, double ts) const {
  switch (kind) {
    case ReferenceKind::Step:
      return t >= start - 1e-12 ? amplitude : 0.0;
    case ReferenceKind::SmoothedStep: {
      const double s = t - start;
      if (s <= 0.0) return 0.0;
      return amplitude * (1.0 - (1.0 + s / tau) * std::exp(-s / tau));
    }
    case ReferenceKind::Sampled:
      break;
  }
  if (samples.empty()) return 0.0;
  const auto k = static_cast<std::ptrdiff_t>(std::llround(t / ts));
  if (k < 0) return 0.0;
  return samples[std::min<std::size_t>(static_cast<std::size_t>(k), samples.size() - 1)];
}

double ReferenceSignal::derivative(double t, int n, double ts) const {
  if (n < 0 || n > 2) throw DomainError("reference derivative order must be 0, 1 or 2");
  if (n == 0) return value(t, ts);
  switch (kind) {
    case ReferenceKind::Step:
      return 0.0;
    case ReferenceKind::SmoothedStep: {
      const double s = t - start;
      if (s <= 0.0) return 0.0;
      const double decay = std::exp(-s / tau);
      if (n == 1) return amplitude * s / (tau * tau) * decay;
      return amplitude / (tau * tau) * (1.0 - s / tau) * decay;
    }
    case ReferenceKind::Sampled:
      break;
  }
  if (n == 1) return (value(t, ts) - value(t - ts, ts)) / ts;
  return (value(t, ts) - 2.0 * value(t - ts, ts) + value(t - 2.0 * ts, ts)) / (ts * ts);
}

ReferenceSignal step_reference(double amplitude, double start) {
  if (!std::isfinite(amplitude)) throw DomainError("reference amplitude must be finite");
  return {ReferenceKind::Step, amplitude, 0.0, start, {}};
}

ReferenceSignal smoothed_step_reference(double tau, double amplitude, double start) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("smoothed step: tau must be positive");
  if (!std::isfinite(amplitude)) throw DomainError("reference amplitude must be finite");
  return {ReferenceKind::SmoothedStep, amplitude, tau, start, {}};
}

ReferenceSignal sampled_reference(std::vector<double> samples) {
  for (double v : samples)
    if (!std::isfinite(v)) throw DomainError("reference samples must be finite");
  ReferenceSignal r;
  r.kind = ReferenceKind::Sampled;
  r.samples = std::move(samples);
  return r;
}

std::vector<double> make_reference(const ReferenceSignal& ref, int n, double ts) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = ref.value(static_cast<double>(k) * ts, ts);
  return out;
}

SimTrace simulate_tracking(const StateSpace& plant, const IpdGains& gains, const FilterConfig& filter,
                           const ReferenceSignal& ref, int steps, const TrackingOptions& options) {
  plant.validate();
  if (!plant.is_discrete()) throw InputError("simulate_tracking: plant must be discrete");
  require_same_ts(*plant.ts, filter.ts, "simulate_tracking");
  if (plant.B.cols() != 1) throw InputError("simulate_tracking: plant must have a single control input");
  if (plant.D.size() > 0 && plant.D(0, 0) != 0.0) throw InputError("simulate_tracking: plant must be strictly proper");
  if (steps < 0) throw DomainError("simulate_tracking: negative step count");

  IpdController ctrl(gains, filter);
  const double ts = filter.ts;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.states());
  Eigen::VectorXd w;
  if (options.disturbance != 0.0) {
    if (plant.E.cols() < 1) throw InputError("simulate_tracking: plant has no disturbance input");
    w = plant.E.col(0) * options.disturbance;
  }
  SimTrace trace;
  trace.ts = ts;
  for (int k = 0; k < steps; ++k) {
    const double t = k * ts;
    const double y = plant.C.row(0).dot(x);
    if (!std::isfinite(y) || std::abs(y) > kDivergenceLimit) {
      trace.diverged = true;
      break;
    }
    const double r = ref.value(t, ts);
    const double e = r - y;
    const double u = ctrl.step(e, ref.derivative(t, gains.order, ts));
    trace.push(t, r, y, e, u);
    x = plant.A * x + plant.B.col(0) * u;
    if (w.size() > 0) x += w;
  }
  return trace;
}

}  // namespace mfcforge
