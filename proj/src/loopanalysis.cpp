#include "mfcforge/loopanalysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <thread>

namespace mfcforge {

namespace {

using cd = std::complex<double>;

cd loop_value(std::span<const DiscreteTF> factors, double w) {
  const cd z = std::polar(1.0, w * factors.front().ts());
  cd v(1.0, 0.0);
  for (const auto& f : factors) v *= f(z);
  return v;
}

// Phase increment from a to b, in (-pi, pi].
double phase_step(cd a, cd b) { return std::arg(b / a); }

double wrap_deg(double deg) {
  double x = std::fmod(deg + 180.0, 360.0);
  if (x <= 0.0) x += 360.0;
  return x - 180.0;
}

}  // namespace

Poly char_poly(const DiscreteTF& controller, const DiscreteTF& plant) {
  require_same_ts(controller.ts(), plant.ts(), "char_poly");
  return (controller.den() * plant.den() + controller.num() * plant.num()).monic();
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable:
      return "stable";
    case Stability::Marginal:
      return "marginal";
    case Stability::Unstable:
      break;
  }
  return "unstable";
}

double spectral_radius(const Poly& delta) {
  double r = 0.0;
  for (const auto& z : roots(delta)) r = std::max(r, std::abs(z));
  return r;
}

Stability stability(const Poly& delta, double tol) {
  if (delta.degree() < 1) throw DomainError("stability: polynomial must have degree >= 1");
  const double r = spectral_radius(delta);
  if (r < 1.0 - tol) return Stability::Stable;
  if (r <= 1.0 + tol) return Stability::Marginal;
  return Stability::Unstable;
}

bool is_stable(const Poly& delta, double tol) { return stability(delta, tol) == Stability::Stable; }

std::vector<double> filter_response(const DiscreteTF& tf, std::span<const double> input) {
  const int n = tf.den().degree();
  const auto& a = tf.den();
  const auto& b = tf.num();
  std::vector<double> y(input.size(), 0.0);
  for (std::size_t k = 0; k < input.size(); ++k) {
    double acc = 0.0;
    // y_k + sum_{i<n} a_i y_{k-n+i} = sum_{i<=n} b_i x_{k-n+i}
    for (int i = 0; i <= n; ++i) {
      const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(k) - n + i;
      if (idx < 0) continue;
      acc += b[i] * input[idx];
      if (i < n) acc -= a[i] * y[idx];
    }
    y[k] = acc;
  }
  return y;
}

SimTrace closed_loop_response(const DiscreteTF& controller, const DiscreteTF& plant, std::span<const double> reference) {
  require_same_ts(controller.ts(), plant.ts(), "closed_loop_response");
  const double ts = controller.ts();
  SimTrace trace;
  trace.ts = ts;
  const std::size_t steps = reference.size();
  std::vector<double> y, u;
  std::vector<double> e;
  if (plant.num().degree() < plant.den().degree()) {
    // Controller and plant recursions run side by side; the strictly proper
    // plant makes y_k depend on past inputs only.
    const int np = plant.den().degree();
    const int nc = controller.den().degree();
    y.assign(steps, 0.0);
    u.assign(steps, 0.0);
    e.assign(steps, 0.0);
    for (std::size_t k = 0; k < steps; ++k) {
      double acc = 0.0;
      for (int i = 0; i < np; ++i) {
        const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(k) - np + i;
        if (idx < 0) continue;
        acc += plant.num()[i] * u[idx] - plant.den()[i] * y[idx];
      }
      y[k] = acc;
      e[k] = reference[k] - y[k];
      double v = 0.0;
      for (int i = 0; i <= nc; ++i) {
        const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(k) - nc + i;
        if (idx < 0) continue;
        v += controller.num()[i] * e[idx];
        if (i < nc) v -= controller.den()[i] * u[idx];
      }
      u[k] = v;
      if (!std::isfinite(y[k]) || std::abs(y[k]) > kDivergenceLimit) break;
    }
  } else {
    const Poly delta = controller.den() * plant.den() + controller.num() * plant.num();
    y = filter_response(DiscreteTF(controller.num() * plant.num(), delta, ts), reference);
    u = filter_response(DiscreteTF(controller.num() * plant.den(), delta, ts), reference);
  }
  for (std::size_t k = 0; k < steps; ++k) {
    if (!std::isfinite(y[k]) || std::abs(y[k]) > kDivergenceLimit) {
      trace.diverged = true;
      break;
    }
    trace.push(static_cast<double>(k) * ts, reference[k], y[k], reference[k] - y[k], u[k]);
  }
  return trace;
}

SimTrace step_response(const DiscreteTF& controller, const DiscreteTF& plant, int steps) {
  require_same_ts(controller.ts(), plant.ts(), "step_response");
  const std::vector<double> ref(static_cast<std::size_t>(std::max(steps, 0)), 1.0);
  return closed_loop_response(controller, plant, ref);
}

int default_step_horizon(double ts) { return static_cast<int>(std::ceil(60.0 / ts - 1e-9)); }

StepMetrics step_metrics(const SimTrace& trace, const StepMetricsOptions& options) {
  const std::size_t n = trace.size();
  if (n == 0) throw DomainError("step_metrics: empty trace");
  const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 * n)));
  double final = 0.0;
  for (std::size_t k = n - tail; k < n; ++k) final += trace.y[k];
  final /= static_cast<double>(tail);
  if (!(final > 0.0)) throw DomainError("step_metrics: final value must be positive");

  StepMetrics m;
  m.band = options.band;
  m.final_value = final;
  double peak = -INFINITY;
  for (std::size_t k = 0; k < n; ++k)
    if (trace.t[k] >= options.ignore_before - 1e-12) peak = std::max(peak, trace.y[k]);
  m.overshoot_pct = std::max(0.0, 100.0 * (peak - final) / final);

  const double tol = options.band * final;
  std::ptrdiff_t last_out = -1;
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(trace.y[k] - final) > tol) last_out = static_cast<std::ptrdiff_t>(k);
  const std::size_t check_from = n - std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.1 * n)));
  m.settled = last_out < static_cast<std::ptrdiff_t>(check_from);
  const std::size_t first_in = static_cast<std::size_t>(last_out + 1);
  m.settling_time = first_in < n ? trace.t[first_in] : trace.t.back() + trace.ts;
  return m;
}

Margins margins(const DiscreteTF& loop, const MarginOptions& options) {
  return margins(std::span<const DiscreteTF>(&loop, 1), options);
}

Margins margins(std::span<const DiscreteTF> factors, const MarginOptions& options) {
  if (factors.empty()) throw DomainError("margins: empty loop");
  for (const auto& f : factors) require_same_ts(f.ts(), factors.front().ts(), "margins");
  const double ts = factors.front().ts();
  const double w_max = std::numbers::pi / ts;
  const int npts = std::max(options.points, 2);
  const double lmin = std::log(options.w_min);
  const double lmax = std::log(w_max);

  std::vector<double> w(npts);
  std::vector<cd> value(npts);
  std::vector<double> phase(npts);
  for (int i = 0; i < npts; ++i) {
    w[i] = i == npts - 1 ? w_max : std::exp(lmin + (lmax - lmin) * i / (npts - 1));
    value[i] = loop_value(factors, w[i]);
    phase[i] = i == 0 ? std::arg(value[0]) : phase[i - 1] + phase_step(value[i - 1], value[i]);
  }

  // Bisection on a bracket [w[i], w[i+1]] for f(w) = 0, f continuous there.
  auto refine = [&](int i, auto&& f) {
    double a = w[i];
    double b = w[i + 1];
    double fa = f(a);
    for (int it = 0; it < 60 && b - a > 1e-14 * b; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = f(mid);
      if (fm == 0.0) return mid;
      if ((fm > 0.0) == (fa > 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  };

  Margins out;
  const double two_pi = 2.0 * std::numbers::pi;
  auto branch = [&](double ph) { return (ph - std::numbers::pi) / two_pi; };
  auto on_branch = [&](int i) {
    const double b = branch(phase[i]);
    return std::abs(b - std::round(b)) < 1e-10;
  };
  for (int i = 0; i < npts; ++i) {
    const double bi = branch(phase[i]);
    const double bj = i + 1 < npts ? branch(phase[i + 1]) : bi;
    double wc = 0.0;
    if (on_branch(i)) {
      if (i > 0 && on_branch(i - 1)) continue;
      wc = w[i];
    } else if (i + 1 < npts && !on_branch(i + 1) && std::floor(bi) != std::floor(bj)) {
      const double target = std::numbers::pi + two_pi * std::max(std::floor(bi), std::floor(bj));
      const cd base = value[i];
      const double base_phase = phase[i];
      wc = refine(i, [&](double x) { return base_phase + phase_step(base, loop_value(factors, x)) - target; });
    } else {
      continue;
    }
    const double mag = std::abs(loop_value(factors, wc));
    const double gm = -20.0 * std::log10(mag);
    if (mag < 1.0) {
      if (!out.gain_margin_db || gm < *out.gain_margin_db) {
        out.gain_margin_db = gm;
        out.phase_crossover = wc;
      }
    } else if (mag > 1.0) {
      if (!out.lower_gain_margin_db || gm > *out.lower_gain_margin_db) out.lower_gain_margin_db = gm;
    }
  }

  auto log_mag = [&](double x) { return std::log(std::abs(loop_value(factors, x))); };
  for (int i = 0; i + 1 < npts; ++i) {
    const double li = std::log(std::abs(value[i]));
    const double lj = std::log(std::abs(value[i + 1]));
    double wc = 0.0;
    double ph = 0.0;
    if (li == 0.0) {
      if (i > 0 && std::log(std::abs(value[i - 1])) == 0.0) continue;
      wc = w[i];
      ph = phase[i];
    } else if ((li > 0.0) != (lj > 0.0) && lj != 0.0) {
      wc = refine(i, log_mag);
      ph = phase[i] + phase_step(value[i], loop_value(factors, wc));
    } else {
      continue;
    }
    const double pm = wrap_deg(180.0 + ph * 180.0 / std::numbers::pi);
    if (!out.phase_margin_deg || pm < *out.phase_margin_deg) {
      out.phase_margin_deg = pm;
      out.gain_crossover = wc;
    }
  }
  return out;
}

double PerformanceSpec::ratio_to_db(double ratio) {
  if (!(ratio > 0.0)) throw DomainError("gain ratio must be positive");
  return 20.0 * std::log10(ratio);
}

CandidateReport evaluate_candidate(const GainsRecord& record, const DiscreteTF& g, const PerformanceSpec& spec) {
  CandidateReport report;
  const DiscreteTF ctrl = controller_tf(record);
  const DiscreteTF plant = design_plant(record, g);
  report.stability = stability(char_poly(ctrl, plant));
  if (report.stability != Stability::Stable) return report;

  bool pass = true;
  if (spec.os_max_pct || spec.st_max_s) {
    const SimTrace trace = step_response(ctrl, plant, spec.horizon.value_or(default_step_horizon(plant.ts())));
    if (trace.diverged) {
      pass = false;
    } else {
      try {
        report.metrics = step_metrics(trace, {.band = spec.band});
        if (spec.os_max_pct && !(report.metrics->overshoot_pct <= *spec.os_max_pct)) pass = false;
        if (spec.st_max_s && !(report.metrics->settled && report.metrics->settling_time <= *spec.st_max_s)) pass = false;
      } catch (const DomainError&) {
        pass = false;
      }
    }
  }
  if (spec.gm_min_db || spec.pm_min_deg) {
    const DiscreteTF parts[] = {ctrl, plant};
    report.margins = margins(parts);
    if (spec.gm_min_db && report.margins->gain_margin_db && !(*report.margins->gain_margin_db >= *spec.gm_min_db))
      pass = false;
    if (spec.pm_min_deg && !(report.margins->phase_margin_deg && *report.margins->phase_margin_deg >= *spec.pm_min_deg))
      pass = false;
  }
  report.pass = pass;
  return report;
}

std::vector<GainsRecord> filter_subset(const std::vector<GainsRecord>& candidates, const DiscreteTF& g,
                                       const PerformanceSpec& spec, unsigned threads,
                                       std::vector<CandidateReport>* reports) {
  if (!spec.has_bound()) throw DomainError("filter_subset: the specification has no bound");
  std::vector<CandidateReport> all(candidates.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, candidates.size()))));
  auto work = [&](unsigned id) {
    for (std::size_t i = id; i < candidates.size(); i += workers) all[i] = evaluate_candidate(candidates[i], g, spec);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
    for (auto& t : pool) t.join();
  }
  std::vector<GainsRecord> out;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (all[i].pass) out.push_back(candidates[i]);
  if (reports) *reports = std::move(all);
  return out;
}

}  // namespace mfcforge
