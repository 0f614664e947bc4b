#pragma once

// Closed-loop stability, step-response metrics, frequency-response margins
// and specification filtering of candidate controllers.

#include <optional>
#include <span>
#include <vector>

#include "mfcforge/discrete_tf.hpp"
#include "mfcforge/mfcbridge.hpp"
#include "mfcforge/sim_trace.hpp"

namespace mfcforge {

/// delta(z) = den(C) den(G) + num(C) num(G), monic.
Poly char_poly(const DiscreteTF& controller, const DiscreteTF& plant);

enum class Stability { Stable, Marginal, Unstable };
const char* to_string(Stability s);

/// Stable iff every root has |z| < 1 - tol; Marginal if the largest root
/// modulus lies within tol of 1.
Stability stability(const Poly& delta, double tol = 1e-9);
bool is_stable(const Poly& delta, double tol = 1e-9);
double spectral_radius(const Poly& delta);

/// Zero-initial-condition response of a rational filter to an input sequence.
std::vector<double> filter_response(const DiscreteTF& tf, std::span<const double> input);

/// Response of the unity-feedback loop C G / (1 + C G) to a reference sequence.
SimTrace closed_loop_response(const DiscreteTF& controller, const DiscreteTF& plant, std::span<const double> reference);

/// Unit-step response over `steps` samples. Divergent traces are flagged, not thrown.
SimTrace step_response(const DiscreteTF& controller, const DiscreteTF& plant, int steps);

/// Default horizon ceil(60 s / Ts).
int default_step_horizon(double ts);

struct StepMetrics {
  double overshoot_pct = 0.0;
  double settling_time = 0.0;  ///< seconds; meaningless when !settled
  double band = 0.02;
  double final_value = 0.0;
  bool settled = false;
};

struct StepMetricsOptions {
  double band = 0.02;
  double ignore_before = 0.0;  ///< seconds excluded from the peak search
};

/// Overshoot relative to the final value (mean of the last 5% of samples) and
/// settling time into +-band*final. Throws DomainError if the final value is <= 0.
StepMetrics step_metrics(const SimTrace& trace, const StepMetricsOptions& options = {});

struct Margins {
  std::optional<double> gain_margin_db;       ///< empty = infinite (no phase crossover with |L| < 1)
  std::optional<double> phase_crossover;      ///< rad/s
  std::optional<double> lower_gain_margin_db; ///< crossover with |L| > 1 (gain reduction margin), if any
  std::optional<double> phase_margin_deg;     ///< empty = undefined (no gain crossover)
  std::optional<double> gain_crossover;       ///< rad/s

  bool gain_margin_infinite() const { return !gain_margin_db.has_value(); }
};

struct MarginOptions {
  int points = 2000;
  double w_min = 1e-3;  ///< rad/s; the upper end is pi / Ts
};

/// Margins of the open loop L = product of the given factors, evaluated
/// factor by factor on a logarithmic frequency grid up to Nyquist.
Margins margins(std::span<const DiscreteTF> factors, const MarginOptions& options = {});
Margins margins(const DiscreteTF& loop, const MarginOptions& options = {});

struct PerformanceSpec {
  std::optional<double> gm_min_db;
  std::optional<double> pm_min_deg;
  std::optional<double> os_max_pct;
  std::optional<double> st_max_s;
  double band = 0.02;
  std::optional<int> horizon;  ///< samples; default_step_horizon when empty

  bool has_bound() const { return gm_min_db || pm_min_deg || os_max_pct || st_max_s; }
  static double ratio_to_db(double ratio);
};

struct CandidateReport {
  Stability stability = Stability::Unstable;
  std::optional<StepMetrics> metrics;
  std::optional<Margins> margins;
  bool pass = false;
};

/// Evaluates one record against the spec on plant G.
CandidateReport evaluate_candidate(const GainsRecord& record, const DiscreteTF& g, const PerformanceSpec& spec);

/// Candidates whose closed loop is stable and meets every bound, in input
/// order. Throws DomainError when the spec has no bound.
std::vector<GainsRecord> filter_subset(const std::vector<GainsRecord>& candidates, const DiscreteTF& g,
                                       const PerformanceSpec& spec, unsigned threads = 1,
                                       std::vector<CandidateReport>* reports = nullptr);

}  // namespace mfcforge
