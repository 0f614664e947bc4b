// mfcforge: design pipeline for discrete PI/PID stabilizing sets and their
// model-free (iPD) counterparts.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "mfcforge/io.hpp"
#include "mfcforge/mfcsim.hpp"

namespace fs = std::filesystem;
using namespace mfcforge;
using io::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitDiverged = 3;

unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MFCFORGE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) throw InputError("MFCFORGE_THREADS must be a positive integer");
    n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

void require_distinct(std::initializer_list<const std::string*> paths) {
  std::vector<std::string> seen;
  for (const auto* p : paths) {
    if (p->empty()) continue;
    const std::string norm = fs::weakly_canonical(*p).string();
    if (std::find(seen.begin(), seen.end(), norm) != seen.end()) throw InputError("input and output paths must differ");
    seen.push_back(norm);
  }
}

bool looks_like_cloud(const std::string& text) { return text.rfind(io::kCloudHeader, 0) == 0; }

io::CloudRow cloud_row(const GainsRecord& record, std::optional<IpdGains> mapped) {
  io::CloudRow row;
  if (const auto* pid = std::get_if<PidGains>(&record.gains)) {
    row.K3 = pid->K3();
    row.K1 = pid->K1;
    row.K2 = pid->K2;
  }
  if (const auto* ipd = std::get_if<IpdGains>(&record.gains)) mapped = *ipd;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.Kp = mapped ? mapped->Kp : nan;
  row.Kd = mapped ? mapped->Kd : nan;
  row.alpha = mapped ? mapped->alpha : nan;
  return row;
}

struct PlantCmd {
  std::string params, out;
  double ts = 0.05;
};

int run_plant(const PlantCmd& c) {
  require_distinct({&c.params, &c.out});
  if (!(c.ts > 0.0)) throw InputError("--ts must be positive");
  const auto params = io::params_from_json(io::read_json(c.params));
  io::write_text_atomic(c.out, io::dump(io::to_json(io::make_plant_file(params, c.ts))));
  return 0;
}

struct StabsetCmd {
  std::string plant, out, kind = "pid";
  double C = 1.0;
  std::optional<double> gate_lo, gate_hi;
  int steps = 400;
  std::optional<double> k1_lo, k1_hi, k2_lo, k2_hi;
};

int run_stabset(const StabsetCmd& c) {
  require_distinct({&c.plant, &c.out});
  const auto kind = parse_controller_kind(c.kind);
  const auto plant = io::plant_from_json(io::read_json(c.plant));
  const bool pid = kind == ControllerKind::PID;
  SweepConfig sweep{c.gate_lo.value_or(pid ? 0.0 : -1.0), c.gate_hi.value_or(pid ? 0.3 : 1.0), c.steps};
  try {
    sweep.validate();
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
  RegionBox box;
  if (pid) box = {-20.0, 2.0, -2.0, 10.0};
  box.k1_lo = c.k1_lo.value_or(box.k1_lo);
  box.k1_hi = c.k1_hi.value_or(box.k1_hi);
  box.k2_lo = c.k2_lo.value_or(box.k2_lo);
  box.k2_hi = c.k2_hi.value_or(box.k2_hi);
  const FilterConfig filter{c.C, plant.tf.ts()};
  filter.validate();
  const DiscreteTF g = augment_with_filter_poles(plant.tf, c.C, pid ? 2 : 1);
  io::SetFile file{stabilizing_set(g, kind, sweep, box, {thread_budget()}), filter};
  io::write_text_atomic(c.out, io::dump(io::to_json(file)));
  return 0;
}

struct TransformCmd {
  std::string set, out, method = "nonlinear";
  std::optional<double> C, ts;
  int grid = 30;
  int slice_stride = 1;
};

int run_transform(const TransformCmd& c) {
  require_distinct({&c.set, &c.out});
  const auto file = io::set_from_json(io::read_json(c.set));
  if (file.set.kind != ControllerKind::PID) throw InputError("transform needs a pid set for iPD2 gains");
  const FilterConfig filter{c.C.value_or(file.filter.C), c.ts.value_or(file.filter.ts)};
  filter.validate();
  MapOptions opts;
  opts.grid = c.grid;
  opts.method = parse_inverse_method(c.method);
  opts.slice_stride = c.slice_stride;
  const MapResult res = map_set(file.set, filter, opts);
  std::vector<io::CloudRow> rows;
  for (const auto& p : res.points)
    rows.push_back({p.pid.K3(), p.pid.K1, p.pid.K2, p.ipd.Kp, p.ipd.Kd, p.ipd.alpha});
  io::write_text_atomic(c.out, io::cloud_to_csv(rows));
  std::printf("points %zu singular %zu\n", res.points.size(), res.singular);
  return 0;
}

struct FilterCmd {
  std::string input, plant, out, report, gm_unit = "ratio";
  std::optional<double> C, gm_min, pm_min, os_max, st_max;
  double band = 0.02;
  int grid = 10;
  int slice_stride = 1;
};

int run_filter(const FilterCmd& c) {
  require_distinct({&c.input, &c.plant, &c.out, &c.report});
  PerformanceSpec spec;
  if (c.gm_min) {
    if (c.gm_unit == "ratio")
      spec.gm_min_db = PerformanceSpec::ratio_to_db(*c.gm_min);
    else if (c.gm_unit == "db")
      spec.gm_min_db = *c.gm_min;
    else
      throw InputError("--gm-unit must be 'ratio' or 'db'");
  }
  spec.pm_min_deg = c.pm_min;
  spec.os_max_pct = c.os_max;
  spec.st_max_s = c.st_max;
  spec.band = c.band;
  if (!spec.has_bound()) throw InputError("filter needs at least one of --gm-min, --pm-min-deg, --os-max, --st-max");
  if (!(c.band > 0.0 && c.band < 1.0)) throw InputError("--band must lie in (0, 1)");

  const auto plant = io::plant_from_json(io::read_json(c.plant));
  const double ts = plant.tf.ts();
  const std::string text = io::read_text(c.input);
  std::vector<GainsRecord> candidates;
  std::vector<io::CloudRow> source;
  FilterConfig filter{c.C.value_or(1.0), ts};
  if (looks_like_cloud(text)) {
    if (!c.C) throw InputError("filtering a cloud needs --C");
    filter.validate();
    source = io::cloud_from_csv(text);
    for (const auto& r : source) candidates.push_back({IpdGains{r.Kp, r.Kd, r.alpha, 2}, filter});
  } else {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw InputError(c.input + ": neither a cloud nor a set file");
    }
    const auto file = io::set_from_json(j);
    if (file.set.kind != ControllerKind::PID) throw InputError("filter accepts pid sets or iPD clouds");
    require_same_ts(file.filter.ts, ts, "filter");
    filter = {c.C.value_or(file.filter.C), ts};
    filter.validate();
    candidates = sample_set(file.set, filter, c.grid, c.slice_stride);
  }

  std::vector<CandidateReport> reports;
  filter_subset(candidates, plant.tf, spec, thread_budget(), &reports);
  std::vector<io::CloudRow> rows;
  json entries = json::array();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::optional<IpdGains> mapped;
    if (const auto* pid = std::get_if<PidGains>(&candidates[i].gains)) {
      try {
        mapped = pid_to_ipd2_nonlinear(*pid, filter);
      } catch (const SingularityError&) {
      }
    }
    const auto row = source.empty() ? cloud_row(candidates[i], mapped) : source[i];
    if (reports[i].pass) rows.push_back(row);
    json e = io::to_json(reports[i]);
    e["gains"] = {{"K3", row.K3}, {"K1", row.K1}, {"K2", row.K2}, {"Kp", row.Kp}, {"Kd", row.Kd}, {"alpha", row.alpha}};
    entries.push_back(std::move(e));
  }
  io::write_text_atomic(c.out, io::cloud_to_csv(rows));
  if (!c.report.empty()) {
    json spec_json{{"band", spec.band}};
    if (spec.gm_min_db) spec_json["gm_min_db"] = *spec.gm_min_db;
    if (spec.pm_min_deg) spec_json["pm_min_deg"] = *spec.pm_min_deg;
    if (spec.os_max_pct) spec_json["os_max_pct"] = *spec.os_max_pct;
    if (spec.st_max_s) spec_json["st_max_s"] = *spec.st_max_s;
    const json report{{"spec", spec_json}, {"C", filter.C}, {"ts", ts}, {"candidates", candidates.size()},
                      {"passed", rows.size()}, {"entries", std::move(entries)}};
    io::write_text_atomic(c.report, io::dump(report));
  }
  std::printf("candidates %zu passed %zu\n", candidates.size(), rows.size());
  return 0;
}

struct SimulateCmd {
  std::string plant, controller, out, metrics, ref = "step";
  double tau = 0.5;
  double amplitude = 1.0;
  double band = 0.02;
  std::optional<int> n;
};

int run_simulate(const SimulateCmd& c) {
  require_distinct({&c.plant, &c.controller, &c.out, &c.metrics});
  const auto plant = io::plant_from_json(io::read_json(c.plant));
  const auto ctrl = io::controller_from_json(io::read_json(c.controller));
  ReferenceSignal ref;
  if (c.ref == "step")
    ref = step_reference(c.amplitude);
  else if (c.ref == "smoothstep")
    ref = smoothed_step_reference(c.tau, c.amplitude);
  else
    throw InputError("--ref must be 'step' or 'smoothstep'");
  const int n = c.n.value_or(default_step_horizon(ctrl.filter.ts));
  if (n < 1) throw InputError("--n must be positive");

  const SimTrace trace = simulate_tracking(plant.discrete, ctrl.gains, ctrl.filter, ref, n);
  io::write_text_atomic(c.out, io::trace_to_csv(trace));
  json m{{"diverged", trace.diverged}, {"samples", trace.size()}, {"band", c.band}};
  if (!trace.diverged) {
    try {
      const auto sm = step_metrics(trace, {.band = c.band, .ignore_before = 5.0 * ctrl.filter.ts});
      m = io::to_json(sm);
      m["diverged"] = false;
      m["samples"] = trace.size();
    } catch (const DomainError&) {
      m["os_pct"] = nullptr;
      m["st_s"] = nullptr;
      m["settled"] = nullptr;
    }
  }
  if (!c.metrics.empty()) io::write_text_atomic(c.metrics, io::dump(m));
  if (trace.diverged) {
    std::fprintf(stderr, "mfcforge: diverged: |y| exceeded 1e6 at sample %zu\n", trace.size());
    return kExitDiverged;
  }
  return 0;
}

struct MarginsCmd {
  std::string plant, controller, out;
  int points = 2000;
};

int run_margins(const MarginsCmd& c) {
  require_distinct({&c.plant, &c.controller, &c.out});
  const auto plant = io::plant_from_json(io::read_json(c.plant));
  const auto ctrl = io::controller_from_json(io::read_json(c.controller));
  require_same_ts(plant.tf.ts(), ctrl.filter.ts, "margins");
  const DiscreteTF parts[] = {controller_tf(ctrl.gains, ctrl.filter), plant.tf};
  json j = io::to_json(margins(parts, {.points = c.points}));
  j["stability"] = to_string(stability(char_poly(parts[0], parts[1])));
  const std::string text = io::dump(j);
  if (c.out.empty())
    std::fputs(text.c_str(), stdout);
  else
    io::write_text_atomic(c.out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilizing sets of discrete PI/PID controllers and their model-free iPD equivalents"};
  app.require_subcommand(1);

  PlantCmd plant;
  auto* sp = app.add_subcommand("plant", "Discretize the lateral vehicle model");
  sp->add_option("--params", plant.params, "Vehicle parameter JSON")->required();
  sp->add_option("--ts", plant.ts, "Sample time [s]");
  sp->add_option("--out", plant.out, "Plant JSON")->required();

  StabsetCmd stab;
  auto* ss = app.add_subcommand("stabset", "Compute the PI or PID stabilizing set");
  ss->add_option("--plant", stab.plant)->required();
  ss->add_option("--kind", stab.kind, "pi or pid");
  ss->add_option("--C", stab.C, "Derivative filter constant (>= 1)");
  ss->add_option("--gate-lo", stab.gate_lo);
  ss->add_option("--gate-hi", stab.gate_hi);
  ss->add_option("--steps", stab.steps, "Gate samples (>= 2)");
  ss->add_option("--k1-lo", stab.k1_lo);
  ss->add_option("--k1-hi", stab.k1_hi);
  ss->add_option("--k2-lo", stab.k2_lo);
  ss->add_option("--k2-hi", stab.k2_hi);
  ss->add_option("--out", stab.out)->required();

  TransformCmd tr;
  auto* st = app.add_subcommand("transform", "Map a PID set to an iPD2 gain cloud");
  st->add_option("--set", tr.set)->required();
  st->add_option("--C", tr.C, "Defaults to the set's C");
  st->add_option("--ts", tr.ts, "Defaults to the set's Ts");
  st->add_option("--method", tr.method, "semilinear or nonlinear");
  st->add_option("--grid", tr.grid, "Samples per axis and polygon");
  st->add_option("--slice-stride", tr.slice_stride);
  st->add_option("--out", tr.out, "Cloud CSV")->required();

  FilterCmd fl;
  auto* sf = app.add_subcommand("filter", "Keep candidates meeting margin / time-response bounds");
  sf->add_option("--input", fl.input, "Set JSON or cloud CSV")->required();
  sf->add_option("--plant", fl.plant)->required();
  sf->add_option("--C", fl.C);
  sf->add_option("--gm-min", fl.gm_min);
  sf->add_option("--gm-unit", fl.gm_unit, "ratio or db");
  sf->add_option("--pm-min-deg", fl.pm_min);
  sf->add_option("--os-max", fl.os_max, "Percent");
  sf->add_option("--st-max", fl.st_max, "Seconds");
  sf->add_option("--band", fl.band, "Settling band fraction");
  sf->add_option("--grid", fl.grid, "Samples per axis when the input is a set");
  sf->add_option("--slice-stride", fl.slice_stride);
  sf->add_option("--out", fl.out, "Cloud CSV")->required();
  sf->add_option("--report", fl.report, "Per-candidate JSON report");

  SimulateCmd sim;
  auto* sm = app.add_subcommand("simulate", "Run the iPD controller on the discrete plant");
  sm->add_option("--plant", sim.plant)->required();
  sm->add_option("--controller", sim.controller)->required();
  sm->add_option("--ref", sim.ref, "step or smoothstep");
  sm->add_option("--tau", sim.tau, "Smoothing time constant [s]");
  sm->add_option("--amplitude", sim.amplitude);
  sm->add_option("--band", sim.band);
  sm->add_option("--n", sim.n, "Samples");
  sm->add_option("--out", sim.out, "Trace CSV")->required();
  sm->add_option("--metrics", sim.metrics, "Metrics JSON");

  MarginsCmd mg;
  auto* sg = app.add_subcommand("margins", "Gain and phase margins of an iPD loop");
  sg->add_option("--plant", mg.plant)->required();
  sg->add_option("--controller", mg.controller)->required();
  sg->add_option("--points", mg.points);
  sg->add_option("--out", mg.out, "JSON; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "mfcforge: usage: %s\n", e.what());
    return kExitInput;
  }

  try {
    if (*sp) return run_plant(plant);
    if (*ss) return run_stabset(stab);
    if (*st) return run_transform(tr);
    if (*sf) return run_filter(fl);
    if (*sm) return run_simulate(sim);
    if (*sg) return run_margins(mg);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::fprintf(stderr, "mfcforge: error: %s\n", msg.c_str());
    return kExitInput;
  }
  return kExitInput;
}
