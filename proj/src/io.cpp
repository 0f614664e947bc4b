#include "mfcforge/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace mfcforge::io {

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
      throw InputError(std::string(what) + ": ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

json poly_json(const Poly& p) { return p.toVector(); }
Poly poly_from(const json& j) { return Poly(j.get<std::vector<double>>()); }

json ss_json(const StateSpace& ss) {
  json j{{"A", matrix_json(ss.A)}, {"B", matrix_json(ss.B)}, {"C", matrix_json(ss.C)},
         {"D", matrix_json(ss.D)}, {"E", matrix_json(ss.E)}};
  if (ss.ts) j["ts"] = *ss.ts;
  return j;
}

StateSpace ss_from(const json& j) {
  StateSpace ss;
  ss.A = matrix_from(j.at("A"), "A");
  ss.B = matrix_from(j.at("B"), "B");
  ss.C = matrix_from(j.at("C"), "C");
  ss.D = matrix_from(j.at("D"), "D");
  if (j.contains("E")) ss.E = matrix_from(j.at("E"), "E");
  if (j.contains("ts")) ss.ts = j.at("ts").get<double>();
  ss.validate();
  return ss;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Converts library and json exceptions on malformed content into InputError.
template <typename F>
auto parse_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw InputError("cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot replace " + path.string());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": malformed JSON (" + e.what() + ")");
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

VehicleParams params_from_json(const json& j) {
  return parse_guard("vehicle parameters", [&] {
    if (!j.is_object()) throw InputError("vehicle parameters: expected an object");
    VehicleParams p;
    for (const char* key : {"m", "vx", "Iz", "Cf", "Cr", "lf", "lr"})
      if (!j.contains(key)) throw InputError(std::string("vehicle parameters: missing key '") + key + "'");
    p.m = j.at("m").get<double>();
    p.vx = j.at("vx").get<double>();
    p.Iz = j.at("Iz").get<double>();
    p.Cf = j.at("Cf").get<double>();
    p.Cr = j.at("Cr").get<double>();
    p.lf = j.at("lf").get<double>();
    p.lr = j.at("lr").get<double>();
    p.validate();
    return p;
  });
}

json to_json(const VehicleParams& p) {
  return {{"m", p.m}, {"vx", p.vx}, {"Iz", p.Iz}, {"Cf", p.Cf}, {"Cr", p.Cr}, {"lf", p.lf}, {"lr", p.lr}};
}

PlantFile make_plant_file(const VehicleParams& params, double ts) {
  PlantFile f;
  f.params = params;
  f.continuous = build_lateral_ss(params);
  f.discrete = zoh_discretize(f.continuous, ts);
  f.tf = ss_to_tf(f.discrete);
  return f;
}

json to_json(const PlantFile& plant) {
  return {{"params", to_json(plant.params)},
          {"ts", plant.tf.ts()},
          {"continuous", ss_json(plant.continuous)},
          {"discrete", ss_json(plant.discrete)},
          {"tf", {{"num", poly_json(plant.tf.num())}, {"den", poly_json(plant.tf.den())}}}};
}

PlantFile plant_from_json(const json& j) {
  return parse_guard("plant file", [&] {
    PlantFile f;
    f.params = params_from_json(j.at("params"));
    const double ts = j.at("ts").get<double>();
    f.continuous = ss_from(j.at("continuous"));
    f.discrete = ss_from(j.at("discrete"));
    if (!f.discrete.ts) f.discrete.ts = ts;
    f.tf = DiscreteTF(poly_from(j.at("tf").at("num")), poly_from(j.at("tf").at("den")), ts);
    return f;
  });
}

json to_json(const SetFile& s) {
  const auto& set = s.set;
  json slices = json::array();
  for (const auto& slice : set.slices) {
    json intervals = json::array();
    for (const auto& iv : slice.intervals) intervals.push_back({iv.lo, iv.hi});
    json polygons = json::array();
    for (const auto& poly : slice.polygons) {
      json verts = json::array();
      for (const auto& v : poly.vertices) verts.push_back({v.x(), v.y()});
      polygons.push_back(std::move(verts));
    }
    json js{{"gate", slice.gate}};
    if (set.kind == ControllerKind::PI)
      js["intervals"] = std::move(intervals);
    else
      js["polygons"] = std::move(polygons);
    slices.push_back(std::move(js));
  }
  return {{"kind", to_string(set.kind)},
          {"gate", set.kind == ControllerKind::PI ? "K1" : "K3"},
          {"unknowns", set.kind == ControllerKind::PI ? json{"K2"} : json{"K1", "K2"}},
          {"C", s.filter.C},
          {"ts", s.filter.ts},
          {"empty", set.empty()},
          {"sweep", {{"lo", set.sweep.lo}, {"hi", set.sweep.hi}, {"steps", set.sweep.steps}}},
          {"box", {{"k1_lo", set.box.k1_lo}, {"k1_hi", set.box.k1_hi}, {"k2_lo", set.box.k2_lo}, {"k2_hi", set.box.k2_hi}}},
          {"signature",
           {{"sigma", set.signature.sigma}, {"i_delta", set.signature.i_delta}, {"i_nr", set.signature.i_nr}, {"l1", set.signature.l1}}},
          {"slices", std::move(slices)}};
}

SetFile set_from_json(const json& j) {
  return parse_guard("set file", [&] {
    SetFile s;
    auto& set = s.set;
    set.kind = parse_controller_kind(j.at("kind").get<std::string>());
    s.filter = {j.at("C").get<double>(), j.at("ts").get<double>()};
    const auto& sw = j.at("sweep");
    set.sweep = {sw.at("lo").get<double>(), sw.at("hi").get<double>(), sw.at("steps").get<int>()};
    const auto& bx = j.at("box");
    set.box = {bx.at("k1_lo").get<double>(), bx.at("k1_hi").get<double>(), bx.at("k2_lo").get<double>(),
               bx.at("k2_hi").get<double>()};
    const auto& sg = j.at("signature");
    set.signature = {sg.at("sigma").get<int>(), sg.at("i_delta").get<int>(), sg.at("i_nr").get<int>(),
                     sg.at("l1").get<int>()};
    for (const auto& js : j.at("slices")) {
      StabRegionSlice slice;
      slice.gate = js.at("gate").get<double>();
      if (js.contains("intervals"))
        for (const auto& iv : js.at("intervals")) slice.intervals.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
      if (js.contains("polygons")) {
        for (const auto& jp : js.at("polygons")) {
          ConvexPolygon poly;
          for (const auto& v : jp) poly.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
          slice.polygons.push_back(std::move(poly));
        }
      }
      set.slices.push_back(std::move(slice));
    }
    return s;
  });
}

json to_json(const ControllerFile& c) {
  return {{"Kp", c.gains.Kp}, {"Kd", c.gains.Kd}, {"alpha", c.gains.alpha},
          {"n", c.gains.order}, {"C", c.filter.C}, {"Ts", c.filter.ts}};
}

ControllerFile controller_from_json(const json& j) {
  return parse_guard("controller file", [&] {
    ControllerFile c;
    c.gains.Kp = j.at("Kp").get<double>();
    c.gains.Kd = j.at("Kd").get<double>();
    c.gains.alpha = j.at("alpha").get<double>();
    c.gains.order = j.value("n", 2);
    c.filter = {j.at("C").get<double>(), j.at("Ts").get<double>()};
    c.gains.validate();
    c.filter.validate();
    return c;
  });
}

std::string cloud_to_csv(const std::vector<CloudRow>& rows) {
  std::string out = std::string(kCloudHeader) + "\n";
  for (const auto& r : rows)
    out += fmt(r.K3) + "," + fmt(r.K1) + "," + fmt(r.K2) + "," + fmt(r.Kp) + "," + fmt(r.Kd) + "," + fmt(r.alpha) + "\n";
  return out;
}

std::vector<CloudRow> cloud_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCloudHeader) throw InputError("cloud: expected header " + std::string(kCloudHeader));
  std::vector<CloudRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v[6];
    std::size_t pos = 0;
    for (int i = 0; i < 6; ++i) {
      const std::size_t end = line.find(',', pos);
      if ((i < 5) != (end != std::string::npos)) throw InputError("cloud: line " + std::to_string(lineno) + " needs 6 fields");
      const std::string field = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      char* stop = nullptr;
      v[i] = std::strtod(field.c_str(), &stop);
      if (field.empty() || *stop != '\0') throw InputError("cloud: line " + std::to_string(lineno) + " has a bad number");
      pos = end + 1;
    }
    rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
  }
  return rows;
}

std::string trace_to_csv(const SimTrace& trace) {
  std::string out = std::string(kTraceHeader) + "\n";
  for (std::size_t k = 0; k < trace.size(); ++k)
    out += fmt(trace.t[k]) + "," + fmt(trace.ref[k]) + "," + fmt(trace.y[k]) + "," + fmt(trace.e[k]) + "," +
           fmt(trace.u[k]) + "\n";
  return out;
}

json to_json(const StepMetrics& m) {
  return {{"os_pct", m.overshoot_pct}, {"st_s", m.settled ? json(m.settling_time) : json(nullptr)},
          {"band", m.band}, {"settled", m.settled}, {"final_value", m.final_value}};
}

json to_json(const Margins& m) {
  return {{"gm_db", optional_number(m.gain_margin_db)},
          {"gm_ratio", m.gain_margin_db ? json(std::pow(10.0, *m.gain_margin_db / 20.0)) : json(nullptr)},
          {"gm_infinite", m.gain_margin_infinite()},
          {"phase_crossover", optional_number(m.phase_crossover)},
          {"lower_gm_db", optional_number(m.lower_gain_margin_db)},
          {"pm_deg", optional_number(m.phase_margin_deg)},
          {"gain_crossover", optional_number(m.gain_crossover)}};
}

json to_json(const CandidateReport& r) {
  json j{{"stability", to_string(r.stability)}, {"pass", r.pass}};
  if (r.metrics) j["metrics"] = to_json(*r.metrics);
  if (r.margins) j["margins"] = to_json(*r.margins);
  return j;
}

}  // namespace mfcforge::io
