#pragma once

// File formats: JSON for structured artifacts, CSV for point clouds and traces.
// Polynomial coefficients are stored in ascending powers.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "mfcforge/lateralplant.hpp"
#include "mfcforge/loopanalysis.hpp"
#include "mfcforge/mfcbridge.hpp"
#include "mfcforge/tchebset.hpp"

namespace mfcforge::io {

using nlohmann::json;

/// Writes through a temporary file in the same directory and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
/// Throws InputError on unreadable or malformed files.
json read_json(const std::filesystem::path& path);
std::string dump(const json& j);

VehicleParams params_from_json(const json& j);
json to_json(const VehicleParams& p);

struct PlantFile {
  VehicleParams params;
  StateSpace continuous;
  StateSpace discrete;
  DiscreteTF tf;
};

PlantFile make_plant_file(const VehicleParams& params, double ts);
json to_json(const PlantFile& plant);
PlantFile plant_from_json(const json& j);

struct SetFile {
  StabilizingSet set;
  FilterConfig filter;
};

json to_json(const SetFile& s);
SetFile set_from_json(const json& j);

struct ControllerFile {
  IpdGains gains;
  FilterConfig filter;
};

json to_json(const ControllerFile& c);
ControllerFile controller_from_json(const json& j);

struct CloudRow {
  double K3 = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
  double Kp = 0.0;
  double Kd = 0.0;
  double alpha = 0.0;
};

inline constexpr const char* kCloudHeader = "K3,K1,K2,Kp,Kd,alpha";
inline constexpr const char* kTraceHeader = "t,ref,y,e,u";

std::string cloud_to_csv(const std::vector<CloudRow>& rows);
std::vector<CloudRow> cloud_from_csv(const std::string& text);
std::string trace_to_csv(const SimTrace& trace);

json to_json(const StepMetrics& m);
json to_json(const Margins& m);
/// Per-candidate report entry; absent metrics or margins are omitted.
json to_json(const CandidateReport& r);

}  // namespace mfcforge::io
