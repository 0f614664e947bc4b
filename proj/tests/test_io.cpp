#include "doctest.h"

#include <filesystem>

#include "mfcforge/io.hpp"
#include "support.hpp"

using namespace mfcforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mfcforge_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("vehicle parameters from JSON") {
  const auto j = io::to_json(VehicleParams::reference_car());
  CHECK(io::params_from_json(j).vx == 9.72);
  auto missing = j;
  missing.erase("vx");
  CHECK_THROWS_AS(io::params_from_json(missing), InputError);
  auto wrong = j;
  wrong["m"] = "heavy";
  CHECK_THROWS_AS(io::params_from_json(wrong), InputError);
  wrong["m"] = -3.0;
  CHECK_THROWS_AS(io::params_from_json(wrong), DomainError);
}

TEST_CASE("plant file round trip is byte identical") {
  const auto plant = io::make_plant_file(VehicleParams::reference_car(), 0.05);
  const std::string a = io::dump(io::to_json(plant));
  const auto back = io::plant_from_json(io::json::parse(a));
  CHECK(io::dump(io::to_json(back)) == a);
  CHECK(back.tf.ts() == 0.05);
  CHECK(back.tf.den() == plant.tf.den());
}

TEST_CASE("set file round trip") {
  const auto g = augment_with_filter_poles(support::reference_plant(), 4.0, 2);
  io::SetFile file{stabilizing_set(g, ControllerKind::PID, {0.0, 0.3, 20}, {-20, 2, -2, 10}), {4.0, 0.05}};
  const std::string a = io::dump(io::to_json(file));
  const auto back = io::set_from_json(io::json::parse(a));
  CHECK(io::dump(io::to_json(back)) == a);
  CHECK(back.set.slices.size() == file.set.slices.size());
  CHECK_THROWS_AS(io::set_from_json(io::json{{"kind", "pid"}}), InputError);
}

TEST_CASE("controller file and clouds") {
  const io::ControllerFile c{support::published_controllers()[0], support::published_filter()};
  const auto back = io::controller_from_json(io::to_json(c));
  CHECK(back.gains.alpha == 315.7);
  CHECK(back.filter.C == 4.0);

  std::vector<io::CloudRow> rows = {{0.1, -2.0, 1.0, 0.001, 0.04, 300.0}, {1.0 / 3.0, -1e-17, 2.5, 0, 0, 1}};
  const std::string csv = io::cloud_to_csv(rows);
  const auto parsed = io::cloud_from_csv(csv);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[1].K3 == 1.0 / 3.0);
  CHECK(io::cloud_to_csv(parsed) == csv);
  CHECK_THROWS_AS(io::cloud_from_csv("a,b\n1,2\n"), InputError);
  CHECK_THROWS_AS(io::cloud_from_csv(std::string(io::kCloudHeader) + "\n1,2,3\n"), InputError);
  CHECK(io::cloud_from_csv(std::string(io::kCloudHeader) + "\n").empty());
}

TEST_CASE("atomic writes replace the file and leave no temporaries") {
  const auto p = scratch("atomic.txt");
  io::write_text_atomic(p, "one");
  io::write_text_atomic(p, "two");
  CHECK(io::read_text(p) == "two");
  int files = 0;
  for (const auto& e : fs::directory_iterator(p.parent_path())) files += e.path().filename().string().find(".tmp") != std::string::npos;
  CHECK(files == 0);
  CHECK_THROWS_AS(io::read_json(scratch("missing.json")), InputError);
  io::write_text_atomic(scratch("bad.json"), "{ nope");
  CHECK_THROWS_AS(io::read_json(scratch("bad.json")), InputError);
}

TEST_CASE("trace CSV layout") {
  SimTrace t;
  t.ts = 0.1;
  t.push(0.0, 1.0, 0.0, 1.0, 0.25);
  const std::string csv = io::trace_to_csv(t);
  CHECK(csv == "t,ref,y,e,u\n0,1,0,1,0.25\n");
}
