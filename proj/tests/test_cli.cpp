#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include "mfcforge/io.hpp"
#include "support.hpp"

using namespace mfcforge;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::path(MFCFORGE_CLI_WORKDIR);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" + std::string(MFCFORGE_CLI) + "' " + args + " >'" + path("stdout.txt") +
                          "' 2>'" + path("stderr.txt") + "'";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string stdout_text() { return io::read_text(path("stdout.txt")); }

void write_params() { io::write_text_atomic(path("params.json"), io::dump(io::to_json(VehicleParams::reference_car()))); }

void write_controller(const std::string& name, const IpdGains& g) {
  io::write_text_atomic(path(name), io::dump(io::to_json(io::ControllerFile{g, support::published_filter()})));
}

void ensure_plant() {
  static bool done = false;
  if (done) return;
  write_params();
  REQUIRE(cli("plant --params " + path("params.json") + " --ts 0.05 --out " + path("plant.json")) == 0);
  done = true;
}

void ensure_set() {
  static bool done = false;
  if (done) return;
  ensure_plant();
  REQUIRE(cli("stabset --plant " + path("plant.json") + " --kind pid --C 4 --out " + path("set.json")) == 0);
  done = true;
}

}  // namespace

TEST_CASE("cli plant writes the discrete model of the reference car") {
  ensure_plant();
  const auto pf = io::plant_from_json(io::read_json(path("plant.json")));
  const auto want = support::reference_plant();
  REQUIRE(pf.tf.num().degree() == want.num().degree());
  for (int i = 0; i <= want.num().degree(); ++i) CHECK(pf.tf.num()[i] == doctest::Approx(want.num()[i]).epsilon(1e-12));
  for (int i = 0; i <= want.den().degree(); ++i) CHECK(pf.tf.den()[i] == doctest::Approx(want.den()[i]).epsilon(1e-12));
}

TEST_CASE("cli plant rejects a parameter file with a missing key") {
  io::write_text_atomic(path("bad_params.json"), R"({"m": 1500, "Iz": 2500, "Cf": 1e5, "Cr": 1e5, "lf": 1.2, "lr": 1.4})");
  CHECK(cli("plant --params " + path("bad_params.json") + " --out " + path("bad_plant.json")) == 2);
  CHECK_FALSE(fs::exists(path("bad_plant.json")));
}

TEST_CASE("cli stabset is non-empty and deterministic") {
  ensure_set();
  const auto first = io::read_text(path("set.json"));
  const auto sf = io::set_from_json(io::read_json(path("set.json")));
  CHECK_FALSE(sf.set.empty());
  CHECK(sf.filter.C == 4.0);
  REQUIRE(cli("stabset --plant " + path("plant.json") + " --kind pid --C 4 --out " + path("set2.json")) == 0);
  CHECK(io::read_text(path("set2.json")) == first);
  REQUIRE(cli("stabset --plant " + path("plant.json") + " --kind pid --C 4 --out " + path("set3.json"),
              "MFCFORGE_THREADS=1") == 0);
  CHECK(io::read_text(path("set3.json")) == first);
}

TEST_CASE("cli stabset rejects a degenerate sweep") {
  ensure_plant();
  CHECK(cli("stabset --plant " + path("plant.json") + " --kind pid --steps 1 --out " + path("bad_set.json")) == 2);
  CHECK(cli("stabset --plant " + path("plant.json") + " --kind pd --out " + path("bad_set.json")) == 2);
}

TEST_CASE("cli transform maps a PID set and rejects a PI set") {
  ensure_set();
  REQUIRE(cli("transform --set " + path("set.json") + " --grid 4 --slice-stride 20 --out " + path("cloud.csv")) == 0);
  const auto rows = io::cloud_from_csv(io::read_text(path("cloud.csv")));
  CHECK_FALSE(rows.empty());
  for (const auto& r : rows) {
    const PidGains back = ipd2_to_pid(IpdGains{r.Kp, r.Kd, r.alpha, 2}, support::published_filter());
    CHECK(back.K1 == doctest::Approx(r.K1).epsilon(1e-8));
    CHECK(back.K2 == doctest::Approx(r.K2).epsilon(1e-8));
  }
  REQUIRE(cli("stabset --plant " + path("plant.json") + " --kind pi --C 4 --out " + path("pi_set.json")) == 0);
  CHECK(cli("transform --set " + path("pi_set.json") + " --out " + path("pi_cloud.csv")) == 2);
}

TEST_CASE("cli filter requires a bound and handles contradictory bounds") {
  ensure_set();
  CHECK(cli("filter --input " + path("set.json") + " --plant " + path("plant.json") + " --out " + path("f0.csv")) == 2);
  REQUIRE(cli("filter --input " + path("set.json") + " --plant " + path("plant.json") +
              " --grid 4 --slice-stride 20 --os-max 0 --st-max 0.001 --out " + path("f_empty.csv")) == 0);
  CHECK(io::cloud_from_csv(io::read_text(path("f_empty.csv"))).empty());
}

TEST_CASE("cli filter is idempotent on its own output") {
  ensure_set();
  const std::string bounds = " --gm-min 1.5 --gm-unit ratio --pm-min-deg 30";
  REQUIRE(cli("filter --input " + path("set.json") + " --plant " + path("plant.json") + " --grid 6 --slice-stride 8" +
              bounds + " --out " + path("f1.csv") + " --report " + path("f1.json")) == 0);
  const auto once = io::read_text(path("f1.csv"));
  CHECK_FALSE(io::cloud_from_csv(once).empty());
  REQUIRE(cli("filter --input " + path("f1.csv") + " --plant " + path("plant.json") + " --C 4" + bounds + " --out " +
              path("f2.csv")) == 0);
  CHECK(io::read_text(path("f2.csv")) == once);
  const auto report = io::read_json(path("f1.json"));
  CHECK(report.at("entries").is_array());
  CHECK(report.at("passed").get<std::size_t>() == io::cloud_from_csv(once).size());
}

TEST_CASE("cli simulate and margins for a published controller") {
  ensure_plant();
  write_controller("ctrl1.json", support::published_controllers()[0]);
  REQUIRE(cli("simulate --plant " + path("plant.json") + " --controller " + path("ctrl1.json") + " --n 400 --out " +
              path("trace.csv") + " --metrics " + path("metrics.json")) == 0);
  const auto trace = io::read_text(path("trace.csv"));
  CHECK(trace.rfind("t,ref,y,e,u\n", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 401);
  const auto m = io::read_json(path("metrics.json"));
  CHECK(m.at("settled").get<bool>());
  CHECK(m.at("os_pct").get<double>() > 0.0);

  REQUIRE(cli("margins --plant " + path("plant.json") + " --controller " + path("ctrl1.json")) == 0);
  const auto j = nlohmann::json::parse(stdout_text());
  CHECK(j.at("gm_db").get<double>() > 0.0);
  CHECK(j.at("pm_deg").get<double>() > 0.0);
}

TEST_CASE("cli simulate with zero amplitude gives an all-zero trace") {
  ensure_plant();
  write_controller("ctrl2.json", support::published_controllers()[1]);
  REQUIRE(cli("simulate --plant " + path("plant.json") + " --controller " + path("ctrl2.json") +
              " --amplitude 0 --n 100 --out " + path("zero.csv")) == 0);
  const auto text = io::read_text(path("zero.csv"));
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const auto comma = line.find(',');
    CHECK(line.substr(comma + 1) == "0,0,0,0");
  }
  CHECK(rows == 100);
}

TEST_CASE("cli simulate reports divergence with exit code 3") {
  ensure_plant();
  write_controller("unstable.json", IpdGains{50.0, 0.0, 1.0, 2});
  CHECK(cli("simulate --plant " + path("plant.json") + " --controller " + path("unstable.json") + " --out " +
            path("div.csv")) == 3);
  CHECK(fs::exists(path("div.csv")));
}

TEST_CASE("cli refuses to overwrite its input") {
  ensure_set();
  CHECK(cli("transform --set " + path("set.json") + " --out " + path("set.json")) == 2);
  CHECK_FALSE(io::set_from_json(io::read_json(path("set.json"))).set.empty());
}
