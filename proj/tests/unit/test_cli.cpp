#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "transwave/event_locator.hpp"

namespace fs = std::filesystem;
using namespace transwave;

namespace {

const fs::path kWork = fs::temp_directory_path() / "transwave_cli_test";

// Runs the CLI with the given arguments inside kWork; returns the exit status.
int run(const std::string& args) {
  const std::string cmd = "cd '" + kWork.string() + "' && '" + std::string(TRANSWAVE_CLI_PATH) + "' --quiet " +
                          args + " > cli_stdout.txt 2> cli_stderr.txt";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

}  // namespace

TEST_CASE("gen and theory") {
  Workdir w;
  REQUIRE(run("gen ring --preset ring23") == 0);
  REQUIRE(fs::exists(kWork / "network.json"));
  REQUIRE(run("theory --network network.json") == 0);
  const auto out = slurp(kWork / "cli_stdout.txt");
  CHECK(out.find("h_s_per_km=12.54") != std::string::npos);
  CHECK(out.find("v_mech_kms=339.9") != std::string::npos);

  CHECK(run("gen ring --buses 2") == 2);
  CHECK(slurp(kWork / "cli_stderr.txt").find("--buses") != std::string::npos);
  CHECK(run("gen mesh --rows 3 --cols 4 -o mesh.json") == 0);
  CHECK(fs::exists(kWork / "mesh.json"));
  CHECK(run("frobnicate") == 2);
}

TEST_CASE("simulate, speed and manifest replay") {
  Workdir w;
  REQUIRE(run("gen scenario --name ring23-fault") == 0);
  REQUIRE(run("simulate --network network.json --scenario scenario.json --t-end 6") == 0);
  const auto waves = slurp(kWork / "waves.csv");
  const auto header = waves.substr(0, waves.find('\n'));
  CHECK(std::count(header.begin(), header.end(), ',') == 46);

  REQUIRE(run("speed --waves waves.csv --network network.json --origin 1") == 0);
  const auto summary = slurp(kWork / "cli_stdout.txt");
  REQUIRE(summary.rfind("speed,", 0) == 0);
  const double v = std::stod(summary.substr(6));
  CHECK(v > 289.0);
  CHECK(v < 391.0);
  CHECK(fs::exists(kWork / "arrivals.csv"));
  CHECK(run("speed --waves waves.csv --network network.json --origin 1 --threshold 0") == 2);
  CHECK(run("speed --waves waves.csv --network network.json --origin 1 --threshold 10") == 3);

  fs::rename(kWork / "waves.csv", kWork / "first.csv");
  fs::rename(kWork / "manifest.json", kWork / "first_manifest.json");
  REQUIRE(run("simulate --manifest first_manifest.json") == 0);
  CHECK(slurp(kWork / "waves.csv") == slurp(kWork / "first.csv"));
}

TEST_CASE("bad inputs map to exit codes") {
  Workdir w;
  std::ofstream(kWork / "broken.json") << "{\n  \"buses\": [\n";
  CHECK(run("simulate --network broken.json") == 2);
  CHECK(slurp(kWork / "cli_stderr.txt").find("broken.json:") != std::string::npos);
  CHECK(run("simulate --network missing.json") == 2);

  REQUIRE(run("gen ring --preset ring23") == 0);
  CHECK(run("simulate --network network.json --dt 0.5") == 5);
}

TEST_CASE("locate from an arrivals file") {
  Workdir w;
  const auto arr = synthetic_arrivals({{0, 0}, {400, 0}, {0, 400}, {400, 400}, {200, 200}}, {130, 270}, 1.0, 350.0);
  {
    std::ofstream f(kWork / "arr.csv");
    write_arrivals_csv(f, arr);
  }
  REQUIRE(run("locate --arrivals arr.csv --speed 350 --truth 130,270") == 0);
  const auto j = nlohmann::json::parse(slurp(kWork / "location.json"));
  CHECK(std::abs(j.at("x_km").get<double>() - 130.0) < 1e-3);
  CHECK(j.at("abs_error_km").get<double>() < 1e-3);

  REQUIRE(run("locate --arrivals arr.csv --fit-speed") == 0);
  const auto jf = nlohmann::json::parse(slurp(kWork / "location.json"));
  CHECK(std::abs(jf.at("speed_kms").get<double>() - 350.0) < 0.35);

  {
    std::ofstream f(kWork / "two.csv");
    write_arrivals_csv(f, {arr[0], arr[1]});
  }
  CHECK(run("locate --arrivals two.csv --speed 350") == 3);
  CHECK(run("locate --arrivals arr.csv --speed 350 --fit-speed") == 2);
}

TEST_CASE("sweep config") {
  Workdir w;
  std::ofstream(kWork / "sweep.json") << R"({"preset": "ring23-fault", "parameter": "inertia_h",
    "values": [10, 5], "engine": "swing", "origin": 1, "t_end": 6})";
  REQUIRE(run("sweep --config sweep.json") == 0);
  const auto csv = slurp(kWork / "sweep.csv");
  CHECK(csv.rfind("param_value,fitted_speed,theory_speed,status", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  std::ofstream(kWork / "bad_sweep.json") << R"({"preset": "ring23-fault", "parameter": "inertia_h",
    "values": [10], "colour": "red"})";
  CHECK(run("sweep --config bad_sweep.json") == 2);
}
