#include "epsb/app.hpp"
#include "epsb/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;
namespace fs = std::filesystem;
using namespace epsb;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("epsb_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const json kStationary = {
    {"command", "hydro"},
    {"params", {{"theta", 0.5}, {"alpha", 0.2}, {"beta", 0.8}, {"horizon", 0.1}}},
    {"initial", {{"shape", "linear"}, {"coefficients", {0.2, 0.6}}}},
    {"grid", {{"cells", 128}, {"frames", 5}}},
    {"residual_tol", 1e-8}};

}  // namespace

TEST_CASE("hydro on a stationary profile") {
  const auto out = scratch("stationary");
  std::ostringstream log;
  CHECK(app::run(kStationary, {.out = out}, log) == app::kOk);
  const json summary = read_json(out / "summary.json");
  CHECK(summary["exit_code"] == 0);
  CHECK(summary["invariants"]["max_weak_residual"]["value"].get<double>() <= 1e-8);
  const auto residuals = io::read_csv(out / "residuals.csv");
  for (const auto& r : residuals.rows) CHECK(std::abs(r[2]) <= 1e-8);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "solution.csv"));
}

TEST_CASE("rate of the hydrodynamic path") {
  const auto out = scratch("rate");
  json cfg = {{"command", "rate"},
              {"params", {{"theta", 2.0}, {"horizon", 0.1}}},
              {"initial", {{"shape", "cosine"}, {"coefficients", {0.5, 0.3}}}},
              {"grid", {{"cells", 256}, {"frames", 50}}},
              {"basis", {{"kt", 2}, {"ku", 4}}}};
  std::ostringstream log;
  CHECK(app::run(cfg, {.out = out}, log) == app::kOk);
  const auto t = io::read_csv(out / "rate.csv");
  CHECK(t.rows.at(0)[t.column("rate")] <= 1e-6);
}

TEST_CASE("config errors exit 2 and name the key") {
  const auto out = scratch("bad");
  json cfg = kStationary;
  cfg["params"]["theta"] = -1.0;
  std::ostringstream log;
  CHECK(app::run(cfg, {.out = out}, log) == app::kConfigError);
  CHECK(log.str().find("params.theta") != std::string::npos);

  std::ostringstream log2;
  CHECK(app::run(json{{"command", "nope"}}, {.out = out}, log2) == app::kConfigError);
  CHECK(log2.str().find("command") != std::string::npos);

  std::ostringstream log3;
  json missing = kStationary;
  missing.erase("initial");
  CHECK(app::run(missing, {.out = out}, log3) == app::kConfigError);
  CHECK(log3.str().find("initial") != std::string::npos);

  std::ostringstream log4;
  CHECK(app::run_file(out / "does_not_exist.json", {.out = out}, log4) == app::kConfigError);
}

TEST_CASE("failed invariants exit 3") {
  const auto out = scratch("unstable");
  json cfg = kStationary;
  cfg["grid"] = {{"cells", 64}, {"frames", 2}, {"scheme", "explicit"}, {"dt", 0.01}};
  std::ostringstream log;
  CHECK(app::run(cfg, {.out = out}, log) == app::kNumericalError);

  // A residual tolerance below round-off is an invariant failure, reported in the summary.
  const auto out2 = scratch("tight");
  json tight = kStationary;
  tight["initial"] = {{"shape", "linear"}, {"coefficients", {0.5, 0.0}}};
  tight["residual_tol"] = 0.0;
  std::ostringstream log2;
  CHECK(app::run(tight, {.out = out2}, log2) == app::kNumericalError);
  CHECK(read_json(out2 / "summary.json")["invariants"]["max_weak_residual"]["pass"] == false);
}

TEST_CASE("manifest replay is byte-identical") {
  const json cfg = {{"command", "simulate"},
                    {"params", {{"n", 32}, {"theta", 0.5}, {"alpha", 0.3}, {"beta", 0.6}, {"horizon", 0.02}}},
                    {"initial", {{"shape", "linear"}, {"coefficients", {0.3, 0.3}}}},
                    {"initial_mode", "product"},
                    {"replicas", 4},
                    {"schedule", {0.0, 0.01, 0.02}},
                    {"seed", 17}};
  const auto a = scratch("replay_a");
  const auto b = scratch("replay_b");
  std::ostringstream log;
  REQUIRE(app::run(cfg, {.out = a}, log) == app::kOk);
  REQUIRE(app::run_file(a / "manifest.json", {.out = b}, log) == app::kOk);
  for (const char* f : {"density.csv", "mass.csv"}) CHECK(bytes(a / f) == bytes(b / f));
  CHECK(read_json(a / "manifest.json")["run_id"] == read_json(b / "manifest.json")["run_id"]);

  // A different seed changes the data.
  const auto c = scratch("replay_c");
  REQUIRE(app::run(cfg, {.seed = 18, .out = c}, log) == app::kOk);
  CHECK(bytes(a / "mass.csv") != bytes(c / "mass.csv"));
}
