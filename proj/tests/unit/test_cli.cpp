#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sharptrace/errors.hpp"
#include "sharptrace/experiment.hpp"

#ifndef SHARPTRACE_CLI
#error "SHARPTRACE_CLI must name the command line binary"
#endif

namespace fs = std::filesystem;
namespace ex = sharptrace::experiment;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result shell(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + SHARPTRACE_CLI + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  while (std::fgets(buffer, sizeof buffer, pipe) != nullptr) r.out += buffer;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sharptrace_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& file, json config) {
  config["output_dir"] = (dir / "out").string();
  const auto path = dir / file;
  std::ofstream(path) << config.dump(2);
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json base(const std::string& name, const std::string& kind, json symbol, json params) {
  return {{"schema_version", 1}, {"name", name}, {"kind", kind}, {"symbol", symbol}, {"params", params}, {"seed", 3}};
}

const json sphere3 = {{"family", "sphere"}, {"n", 3}};
const json ellipse2 = {{"family", "quadratic"}, {"n", 2}, {"matrix", {{1, 0}, {0, 4}}}};

}  // namespace

TEST_CASE("list shows the seven kinds") {
  const auto text = shell("list");
  CHECK(text.code == 0);
  int lines = 0;
  for (char c : text.out) lines += c == '\n';
  CHECK(lines == 7);
  for (const char* kind : {"constants", "trace", "rho-scan", "sharpness", "critical", "duality", "surface-checks"}) {
    CHECK(text.out.find(kind) != std::string::npos);
  }
  const auto machine = shell("list --json");
  CHECK(machine.code == 0);
  const auto j = json::parse(machine.out);
  CHECK(j.at("kinds").size() == 7);
  CHECK(j.at("schema_version") == 1);
}

TEST_CASE("unknown flags and subcommands exit 1 with usage") {
  const auto flag = shell("list --bogus");
  CHECK(flag.code == 1);
  CHECK(flag.out.find("--help") != std::string::npos);
  CHECK(shell("frobnicate").code == 1);
  CHECK(shell("").code == 1);
  CHECK(shell("--help").code == 0);
}

TEST_CASE("malformed json exits 1 without outputs") {
  const auto dir = scratch("malformed");
  std::ofstream(dir / "bad.json") << "{\"schema_version\": 1, \"name\": ";
  const auto r = shell("run " + (dir / "bad.json").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("malformed") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("schema violations exit 1 without outputs") {
  const auto dir = scratch("schema");
  auto good = base("good", "surface-checks", ellipse2, json::object());
  auto version = good;
  version["schema_version"] = 2;
  auto unknown = good;
  unknown["params"]["colour"] = "blue";
  auto top = good;
  top["extra"] = 1;
  auto kind = good;
  kind["kind"] = "plot";
  auto type = good;
  type["params"]["samples"] = "many";
  int i = 0;
  for (const auto& bad : {version, unknown, top, kind, type}) {
    const auto path = write_config(dir, "bad" + std::to_string(i++) + ".json", bad);
    // the valid config listed first must not run either
    const auto r = shell("run " + write_config(dir, "good.json", good).string() + " " + path.string());
    CHECK(r.code == 1);
    CHECK_FALSE(fs::exists(dir / "out"));
  }
}

TEST_CASE("constants config reports the three methods") {
  const auto dir = scratch("constants");
  const auto path = write_config(dir, "c.json", base("c", "constants", sphere3, {{"norm", {{"flavor", "homogeneous"}, {"s", 1.0}}}}));
  const auto r = shell("run " + path.string());
  REQUIRE(r.code == 0);
  const auto report = json::parse(slurp(dir / "out" / "c.report.json"));
  CHECK(report.at("status") == "ok");
  CHECK(report.at("version") == ex::version());
  CHECK(report.at("wall_clock").contains("seconds"));
  const auto& constants = report.at("result").at("constants");
  REQUIRE(constants.size() == 3);
  for (const auto& c : constants) CHECK(std::abs(c.at("value").get<double>() - 1.0) < 1e-6);
  CHECK(report.at("config").at("params").at("k_max") == 8);
  CHECK(fs::exists(dir / "out" / "c.csv"));
}

TEST_CASE("critical config on the quartic exits 2 with the certificate") {
  const auto dir = scratch("quartic");
  const auto path = write_config(dir, "q.json", base("q", "critical", {{"family", "quartic"}, {"n", 3}}, json::object()));
  const auto r = shell("run " + path.string());
  CHECK(r.code == 2);
  const auto report = json::parse(slurp(dir / "out" / "q.report.json"));
  CHECK(report.at("status") == "hypothesis-violation");
  CHECK(report.at("result").at("certificate").at("min_hessian_det").get<double>() < 0.01);
  CHECK_FALSE(fs::exists(dir / "out" / "q.csv"));
}

TEST_CASE("reports are identical across runs and thread counts") {
  const auto dir = scratch("identity");
  const auto config = base("same", "trace", sphere3,
                           {{"test_function", {{"family", "random-band-limited"}}},
                            {"norm", {{"flavor", "homogeneous"}, {"s", 1.0}}},
                            {"grid", {{"N", 32}, {"L", 12.0}}},
                            {"evaluation", "trigonometric"},
                            {"resolution", 8},
                            {"samples", 2}});
  std::string reports[3], csvs[3];
  const char* envs[3] = {"", "SHARPTRACE_THREADS=1", "SHARPTRACE_THREADS=3"};
  for (int i = 0; i < 3; ++i) {
    const auto path = write_config(dir, "same.json", config);
    REQUIRE(shell("run " + path.string(), envs[i]).code == 0);
    auto report = json::parse(slurp(dir / "out" / "same.report.json"));
    report.erase("wall_clock");
    reports[i] = report.dump();
    csvs[i] = slurp(dir / "out" / "same.csv");
    fs::remove_all(dir / "out");
  }
  CHECK(reports[0] == reports[1]);
  CHECK(reports[0] == reports[2]);
  CHECK(csvs[0] == csvs[1]);
  CHECK(csvs[0] == csvs[2]);
  CHECK(csvs[0].rfind("rho_or_R,lhs,rhs,ratio,series\n", 0) == 0);
}

TEST_CASE("bad thread settings exit 1") {
  CHECK(shell("list", "SHARPTRACE_THREADS=zero").code == 1);
  CHECK(shell("list", "SHARPTRACE_THREADS=0").code == 1);
}

TEST_CASE("config parsing resolves defaults") {
  const auto c = ex::parse_config(base("r", "rho-scan", sphere3, {{"norm", {{"flavor", "homogeneous"}, {"s", 0.6}}}}));
  CHECK(c.params.at("rhos").size() == 7);
  CHECK(c.params.at("family") == "cs-optimal");
  CHECK(c.params.at("truncation_argument") == 400.0);
  CHECK(c.seed == 3);
  CHECK(ex::parse_config(c.to_json()).to_json() == c.to_json());

  const auto d = ex::parse_config(base("d", "duality", ellipse2, json::object()));
  CHECK(d.params.at("grid").at("N") == 512);
  CHECK(d.params.at("time_profile").at("kind") == "bump");

  CHECK_THROWS_AS(ex::parse_config(base("s", "sharpness", ellipse2, {{"norm", {{"flavor", "homogeneous"}, {"s", 0.75}}}})),
                  sharptrace::InvalidArgument);
  CHECK_THROWS_AS(ex::parse_config(base("t", "trace", sphere3, json::object())), sharptrace::InvalidArgument);
  CHECK_THROWS_AS(ex::parse_config(base("../x", "surface-checks", sphere3, json::object())), sharptrace::InvalidArgument);
  CHECK_THROWS_AS(ex::parse_config(base("r", "rho-scan", sphere3,
                                        {{"norm", {{"flavor", "homogeneous"}, {"s", 1.0}}}, {"rhos", {1, 2, 3}}})),
                  sharptrace::InvalidArgument);
}

TEST_CASE("surface checks and duality through the experiment layer") {
  const auto s = ex::execute(ex::parse_config(base("s", "surface-checks", ellipse2, json::object())));
  CHECK(s.exit_code() == 0);
  CHECK(s.result.at("coarea").at("relative_gap").get<double>() < 1e-8);
  CHECK(s.result.at("dual_round_trip").at("max_error").get<double>() < 1e-6);
  CHECK(s.rows.size() == 101);

  const auto q = ex::execute(ex::parse_config(base("q", "surface-checks", {{"family", "quartic"}, {"n", 2}}, json::object())));
  CHECK(q.result.at("flat_point") == true);
  CHECK(q.result.at("dual_round_trip").is_null());

  const auto d = ex::execute(ex::parse_config(base("d", "duality", ellipse2, json::object())));
  CHECK(d.result.at("passes") == true);
}
