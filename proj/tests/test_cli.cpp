// Drives the built hopfkit executable end to end.

#include "hopfkit/em_fields.hpp"

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#ifndef HOPFKIT_CLI_PATH
#error "HOPFKIT_CLI_PATH must point at the hopfkit executable"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hopfkit_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Run {
  int code;
  std::string err;
};

Run run(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(HOPFKIT_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                          err.string();
  const int status = std::system(cmd.c_str());
  std::ifstream is(err);
  std::stringstream ss;
  ss << is.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& s) {
  std::ofstream os(p);
  os << s;
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

double num(const std::map<std::string, std::string>& kv, const std::string& key) {
  REQUIRE(kv.count(key));
  return std::stod(kv.at(key));
}

}  // namespace

TEST_CASE("build writes one record per node") {
  const auto d = scratch("count");
  REQUIRE(run("build --kind hopfion --grid 64,64,64 --out " + d.string(), d).code == 0);
  const auto text = slurp(d / "field.grid");
  std::size_t records = 0, comments = 0;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("#", 0) == 0)
      ++comments;
    else if (line.rfind("grid", 0) != 0)
      ++records;
  }
  CHECK(records == 64u * 64u * 64u);
  CHECK(comments >= 1);
  CHECK(text.find("kind=hopfion") != std::string::npos);
  CHECK(text.find("hopfkit ") != std::string::npos);
}

TEST_CASE("hopfion diagnose and file round trip") {
  const auto d = scratch("roundtrip");
  REQUIRE(run("diagnose --kind hopfion --grid 32,32,32 --out " + (d / "mem").string(), d).code == 0);
  const auto mem = key_values(slurp(d / "mem" / "report.txt"));
  CHECK(mem.at("arnold_ok") == "true");
  CHECK(num(mem, "null_norm") < 1e-10);
  CHECK(num(mem, "null_dot") < 1e-10);
  CHECK(mem.at("gate_arnold") == "pass");
  CHECK(mem.at("gate_null") == "pass");

  REQUIRE(run("build --kind hopfion --grid 32,32,32 --out " + (d / "built").string(), d).code == 0);
  REQUIRE(run("diagnose --input " + (d / "built" / "field.grid").string() + " --out " + (d / "file").string(), d)
              .code == 0);
  const auto file = key_values(slurp(d / "file" / "report.txt"));
  for (const char* k : {"energy_em", "energy_v", "helicity_ab", "cs", "arnold_lhs", "arnold_rhs"}) {
    const double a = num(mem, k), b = num(file, k);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("beltrami build re-reads as force free") {
  const auto d = scratch("beltrami");
  write(d / "cfg.json", R"({"kind": "beltrami", "grid": [16, 16, 16], "modes": [{"k": [0, 0, 1], "sign": 1}]})");
  REQUIRE(run("build --config " + (d / "cfg.json").string() + " --out " + d.string(), d).code == 0);
  REQUIRE(run("diagnose --input " + (d / "field.grid").string() + " --format json --out " + (d / "diag").string(), d)
              .code == 0);
  const auto j = json::parse(slurp(d / "diag" / "report.json"));
  CHECK(j.at("report").at("force_free").get<double>() < 1e-12);
  CHECK(std::abs(j.at("report").at("kappa_fit").get<double>() - hopfkit::two_pi) < 1e-10);
}

TEST_CASE("null gate fails on a constant E = B field") {
  const auto d = scratch("nullgate");
  std::ostringstream os;
  os << "grid 8 8 8 1 1 1 0 0 0\n";
  for (int q = 0; q < 512; ++q) os << "0 0 0 0 0 1 0 0 1\n";
  write(d / "zz.grid", os.str());
  const auto r = run("diagnose --input " + (d / "zz.grid").string() + " --out " + d.string(), d);
  CHECK(r.code == 1);
  const auto kv = key_values(slurp(d / "report.txt"));  // still written
  CHECK(kv.at("gate_null") == "fail");
}

TEST_CASE("usage and I/O errors map to stable exit codes") {
  const auto d = scratch("errors");
  const auto missing = run("diagnose --input " + (d / "nope.grid").string() + " --out " + d.string(), d);
  CHECK(missing.code == 3);

  const auto bad = run("build --kind vortexx --out " + d.string(), d);
  CHECK(bad.code == 2);
  CHECK(bad.err.find("hopfion") != std::string::npos);
  CHECK(bad.err.find("beltrami") != std::string::npos);

  write(d / "typo.json", R"({"kind": "hopfion", "tolerence": {"null": 1e-9}})");
  const auto typo = run("build --config " + (d / "typo.json").string() + " --out " + d.string(), d);
  CHECK(typo.code == 2);
  CHECK(typo.err.find("tolerence") != std::string::npos);

  write(d / "broken.json", "{\"kind\": ");
  write(d / "origin.json", R"({"origin": [-8, -8, -8]})");
  CHECK(run("build --config " + (d / "broken.json").string(), d).code == 2);
  CHECK(run("build --config " + (d / "absent.json").string(), d).code == 3);
  CHECK(run("build --kind hopfion --grid 2,8,8 --out " + d.string(), d).code == 2);
  CHECK(run("diagnose --kind hopfion --tol nul=1e-3 --out " + d.string(), d).code == 2);
  CHECK(run("diagnose --kind hopfion --tol null=-1 --out " + d.string(), d).code == 2);
  CHECK(run("build --kind hopfion --format xml --out " + d.string(), d).code == 2);
  CHECK(run("frobnicate", d).code == 2);
  // a dyon grid with a node on the singular circle is rejected with a hint
  const auto sing = run("build --kind dyon --grid 16,16,16 --box 16,16,16 --config " + (d / "origin.json").string() +
                            " --out " + d.string(),
                        d);
  CHECK(sing.code == 2);
  CHECK(sing.err.find("singular") != std::string::npos);
  CHECK(run("trace --kind hopfion --out " + d.string(), d).code == 2);  // no seeds
}

TEST_CASE("trace: hopfion fibers form a Hopf link") {
  const auto d = scratch("trace_hopf");
  REQUIRE(run("trace --kind hopfion --seed 0.6,0.1,0.2 --seed -0.3,0.7,-0.4 --out " + d.string(), d).code == 0);
  const auto j = json::parse(slurp(d / "knots.json"));
  CHECK(j.at("linking_matrix") == json::parse("[[0,1],[1,0]]"));
  CHECK(j.at("knot_types") == json::parse(R"(["unknot","unknot"])"));
  CHECK(j.at("hopf_invariant").at("value") == 1);
  CHECK(fs::exists(d / "line_0.csv"));
  CHECK(fs::exists(d / "line_1.csv"));
  CHECK(slurp(d / "line_0.csv").rfind("s,x,y,z\n", 0) == 0);
}

TEST_CASE("trace: torus (2,3) and a per-seed failure") {
  const auto d = scratch("trace_torus");
  const auto r = run("trace --kind torus --seed 1.5,0,0 --seed 0,0,0 --out " + d.string(), d);
  const auto j = json::parse(slurp(d / "knots.json"));
  CHECK(j.at("knot_types").at(0) == "(2,3)");
  // the axis seed is a stagnation point: recorded, batch not aborted
  CHECK(j.at("lines").at(1).contains("error"));
  CHECK(r.code == 0);
}

TEST_CASE("relax: two shells relax to the lowest") {
  const auto d = scratch("relax");
  write(d / "cfg.json", R"({"kind": "beltrami", "grid": [16, 16, 16],
    "modes": [{"k": [0, 0, 1], "sign": 1}, {"k": [2, 0, 0], "sign": 1}]})");
  REQUIRE(run("relax --config " + (d / "cfg.json").string() + " --out " + d.string(), d).code == 0);
  const auto kv = key_values(slurp(d / "relax_summary.txt"));
  CHECK(std::abs(num(kv, "ratio") - hopfkit::two_pi) < 1e-6 * hopfkit::two_pi);
  CHECK(kv.at("ratio_ok") == "true");
  CHECK(slurp(d / "relax_trace.csv").rfind("iter,energy,helicity,residual\n", 0) == 0);
  CHECK(fs::exists(d / "relaxed.grid"));

  const auto b = scratch("relax_fixed");
  write(b / "cfg.json", R"({"kind": "beltrami", "grid": [16, 16, 16], "modes": [{"k": [0, 1, 0], "sign": -1}]})");
  REQUIRE(run("relax --config " + (b / "cfg.json").string() + " --out " + b.string(), b).code == 0);
  CHECK(num(key_values(slurp(b / "relax_summary.txt")), "iterations") <= 1);
}

TEST_CASE("relax: zero helicity is rejected") {
  const auto d = scratch("relax_zero");
  write(d / "cfg.json", R"({"kind": "beltrami", "grid": [16, 16, 16],
    "modes": [{"k": [1, 0, 0], "sign": 1}, {"k": [0, 1, 0], "sign": -1}]})");
  const auto r = run("relax --config " + (d / "cfg.json").string() + " --out " + d.string(), d);
  CHECK(r.code == 2);
  CHECK(r.err.find("helicity") != std::string::npos);
  CHECK(r.err.find("degenerate") != std::string::npos);
}

TEST_CASE("report carries a contact verdict") {
  const auto d = scratch("report");
  REQUIRE(run("report --kind hopfion --grid 32,32,32 --out " + d.string(), d).code == 0);
  const auto j = json::parse(slurp(d / "report.json"));
  CHECK(j.contains("report"));
  CHECK(j.at("contact").at("sample_count") == 1024);
  CHECK(j.at("contact").at("verdict") == "contact");
  CHECK(j.at("contact").at("chart").at("sampler") == "halton-2-3-5");
}

TEST_CASE("identical runs write identical bytes") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& d : {a, b}) {
    REQUIRE(run("build --kind dyon --grid 16,16,16 --out " + d.string(), d).code == 0);
    REQUIRE(run("diagnose --kind dyon --grid 16,16,16 --out " + d.string(), d).code <= 1);
    REQUIRE(run("trace --kind hopfion --seed 0.6,0.1,0.2 --out " + d.string(), d).code == 0);
  }
  for (const char* f : {"field.grid", "report.txt", "knots.json", "line_0.csv"})
    CHECK(slurp(a / f) == slurp(b / f));
  CHECK_FALSE(fs::exists(a / ("field.grid.tmp." + std::to_string(::getpid()))));
}
