// End-to-end tests of the command-line tool: exit codes, artifact files, and
// byte determinism, driving the real binary named by CYCLEPERTURB_BIN.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kScratch = "cli_scratch";

std::string bin() {
  const char* b = std::getenv("CYCLEPERTURB_BIN");
  REQUIRE(b != nullptr);
  return b;
}

int run(const std::string& args) {
  const std::string cmd = "\"" + bin() + "\" " + args + " >/dev/null 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  if (!WIFEXITED(rc)) return -1;
  return WEXITSTATUS(rc);
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two-rung configuration small enough for quick end-to-end runs.
std::string reduced_config() {
  return R"({
    "ladder": [0.02, 0.01],
    "profile_nodes": 64,
    "mc_draws": 200,
    "seed": 7
  })";
}

struct ScratchDir {
  ScratchDir() {
    fs::remove_all(kScratch);
    fs::create_directories(kScratch);
  }
};

ScratchDir& scratch() {
  static ScratchDir s;
  return s;
}

}  // namespace

TEST_CASE("invalid configs exit 2 and write nothing") {
  scratch();
  const fs::path root = kScratch;
  write_text(root / "bad.json", "{ nope");
  CHECK(run("verify --config " + (root / "bad.json").string() + " --out " +
            (root / "bad_out").string()) == 2);
  CHECK_FALSE(fs::exists(root / "bad_out"));

  write_text(root / "incr.json", R"({"ladder": [0.01, 0.02]})");
  CHECK(run("verify --config " + (root / "incr.json").string() + " --out " +
            (root / "incr_out").string()) == 2);
  CHECK_FALSE(fs::exists(root / "incr_out"));

  write_text(root / "unknown.json", R"({"no_such_key": 1})");
  CHECK(run("verify --config " + (root / "unknown.json").string()) == 2);

  write_text(root / "badsys.json", R"({"system": {"id": "lorenz"}})");
  CHECK(run("cycle --config " + (root / "badsys.json").string()) == 2);

  CHECK(run("verify --config " + (root / "missing.json").string()) == 2);
  CHECK(run("verify --bogus-flag") == 2);
  CHECK(run("") == 2);  // a subcommand is required
}

TEST_CASE("degenerate system verifies clean with skipped downstream checks") {
  scratch();
  const fs::path root = kScratch;
  write_text(root / "harm.json", R"({"system": {"id": "harmonic"}, "seed_point": [1.0, 0.0]})");
  CHECK(run("verify --config " + (root / "harm.json").string() + " --out " +
            (root / "harm_out").string()) == 0);
  const json rep = json::parse(read_file(root / "harm_out" / "report.json"));
  CHECK(rep["nondegenerate"] == false);
  CHECK(rep["all_pass"] == true);
  CHECK(rep["ladder"].empty());
  int skipped = 0;
  for (const auto& v : rep["verdicts"]) {
    if (v["name"] == "nondegeneracy") {
      CHECK(v["status"] == "pass");
      CHECK(v["detail"].get<std::string>().find("nondegenerate=false") != std::string::npos);
    } else {
      CHECK(v["status"] == "skipped");
      ++skipped;
    }
  }
  CHECK(skipped == 7);
}

TEST_CASE("reduced verify passes and is byte deterministic") {
  scratch();
  const fs::path root = kScratch;
  write_text(root / "red.json", reduced_config());
  const std::string cfg = " --config " + (root / "red.json").string();
  CHECK(run("verify" + cfg + " --out " + (root / "va").string()) == 0);
  CHECK(run("verify" + cfg + " --out " + (root / "vb").string() + " --threads 3") == 0);
  CHECK(read_file(root / "va" / "report.json") == read_file(root / "vb" / "report.json"));
  CHECK(read_file(root / "va" / "ladder.csv") == read_file(root / "vb" / "ladder.csv"));

  const std::string csv = read_file(root / "va" / "ladder.csv");
  CHECK(csv.rfind("eps,sup_ratio,sup_residual,delta,v\n", 0) == 0);
  const json rep = json::parse(read_file(root / "va" / "report.json"));
  CHECK(rep["all_pass"] == true);
  CHECK(rep["ladder"].size() == 2);

  // A different seed leaves the deterministic metrics identical.
  CHECK(run("verify" + cfg + " --out " + (root / "vc").string() + " --seed 12345") == 0);
  CHECK(read_file(root / "va" / "ladder.csv") == read_file(root / "vc" / "ladder.csv"));
}

TEST_CASE("cycle, analyze, sweep, and plot write their artifacts") {
  scratch();
  const fs::path root = kScratch;
  write_text(root / "red.json", reduced_config());
  const std::string cfg = " --config " + (root / "red.json").string();

  CHECK(run("cycle" + cfg + " --out " + (root / "cyc").string()) == 0);
  const json cyc = json::parse(read_file(root / "cyc" / "cycle.json"));
  CHECK(cyc["nondegenerate"] == true);
  CHECK(std::abs(cyc["period"].get<double>() - 4.768022029102652) < 1e-8);
  CHECK(std::abs(cyc["theta0"].get<double>() - 0.8015730812810132) < 1e-4);

  CHECK(run("analyze --eps 0.02" + cfg + " --out " + (root / "an").string()) == 0);
  const json an = json::parse(read_file(root / "an" / "analyze.json"));
  CHECK(std::abs(an["row"]["delta"].get<double>() - 0.0364754) < 1e-5);
  const std::string orbit_csv = read_file(root / "an" / "orbit.csv");
  CHECK(orbit_csv.rfind("t,x1,x2\n", 0) == 0);
  CHECK(std::count(orbit_csv.begin(), orbit_csv.end(), '\n') == 2049);

  CHECK(run("sweep" + cfg + " --out " + (root / "sw").string()) == 0);
  const std::string sweep_csv = read_file(root / "sw" / "ladder.csv");
  CHECK(std::count(sweep_csv.begin(), sweep_csv.end(), '\n') == 3);  // header + 2 rungs

  CHECK(run("plot" + cfg + " --out " + (root / "pl").string()) == 0);
  CHECK(read_file(root / "pl" / "phase.svg").rfind("<svg", 0) == 0);
  CHECK(read_file(root / "pl" / "ladder.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("numerical failure exits 3") {
  scratch();
  const fs::path root = kScratch;
  write_text(root / "eq.json", R"({"seed_point": [0.0, 0.0]})");
  CHECK(run("cycle --config " + (root / "eq.json").string() + " --out " +
            (root / "eq_out").string()) == 3);
}

TEST_CASE("literal sign reading still verifies") {
  scratch();
  const fs::path root = kScratch;
  write_text(root / "red.json", reduced_config());
  const std::string cfg = " --config " + (root / "red.json").string();
  CHECK(run("verify --paper-literal" + cfg + " --out " + (root / "plit").string()) == 0);
  CHECK(run("verify" + cfg + " --out " + (root / "plit0").string()) == 0);
  const json rep = json::parse(read_file(root / "plit" / "report.json"));
  const json rep0 = json::parse(read_file(root / "plit0" / "report.json"));
  CHECK(rep["all_pass"] == true);
  CHECK(rep["config_hash"] != rep0["config_hash"]);
}
