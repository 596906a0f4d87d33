// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "gridsplit_cli_test.out";
  const std::string cmd = std::string(GRIDSPLIT_CLI) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  o.out = ss.str();
  return o;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / name; }

}  // namespace

TEST_CASE("cli: run writes the golden header and a summary") {
  const fs::path csv = tmp("gridsplit_cli_steady.csv");
  Outcome o = cli("run --case case9 --scenario steady --benchmark --out " + csv.string());
  CHECK(o.code == 0);
  CHECK(o.out.find("\"max_deviation\"") != std::string::npos);
  std::string expected = "t,iter";
  for (const char* kind : {"V_mag_bus", "V_ang_bus"})
    for (int b = 1; b <= 9; ++b) expected += "," + std::string(kind) + std::to_string(b);
  expected += ",delta_g2,delta_g3,omega_g2,omega_g3";
  for (int i = 1; i <= 13; ++i) expected += ",gfm_x" + std::to_string(i);
  for (int b = 1; b <= 9; ++b) expected += ",bench_V_mag_bus" + std::to_string(b);
  CHECK(first_line(csv) == expected);

  Outcome cmp = cli("compare " + csv.string());
  CHECK(cmp.code == 0);
  CHECK(cmp.out.find("PASS") != std::string::npos);
  Outcome same = cli("compare " + csv.string() + " " + csv.string() + " --tol 0");
  CHECK(same.code == 0);
}

TEST_CASE("cli: benchmark follows the scenario unless overridden") {
  const fs::path csv = tmp("gridsplit_cli_bench.csv");
  REQUIRE(cli("run --scenario steady --out " + csv.string()).code == 0);
  CHECK(first_line(csv).find("bench_V_mag_bus1") != std::string::npos);
  REQUIRE(cli("run --scenario steady --no-benchmark --out " + csv.string()).code == 0);
  CHECK(first_line(csv).find("bench_") == std::string::npos);
  CHECK(cli("run --scenario steady --benchmark --no-benchmark").code == 3);
}

TEST_CASE("cli: input errors exit 3") {
  Outcome missing = cli("run --scenario /nonexistent/path.scn");
  CHECK(missing.code == 3);
  CHECK(missing.out.find("/nonexistent/path.scn") != std::string::npos);
  CHECK(cli("run --scenario steady --workers 0").code == 3);
  CHECK(cli("frobnicate").code == 3);
  CHECK(cli("compare /nonexistent/a.csv").code == 3);
}

TEST_CASE("cli: iteration cap exits 2 and names the step") {
  Outcome o = cli("run --scenario fault_bus2 --sigma 1e-30 --no-benchmark");
  CHECK(o.code == 2);
  CHECK(o.out.find("t=") != std::string::npos);
}

TEST_CASE("cli: compare fails beyond the tolerance") {
  const fs::path a = tmp("gridsplit_cli_a.csv");
  const fs::path b = tmp("gridsplit_cli_b.csv");
  {
    std::ofstream fa(a), fb(b);
    fa << "t,iter,V_mag_bus1,V_ang_bus1\n0,1,1.0,0\n0.1,1,1.0,0\n";
    fb << "t,iter,V_mag_bus1,V_ang_bus1\n0,1,1.0,0\n0.1,1,0.9,0\n";
  }
  Outcome o = cli("compare " + a.string() + " " + b.string() + " --tol 1e-6");
  CHECK(o.code == 1);
  CHECK(o.out.find("FAIL") != std::string::npos);
  {
    std::ofstream fb(b);
    fb << "t,iter,V_mag_bus1,V_ang_bus1\n0,1,1.0,0\n0.2,1,1.0,0\n";
  }
  CHECK(cli("compare " + a.string() + " " + b.string()).code == 3);
}

TEST_CASE("cli: eigenvalues and sweep") {
  Outcome o = cli("eig --case case9");
  CHECK(o.code == 0);
  CHECK(o.out.find("stable_coupled") != std::string::npos);
  Outcome w = cli(std::string("eig --case ") + GRIDSPLIT_DATA_DIR + "/case9_wscc.case");
  CHECK(w.code == 3);
  Outcome s = cli("eig --case case9 --sweep Rv_over_Xv=0.05:0.05:1.0");
  CHECK(s.code == 0);
  int rows = 0;
  std::istringstream in(s.out);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 20);
}
