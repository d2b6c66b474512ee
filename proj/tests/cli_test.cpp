// Copyright 2026 The flowprint Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "flowprint/codebook.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(FLOWPRINT_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p) != nullptr) r.out += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const std::string& name) {
  return std::string(FLOWPRINT_CONFIGS) + "/" + name;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("flowprint_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Cli, PlanSplitsHorizon) {
  const Result r = run("plan --config " + config("scenario1_reference.ini"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  const double T = j["T"], T1 = j["T1"], T2 = j["T2"];
  EXPECT_NEAR(T1 + T2, T, 1e-9 * T);
  EXPECT_GT(j["m"].get<int>(), 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  const fs::path dir = scratch("usage");
  EXPECT_EQ(run("run --config " + config("scenario1_reference.ini") +
                " --trials 0 --out " + (dir / "r").string())
                .code,
            2);
  const fs::path bad = dir / "bad.ini";
  std::ofstream(bad) << "[planner]\nT = 8000\nepsilon = 0.2\nzeta = 0.1\n"
                        "lambda = 1\nwobble = 3\n[queues]\nmu = 5\n"
                        "lambda_prime = 1\n";
  const Result r = run("plan --config " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("wobble"), std::string::npos) << r.out;
}

TEST(Cli, InfeasibleExitsThree) {
  const fs::path dir = scratch("infeasible");
  const fs::path ini = dir / "short.ini";
  std::ofstream(ini) << "[planner]\nT = 10\nepsilon = 0.2\nzeta = 0.1\n"
                        "lambda = 1\n[queues]\nmu = 5\nlambda_prime = 1\n";
  EXPECT_EQ(run("plan --config " + ini.string()).code, 3);
}

TEST(Cli, RunWritesArtifacts) {
  const fs::path dir = scratch("run");
  const Result r = run("run --config " + config("scenario1_reference.ini") +
                       " --trials 3 --out " + (dir / "r").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "r" / "trials.csv"));
  EXPECT_TRUE(fs::exists(dir / "r" / "plan.json"));
  const Result rep = run("report --in " + (dir / "r").string());
  ASSERT_EQ(rep.code, 0) << rep.out;
  EXPECT_EQ(nlohmann::json::parse(rep.out)["aggregate"]["trials"], 3);
}

TEST(Cli, SweepThenReport) {
  const fs::path dir = scratch("sweep");
  const Result r = run("sweep --config " + config("scenario1_reference.ini") +
                       " --grid 5000,10000 --trials 2 --out " +
                       (dir / "s").string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream csv(dir / "s" / "sweep.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "T,m_planned,pe_emp,pf_emp,decode_acc");
  const Result rep = run("report --in " + (dir / "s" / "sweep.csv").string());
  ASSERT_EQ(rep.code, 0) << rep.out;
  const auto j = nlohmann::json::parse(rep.out);
  EXPECT_EQ(j["kind"], "sweep");
  EXPECT_EQ(j["rows"], 2);
}

TEST(Cli, CodebookFileReadsBack) {
  const fs::path dir = scratch("codebook");
  const fs::path bin = dir / "cb.bin";
  ASSERT_EQ(run("gen-codebook --config " + config("decode_m16.ini") +
                " --out " + bin.string())
                .code,
            0);
  std::ifstream is(bin, std::ios::binary);
  const flowprint::Codebook cb = flowprint::read_codebook(is);
  EXPECT_EQ(cb.size(), 16u);
}

}  // namespace
