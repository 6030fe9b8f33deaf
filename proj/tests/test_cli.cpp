// Copyright 2026 The negdep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "negdep/cli.hpp"

using negdep::cli::dispatch;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  json report;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = dispatch(args, out, err);
  r.err = err.str();
  if (!out.str().empty() && out.str().front() == '{') r.report = json::parse(out.str());
  return r;
}

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("negdep_cli_" + std::to_string(::getpid()))) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

json without_time(json r) {
  r.erase("wall_time_s");
  return r;
}

}  // namespace

TEST(Cli, CheckNAExitCodes) {
  auto ok = run({"check-na", "gallery:product-2", "--seed", "1"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.report["result"]["status"], "holds");
  EXPECT_EQ(ok.report["seed"], 1);
  EXPECT_EQ(ok.report["version"], negdep::cli::kVersion);
  auto bad = run({"check-na", "gallery:perfect-correlation", "--seed", "1"});
  EXPECT_EQ(bad.code, 1);
  const auto& w = bad.report["result"]["witness"];
  EXPECT_EQ(w["setA"], json::array({1}));
  EXPECT_EQ(w["setB"], json::array({2}));
  EXPECT_DOUBLE_EQ(w["covariance"].get<double>(), 0.25);
}

TEST(Cli, MonteCarloFixtureUsesNoiseTolerance) {
  auto r = run({"check-na", "gallery:star-threshold-4", "--seed", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_GT(r.report["result"]["tolerance"].get<double>(), 1e-10);
  EXPECT_FALSE(r.report["warnings"].empty());
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"no-such-command"}).code, 2);
  EXPECT_EQ(run({"check-na"}).code, 2);
  EXPECT_EQ(run({"check-na", "/nonexistent/law.json", "--seed", "1"}).code, 2);
  EXPECT_EQ(run({"check-na", "gallery:unknown", "--seed", "1"}).code, 2);
  EXPECT_EQ(run({"decorrelation", "gallery:anticorrelated-pair", "--A", "0", "--N", "2", "--seed", "1"}).code, 2);
  EXPECT_EQ(run({"check-sr", "gallery:product-2", "--budget", "lots", "--seed", "1"}).code, 2);
  EXPECT_EQ(run({"threshold-law", "gallery:product-2", "--seed", "1"}).code, 2);
}

TEST(Cli, MalformedJsonReportsLineAndColumn) {
  TempDir dir;
  const auto p = dir.write("bad.json", "{\n  \"pmf\": {\"10\": 0.5,, \"01\": 0.5}\n}\n");
  auto r = run({"check-na", p, "--seed", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(std::regex_search(r.err, std::regex(std::regex_replace(p, std::regex("[.]"), "\\.") + ":2:[0-9]+: malformed JSON")))
      << r.err;
}

TEST(Cli, RejectsLawsAboveTwentyFourCoordinates) {
  TempDir dir;
  const auto p = dir.write("big.json", "{\"pmf\": {\"" + std::string(25, '0') + "\": 1.0}}");
  EXPECT_EQ(run({"check-na", p, "--seed", "1"}).code, 2);
  const auto q = dir.write("ok.json", "{\"pmf\": {\"" + std::string(24, '0') + "\": 1.0}}");
  EXPECT_NE(run({"decorrelation", q, "--A", "1", "--N", "2", "--seed", "1"}).code, 2);
}

TEST(Cli, OrthantHalfCorrelation) {
  TempDir dir;
  const auto p = dir.write("spec.json", R"({"cov": [[1, 0.5], [0.5, 1]]})");
  auto r = run({"orthant", p, "--pattern", "11", "--seed", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NEAR(r.report["result"]["probability"].get<double>(), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(r.report["result"]["method"], "closed_form");
}

TEST(Cli, OrthantPrecisionUnreachableIsInconclusive) {
  TempDir dir;
  const auto p = dir.write("spec4.json", R"({"cov": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]})");
  EXPECT_EQ(run({"orthant", p, "--pattern", "1010", "--precision", "1e-9", "--seed", "3"}).code, 3);
}

TEST(Cli, StarThresholdIsNeverCertifiedStronglyRayleigh) {
  auto r = run({"check-sr", "gallery:star-threshold-3", "--seed", "7", "--budget", "default"});
  EXPECT_TRUE(r.code == 1 || r.code == 3) << r.code;
  EXPECT_NE(r.report["result"]["status"], "holds");
}

TEST(Cli, ReportsAreReproducibleForAFixedSeed) {
  TempDir dir;
  const auto p = dir.write("spec4.json", R"({"cov": [[1,-0.2,0,0],[-0.2,1,-0.3,0],[0,-0.3,1,-0.1],[0,0,-0.1,1]]})");
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"threshold-law", p, "--precision", "2e-3", "--seed", "11"},
        {"orthant", p, "--pattern", "1011", "--precision", "1e-3", "--seed", "11"},
        {"check-sr", "gallery:log-growth-threshold-4", "--seed", "11"}}) {
    auto a = run(args), b = run(args);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(without_time(a.report).dump(), without_time(b.report).dump());
  }
}

TEST(Cli, DrawnSeedIsPrinted) {
  auto r = run({"check-na", "gallery:product-2"});
  EXPECT_EQ(r.code, 0);
  const auto seed = r.report["seed"].get<std::uint64_t>();
  EXPECT_NE(r.err.find("seed: " + std::to_string(seed)), std::string::npos);
  ASSERT_FALSE(r.report["warnings"].empty());
  EXPECT_NE(r.report["warnings"][0].get<std::string>().find(std::to_string(seed)), std::string::npos);
}

TEST(Cli, GalleryListAndEmit) {
  auto list = run({"gallery", "list", "--seed", "1"});
  EXPECT_EQ(list.code, 0);
  bool star = false;
  for (const auto& e : list.report["result"]) star |= e["name"] == "star-threshold";
  EXPECT_TRUE(star);
  TempDir dir;
  const auto out = dir.path("emitted.json");
  auto emit = run({"gallery", "emit", "star-threshold", "--n", "3", "--out", out, "--seed", "1"});
  EXPECT_EQ(emit.code, 0);
  std::ifstream in(out);
  const auto body = json::parse(in);
  EXPECT_EQ(body["n"], 4);
  // the emitted file is accepted back as input
  EXPECT_EQ(run({"check-na", out, "--tolerance", "1e-2", "--seed", "1"}).code, 0);
}

TEST(Cli, AnalyticSubcommands) {
  TempDir dir;
  auto dec = run({"decorrelation", "gallery:anticorrelated-pair", "--A", "1", "--N", "2", "--seed", "1"});
  EXPECT_EQ(dec.code, 0);
  EXPECT_NEAR(dec.report["result"]["value"].get<double>(), 0.25, 1e-15);

  auto scp = run({"scp", "gallery:ust-triangle", "--B", "3", "--seed", "1"});
  EXPECT_EQ(scp.code, 0);
  EXPECT_EQ(scp.report["result"]["free_coordinates"], json::array({1, 2}));
  const auto lumpy = dir.write("lumpy.json", R"({"pmf": {"000": 0.5, "111": 0.5}})");
  EXPECT_EQ(run({"scp", lumpy, "--B", "3", "--seed", "1"}).code, 1);

  const auto spec = dir.write("pair.json", R"({"cov": [[1, -0.6], [-0.6, 1]]})");
  auto mc = run({"maxcorr", spec, "--blockA", "1", "--blockB", "2", "--seed", "1"});
  EXPECT_NEAR(mc.report["result"]["value"].get<double>(), 0.6, 1e-12);

  const auto gram = dir.write("gram.json", R"({"gram": [[1,1,0],[1,1,0],[0,0,1]]})");
  auto tp = run({"tailprofile", gram, "--head", "1", "--cuts", "2,3", "--seed", "1"});
  EXPECT_EQ(tp.code, 0);
  EXPECT_NEAR(tp.report["result"]["values"][0].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(tp.report["result"]["values"][1].get<double>(), 0.0, 1e-9);

  auto lg = run({"diagnose-cov", "gallery:log-growth-threshold", "--index", "1", "--nmax", "400", "--seed", "1"});
  EXPECT_EQ(lg.code, 0);
  EXPECT_EQ(lg.report["result"]["growth_class"], "logarithmic");
  EXPECT_EQ(lg.report["result"]["mode"], "nested");
  auto st = run({"diagnose-cov", "gallery:star-threshold", "--index", "1", "--nmax", "400", "--seed", "1"});
  EXPECT_EQ(st.code, 0);
  EXPECT_EQ(st.report["result"]["growth_class"], "sqrt");
  EXPECT_EQ(st.report["result"]["mode"], "family");
}
