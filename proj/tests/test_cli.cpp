#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "modfix/cli.hpp"
#include "modfix/errors.hpp"
#include "modfix/io.hpp"

using namespace modfix;
namespace fs = std::filesystem;
using Json = io::Json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("modfix_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Json base() const {
    Json j;
    j["modular"] = {{"dimension", 2}, {"generator", {{"kind", "power"}, {"p", 2}}}};
    j["problem"] = {{"type", "affine"}, {"A", {{0.5, 0.0}, {0.0, 0.5}}}, {"b", {1.0, 0.0}}};
    j["solver"] = "strong";
    j["constants"] = {{"c", 1.2}, {"l", 1.0}};
    j["tol"] = 1e-12;
    j["pairs"] = 300;
    j["samples"] = 300;
    return j;
  }

  std::string write_config(const Json& j, const std::string& name = "config.json") const {
    const fs::path p = dir_ / name;
    io::write_text_file(p.string(), j.dump(2));
    return p.string();
  }

  CliRun run(std::vector<std::string> args) const {
    args.insert(args.begin(), "modfix");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
  }

  std::string out_dir(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

// ---------------------------------------------------------------------------
// certify

TEST_F(Cli, CertifyPassesOnContraction) {
  Json j = base();
  j["certify"] = {"axioms", "strong", "regular_growth"};
  const auto r = run({"certify", "--config", write_config(j), "--out", out_dir("c")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("strong: pass"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "c" / "certify_report.json"));
}

TEST_F(Cli, CertifyFailsOnExpansion) {
  Json j = base();
  j["problem"]["A"] = {{2.0, 0.0}, {0.0, 2.0}};
  j["certify"] = {"strong"};
  const auto r = run({"certify", "--config", write_config(j), "--out", out_dir("c")});
  EXPECT_NE(r.code, 0);
}

TEST_F(Cli, CertifyRejectsCBelowL) {
  Json j = base();
  j["constants"] = {{"c", 0.5}, {"l", 1.0}};
  j["certify"] = {"strong"};
  const auto r = run({"certify", "--config", write_config(j), "--out", out_dir("c")});
  EXPECT_EQ(r.code, 2);
}

// ---------------------------------------------------------------------------
// solve

TEST_F(Cli, SolveStrongWritesResultAndTrace) {
  const auto r = run({"solve", "--config", write_config(base()), "--out", out_dir("s")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json result = io::load_json_file((dir_ / "s" / "result.json").string());
  EXPECT_TRUE(result["result"]["converged"].get<bool>());
  EXPECT_NEAR(result["result"]["point"][0].get<double>(), 2.0, 1e-5);
  EXPECT_NEAR(result["result"]["point"][1].get<double>(), 0.0, 1e-12);
  std::ifstream in(dir_ / "s" / "trace.csv");
  const IterationTrace trace = io::read_trace_csv(in);
  EXPECT_FALSE(trace.rows.empty());
  EXPECT_TRUE(trace.within_bounds());
}

TEST_F(Cli, SolveFlagsOverrideConfig) {
  const auto r = run({"solve", "--config", write_config(base()), "--out", out_dir("s"), "--tol", "1e-4", "--seed",
                      "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json result = io::load_json_file((dir_ / "s" / "result.json").string());
  EXPECT_EQ(result["tol"].get<double>(), 1e-4);
  EXPECT_EQ(result["seed"].get<int>(), 9);
}

TEST_F(Cli, SchauderOnTranslationFailsWithTrace) {
  Json j = base();
  j["problem"] = {{"type", "translation"}, {"b", {1.0, 0.0}}};
  j["solver"] = "schauder";
  j["tol"] = 1e-6;
  const auto r = run({"solve", "--config", write_config(j), "--out", out_dir("t")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("compactness"), std::string::npos) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "t" / "trace.csv"));
  const Json result = io::load_json_file((dir_ / "t" / "result.json").string());
  EXPECT_TRUE(result["rejected"].get<bool>());
}

TEST_F(Cli, SchauderOnRotationSucceeds) {
  Json j = base();
  j["problem"] = {{"type", "rotation"}, {"theta", 0.5}, {"b", {0.5, 0.0}}};
  j["solver"] = "schauder";
  j["tol"] = 1e-6;
  const auto r = run({"solve", "--config", write_config(j), "--out", out_dir("r")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, StrictWithUnderstatedDelta2IsUsageError) {
  Json j = base();
  j["solver"] = "strict_delta2";
  j["constants"] = {{"c", 1.0}, {"k", 0.25}, {"delta", 1.0}, {"L", 3.0}};
  EXPECT_EQ(run({"solve", "--config", write_config(j), "--out", out_dir("d")}).code, 2);
  j["constants"]["L"] = 4.0;
  const auto r = run({"solve", "--config", write_config(j), "--out", out_dir("d")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, HomotopySolver) {
  Json j = base();
  j["solver"] = "prop31";
  j["constants"] = {{"k", 0.5}};
  j["schedule"] = {{"rule", "geometric"}, {"length", 40}};
  j["tol"] = 1e-8;
  const auto r = run({"solve", "--config", write_config(j), "--out", out_dir("h")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json result = io::load_json_file((dir_ / "h" / "result.json").string());
  EXPECT_NEAR(result["result"]["point"][0].get<double>(), 2.0, 1e-3);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({"solve", "--config", (dir_ / "missing.json").string()}).code, 2);
  EXPECT_EQ(run({"solve"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  Json j = base();
  j["solver"] = "bogus";
  EXPECT_EQ(run({"solve", "--config", write_config(j), "--out", out_dir("u")}).code, 2);
  j = base();
  j["modular"]["dimension"] = 3;
  EXPECT_EQ(run({"solve", "--config", write_config(j), "--out", out_dir("u")}).code, 2);
  io::write_text_file((dir_ / "broken.json").string(), "{ not json");
  EXPECT_EQ(run({"solve", "--config", (dir_ / "broken.json").string()}).code, 2);
}

TEST_F(Cli, RelativeSpecPathsResolveAgainstConfig) {
  fs::create_directories(dir_ / "sub");
  io::write_text_file((dir_ / "sub" / "rho.json").string(), base()["modular"].dump());
  Json j = base();
  j["modular"] = "rho.json";
  const std::string path = (dir_ / "sub" / "config.json").string();
  io::write_text_file(path, j.dump());
  EXPECT_EQ(run({"solve", "--config", path, "--out", out_dir("p")}).code, 0);
}

TEST_F(Cli, SolveIsDeterministic) {
  const std::string cfg = write_config(base());
  ASSERT_EQ(run({"solve", "--config", cfg, "--out", out_dir("a"), "--seed", "3"}).code, 0);
  ASSERT_EQ(run({"solve", "--config", cfg, "--out", out_dir("b"), "--seed", "3"}).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "trace.csv"), slurp(dir_ / "b" / "trace.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "result.json"), slurp(dir_ / "b" / "result.json"));
}

// ---------------------------------------------------------------------------
// sweep

TEST_F(Cli, SweepOverK) {
  Json j = base();
  j["constants"] = {{"c", 1.05}, {"l", 1.0}};
  const auto r = run({"sweep", "--config", write_config(j), "--out", out_dir("w"), "--param", "k", "--values",
                      "0.3,0.5,0.7,0.9"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir_ / "w" / "sweep.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "value,iterations,residual,within_bounds,exit,reference_distance,status");
  std::vector<long> iterations;
  while (std::getline(in, line)) {
    std::stringstream s(line);
    std::string value, it;
    std::getline(s, value, ',');
    std::getline(s, it, ',');
    iterations.push_back(std::stol(it));
  }
  ASSERT_EQ(iterations.size(), 4u);
  for (std::size_t i = 1; i < iterations.size(); ++i) EXPECT_GE(iterations[i], iterations[i - 1]);
  EXPECT_TRUE(fs::exists(dir_ / "w" / "row_003" / "trace.csv"));
}

TEST_F(Cli, SweepOverGridSizeApproachesReference) {
  Json j;
  j["problem"] = {{"type", "volterra"},
                  {"horizon", 1.0},
                  {"grid_size", 8},
                  {"kernel", {{"name", "constant"}, {"kappa", 0.5}}},
                  {"nonlinearity", "identity"},
                  {"forcing", {{"name", "constant"}, {"value", 1.0}}}};
  j["solver"] = "strong";
  j["constants"] = {{"c", 1.0}, {"l", 0.8}, {"k", 0.8}};
  j["tol"] = 1e-12;
  const auto r = run({"sweep", "--config", write_config(j), "--out", out_dir("g"), "--param", "grid_size", "--values",
                      "8,32,128"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir_ / "g" / "sweep.csv");
  std::string line;
  std::getline(in, line);
  std::vector<double> distance;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream s(line);
    for (std::string x; std::getline(s, x, ',');) f.push_back(x);
    distance.push_back(std::stod(f.at(5)));
  }
  ASSERT_EQ(distance.size(), 3u);
  EXPECT_GT(distance[0], distance[1]);
  EXPECT_GT(distance[1], distance[2]);
}

TEST_F(Cli, SweepUsageErrors) {
  const std::string cfg = write_config(base());
  EXPECT_EQ(run({"sweep", "--config", cfg, "--out", out_dir("e"), "--param", "k", "--values", ""}).code, 2);
  EXPECT_EQ(run({"sweep", "--config", cfg, "--out", out_dir("e"), "--param", "zeta", "--values", "1"}).code, 2);
  EXPECT_EQ(run({"sweep", "--config", cfg, "--out", out_dir("e"), "--param", "grid_size", "--values", "4"}).code, 2);
}

// ---------------------------------------------------------------------------
// report

TEST_F(Cli, ReportOnCleanTrace) {
  ASSERT_EQ(run({"solve", "--config", write_config(base()), "--out", out_dir("s")}).code, 0);
  const auto r = run({"report", (dir_ / "s" / "trace.csv").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("100% rows within bound"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("worst margin row"), std::string::npos);
}

TEST_F(Cli, ReportFlagsTamperedRow) {
  ASSERT_EQ(run({"solve", "--config", write_config(base()), "--out", out_dir("s")}).code, 0);
  std::istringstream in(slurp(dir_ / "s" / "trace.csv"));
  std::ostringstream tampered;
  bool header_seen = false, done = false;
  for (std::string line; std::getline(in, line);) {
    if (header_seen && !done) {
      // index,residual,... : blow up the residual of the first data row
      const auto a = line.find(','), b = line.find(',', a + 1);
      line = line.substr(0, a + 1) + "1e300" + line.substr(b);
      done = true;
    }
    if (line.rfind("index,", 0) == 0) header_seen = true;
    tampered << line << '\n';
  }
  io::write_text_file((dir_ / "bad.csv").string(), tampered.str());
  const auto r = run({"report", (dir_ / "bad.csv").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("violated row 1"), std::string::npos) << r.out;
}

TEST_F(Cli, ReportOnMalformedInput) {
  io::write_text_file((dir_ / "junk.csv").string(), "index,residual,bound\n1,abc\n");
  EXPECT_EQ(run({"report", (dir_ / "junk.csv").string()}).code, 2);
  EXPECT_EQ(run({"report", (dir_ / "absent.csv").string()}).code, 2);
}

TEST_F(Cli, ReportSlopeMatchesCertifiedRate) {
  // ρ = |x₁| + |x₂|, T = 0.5x + b, c = 1.01, l = 1: k̂ = 0.505, certified
  // k = 0.51; the step residual decays like 0.5ᵐ.
  Json j = base();
  j["modular"]["generator"] = {{"kind", "power"}, {"p", 1}};
  j["constants"] = {{"c", 1.01}, {"l", 1.0}};
  j["tol"] = 1e-13;
  ASSERT_EQ(run({"solve", "--config", write_config(j), "--out", out_dir("k")}).code, 0);
  const auto r = run({"report", (dir_ / "k" / "trace.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex("relative gap ([0-9.eE+-]+)"))) << r.out;
  EXPECT_LE(std::stod(m[1].str()), 0.05);
}

// ---------------------------------------------------------------------------
// io round trips

TEST(Io, FormatDouble) {
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(std::stod(io::format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Io, TraceCsvRoundTrip) {
  IterationTrace t;
  t.scheme = "strong";
  t.residual_label = "r";
  t.bound_label = "b";
  t.initial_r = 36.0;
  t.meta = {{"k", 0.36}, {"c", 1.2}};
  t.rows.push_back({1, 0.5, 1.0 / 3.0});
  t.rows.push_back({2, 0.25, 0.1, 0.05, 0.2});
  std::ostringstream s;
  io::write_trace_csv(s, t);
  std::istringstream in(s.str());
  const IterationTrace back = io::read_trace_csv(in);
  EXPECT_EQ(back.scheme, "strong");
  EXPECT_EQ(back.initial_r, 36.0);
  EXPECT_EQ(back.meta.at("k"), 0.36);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[0].bound, 1.0 / 3.0);
  EXPECT_EQ(back.rows[1].error_bound, 0.2);
  std::ostringstream again;
  io::write_trace_csv(again, back);
  EXPECT_EQ(again.str(), s.str());
}

TEST(Io, ModularJsonRoundTrip) {
  const Json spec = {{"entries",
                      {{{"weight", 2.0}, {"generator", {{"kind", "power"}, {"p", 3}}}},
                       {{"weight", 0.5}, {"generator", {{"kind", "exponential"}}}}}}};
  const ModularFunctional rho = io::modular_from_json(spec);
  EXPECT_EQ(rho.dimension(), 2u);
  const ModularFunctional back = io::modular_from_json(io::to_json(rho));
  const Element x{0.3, -0.7};
  EXPECT_EQ(evaluate(back, x), evaluate(rho, x));
  EXPECT_THROW(io::modular_from_json(Json{{"dimension", 2}}), PreconditionError);
  EXPECT_THROW(io::modular_from_json(Json{{"dimension", 2}, {"generator", {{"kind", "cubic"}}}}), PreconditionError);
}

TEST(Io, ProblemJsonErrors) {
  EXPECT_THROW(io::problem_from_json(Json{{"type", "spiral"}}), PreconditionError);
  EXPECT_THROW(io::problem_from_json(Json{{"type", "rotation"}, {"theta", 0.1}, {"b", {1.0, 2.0, 3.0}}}),
               PreconditionError);
  const io::Problem p = io::problem_from_json(Json{{"type", "translation"}, {"b", {1.0, 2.0}}});
  EXPECT_EQ(p.mapping.dimension(), 2u);
}
