#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "blowup/config.hpp"
#include "blowup/experiment.hpp"

using namespace blowup;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("blowup_config_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(ParseConfig, ValidExample) {
  const auto r = parse_config("m = 1\nk = 0\na = [1]\nq = constant(1)\nh = power(2)\nrun = detect-blowup\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.config->run, RunKind::DetectBlowup);
  EXPECT_EQ(r.config->h.repr(), "power(2)");
}

TEST(ParseConfig, CommentsAndBlankLines) {
  const auto r = parse_config("# header\n\nm = 2   # order\nk = 0\na = 1, 0\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.config->a, (std::vector<double>{1, 0}));
}

TEST(ParseConfig, KOutOfRange) {
  const auto r = parse_config("m = 2\nk = 3\na = [1, 0]\n");
  ASSERT_FALSE(r.ok());
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].key, "k");
  EXPECT_EQ(r.errors[0].line, 2);
  EXPECT_NE(r.errors[0].message.find("0 <= k <= m-1"), std::string::npos);
}

TEST(ParseConfig, BadFunction) {
  const auto r = parse_config("h = power(-1)\n");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.errors[0].key, "h");
  EXPECT_EQ(r.errors[0].line, 1);
  EXPECT_GT(r.errors[0].column, 0);
}

TEST(ParseConfig, UnknownAndDuplicateKeys) {
  const auto r = parse_config("m = 1\nbogus = 3\nm = 2\nnot a pair\n");
  ASSERT_FALSE(r.ok());
  ASSERT_EQ(r.errors.size(), 3u);
  EXPECT_EQ(r.errors[0].line, 2);
  EXPECT_EQ(r.errors[1].line, 3);
  EXPECT_EQ(r.errors[2].line, 4);
}

TEST(ParseConfig, NumericErrors) {
  EXPECT_FALSE(parse_config("tol = 1\n").ok());
  EXPECT_FALSE(parse_config("m = x\n").ok());
  EXPECT_FALSE(parse_config("thresholds = [1e3, 1e2]\n").ok());
  EXPECT_FALSE(parse_config("rho = 1\n").ok());
  EXPECT_FALSE(parse_config("run = everything\n").ok());
}

TEST(EmitConfig, RoundTrip) {
  const char* texts[] = {
      "m = 3\nk = 1\na = [5, 1, 1]\nh = powerlog(1, 2, 2.718281828)\nq = piecewise((0,1):0.5, (1,inf):2.0)\n"
      "run = pipeline\nhorizon = 5\nseed = 7\n",
      "m = 1\nk = 0\na = [1]\nh = power(0.1)\nrun = verify-lemma22\ng = constant(3)\nb = [2]\nn = 1\n"
      "csv = x/y.csv\nthresholds = [10, 1e300]\ntol = 3e-9\n",
      "",
  };
  for (const char* text : texts) {
    const auto first = parse_config(text);
    ASSERT_TRUE(first.ok()) << text;
    const auto emitted = emit_config(*first.config);
    const auto second = parse_config(emitted);
    ASSERT_TRUE(second.ok()) << emitted;
    EXPECT_TRUE(*first.config == *second.config) << emitted;
    EXPECT_EQ(emitted, emit_config(*second.config));
  }
}

TEST(RunExperiment, ClassifyReport) {
  ExperimentConfig cfg;
  cfg.run = RunKind::Classify;
  cfg.h = make_power(2.0);
  cfg.out = scratch("classify").string();
  const auto out = run_experiment(cfg);
  EXPECT_EQ(out.exit_code, kExitPass);
  const auto text = read_file(fs::path(cfg.out) / "report.txt");
  EXPECT_NE(text.find("verdict=Converges\n"), std::string::npos);
  EXPECT_NE(text.find("estimate=1\n"), std::string::npos);
  EXPECT_NE(text.find("method=ExactFamily\n"), std::string::npos);
}

TEST(RunExperiment, PipelineBlowUp) {
  ExperimentConfig cfg;
  cfg.run = RunKind::Pipeline;
  cfg.h = make_power(2.0);
  cfg.out = scratch("pipeline").string();
  const auto out = run_experiment(cfg);
  EXPECT_EQ(out.exit_code, kExitPass);
  EXPECT_EQ(out.field("verdict"), "BlowUpDetected");
  EXPECT_NEAR(std::stod(out.field("t_blow_estimate")), 1.0, 1e-3);
}

TEST(RunExperiment, MajorizeCsv) {
  ExperimentConfig cfg;
  cfg.run = RunKind::Majorize;
  cfg.J = 5;
  cfg.out = scratch("majorize").string();
  const auto out = run_experiment(cfg);
  EXPECT_EQ(out.exit_code, kExitPass);
  std::ifstream in(fs::path(cfg.out) / "majorization.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "j,t_j,tau_j,eps_j,margin_min");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const double margin = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_GT(margin, 0.0);
  }
  EXPECT_EQ(rows, 6);
}

TEST(RunExperiment, ErrorsBecomeExitTwo) {
  ExperimentConfig cfg;
  cfg.run = RunKind::Construct;
  cfg.h = make_power(2.0);
  cfg.T = 2.0;
  cfg.out = scratch("error").string();
  const auto out = run_experiment(cfg);
  EXPECT_EQ(out.exit_code, kExitError);
  EXPECT_EQ(out.field("status"), "error");
}

TEST(RunExperiment, Deterministic) {
  ExperimentConfig cfg;
  cfg.run = RunKind::Construct;
  cfg.m = 2;
  cfg.a = {1, 0};
  cfg.T = 1.0;
  cfg.trials = 10;
  cfg.seed = 3;
  cfg.out = scratch("det_a").string();
  run_experiment(cfg);
  const auto a = read_file(fs::path(cfg.out) / "iterates.csv") + read_file(fs::path(cfg.out) / "report.txt");
  cfg.out = scratch("det_b").string();
  run_experiment(cfg);
  const auto b = read_file(fs::path(cfg.out) / "iterates.csv") + read_file(fs::path(cfg.out) / "report.txt");
  EXPECT_EQ(a, b);
}
