#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "truncem/truncem.hpp"

using namespace truncem;

namespace {

const char* kSample = R"(# sample
dim = 2
mu = 1.5, 0.5
sigma = 1, 0.2; 0.2, 2
seed = 7

[truncation]
kind = union
parts = 2

[truncation.1]
kind = box
intervals = 0, inf; -1, 1

[truncation.2]
kind = annulus
intervals = 0, 0.5

[solver]
outer_tol = 1e-9

[run]
init = 0.3, -0.2

[field]
x = -1, 1, 3
y = 0, 2, 5
)";

int error_line(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_key(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return {};
}

}  // namespace

TEST(Config, ParsesSample) {
  const auto c = parse_config_string(kSample);
  EXPECT_EQ(c.params.dim(), 2);
  EXPECT_EQ(c.params.mu(), (Vec{{1.5, 0.5}}));
  EXPECT_EQ(c.params.sigma()(0, 1), 0.2);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.trunc.kind_name(), "union");
  EXPECT_EQ(c.trunc(Vec{{3.0, 0.0}}), 1.0);
  EXPECT_EQ(c.trunc(Vec{{-3.0, 0.0}}), 0.0);
  EXPECT_EQ(c.solver.outer_tol, 1e-9);
  ASSERT_TRUE(c.run.init.has_value());
  EXPECT_EQ(*c.run.init, (Vec{{0.3, -0.2}}));
  EXPECT_EQ(c.field.y.count, 5);
  EXPECT_NO_THROW(c.problem());
}

TEST(Config, ErrorsCarryLineAndKey) {
  EXPECT_EQ(error_line("dim = 1\nmu = 1\nmu = 2\n"), 3);
  EXPECT_EQ(error_line("dim = 1\nmu = 1\nbogus = 2\n"), 3);
  EXPECT_EQ(error_key("dim = 1\nmu = 1\nbogus = 2\n"), "bogus");
  EXPECT_EQ(error_line("dim = 1\nmu = 1x\n"), 2);
  EXPECT_EQ(error_key("dim = 1\nmu = 1x\n"), "mu");
  EXPECT_EQ(error_line("dim = 1\nmu = 1\n[solver\n"), 3);
  EXPECT_EQ(error_line("dim = 1\nmu = 1\nno equals sign\n"), 3);
  EXPECT_EQ(error_key("dim = 1\nmu = 1\n[quad]\nmax_panels = 2.5\n"), "quad.max_panels");
  EXPECT_THROW(parse_config_string("dim = 2\nmu = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_string("dim = 1\nmu = 1\n[truncation]\nkind = wedge\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/x.ini"), ConfigError);
}

TEST(Config, RoundTripIsCanonical) {
  const auto c = parse_config_string(kSample);
  const std::string text = to_config_text(c);
  const auto again = parse_config_string(text);
  EXPECT_EQ(to_config_text(again), text);
  EXPECT_EQ(config_hash(again), config_hash(c));
  EXPECT_EQ(again.params.sigma(), c.params.sigma());
  EXPECT_EQ(again.trunc(Vec{{0.1, 0.1}}), c.trunc(Vec{{0.1, 0.1}}));
}

TEST(Config, HashTracksContent) {
  const auto a = parse_config_string(kSample);
  std::string text(kSample);
  text.replace(text.find("seed = 7"), 8, "seed = 8");
  const auto b = parse_config_string(text);
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_NE(config_hash(a), config_hash(b));
  // comments and spacing do not matter
  EXPECT_EQ(config_hash(parse_config_string("# x\ndim=1\nmu =  1\n")), config_hash(parse_config_string("dim = 1\nmu = 1\n")));
}

TEST(Config, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 2.5338609523, -1e-300, 6.02e23}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(kInf), "inf");
}

TEST(Config, ShippedConfigsParse) {
  const std::filesystem::path dir = TRUNCEM_SOURCE_DIR "/configs";
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".ini") continue;
    ++n;
    EXPECT_NO_THROW(load_config(e.path().string()).problem()) << e.path();
  }
  EXPECT_GE(n, 6);
}

TEST(Io, TrajectoryCsv) {
  const auto c = parse_config_string("dim = 1\nmu = 1\n[truncation]\nkind = interval\nintervals = 0.5, inf\n");
  const auto traj = run_em(Vec::Constant(1, 0.4), c.problem());
  std::ostringstream os;
  write_trajectory_csv(os, traj, config_hash(c));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, std::string("# truncem ") + TRUNCEM_VERSION + " config=" + config_hash(c));
  std::getline(in, line);
  EXPECT_EQ(line, "iter,lambda_1,step_norm,inner_residual");
  std::getline(in, line);
  EXPECT_EQ(line, "0,0.40000000000000002,0,0");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(traj.states.size()));
}

TEST(Io, JsonDocument) {
  const Problem ctx(MixtureParams(Vec::Constant(1, 1.0), Mat::Identity(1, 1)), TruncationSpec::none());
  const auto doc = document("run", "0123456789abcdef", to_json(run_em(Vec::Constant(1, 0.5), ctx)));
  EXPECT_EQ(doc["schema_version"], 1);
  EXPECT_EQ(doc["kind"], "run");
  EXPECT_EQ(doc["config_hash"], "0123456789abcdef");
  EXPECT_TRUE(doc["data"].is_object());
  const auto rep = to_json(em_jacobian(Vec::Zero(1), ctx));
  EXPECT_EQ(rep["classification"], "Repelling");
  EXPECT_EQ(csv_double(kInf), "inf");
}
