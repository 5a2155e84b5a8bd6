#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "flyq/cli.hpp"
#include "flyq/errors.hpp"
#include "flyq/runner.hpp"
#include "flyq/scenario.hpp"

using namespace flyq;
using namespace flyq::cli;

namespace {

std::string scenario_path(const std::string& name) { return std::string(FLYQ_SCENARIO_DIR) + "/" + name; }

int invoke(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  if (out) *out = o.str();
  return code;
}

const char* kSmall = R"(
name = "small"
mode = "ideal"
trials = 40
seed = 3

[quantum]
d = 3

[adversary]
strategy = "clone-symmetric"
)";

}  // namespace

TEST(Scenario, RoundTripsThroughToml) {
  for (const char* f : {"ideal-1d.toml", "non-ideal-1d.toml", "clone-attack-sweep.toml", "redundant-lossy.toml",
                        "chained.toml", "dual-temporary-cheat.toml", "measure-resend.toml", "epsilon-table.toml"}) {
    const auto s = load_scenario(scenario_path(f));
    EXPECT_EQ(parse_scenario(to_toml(s)), s) << f;
  }
  Scenario s;
  s.adversary.asymmetry_a = 0.3;
  s.geometry.directions = {{1, 0, 0, 1}, {-1, 0, 0, 1}};
  s.geometry.unveil_points = {{8, 8, 0, 0}, {8, -8, 0, 0}};
  s.sweep = {{"quantum.d", {std::int64_t{2}, std::int64_t{3}}}};
  EXPECT_EQ(parse_scenario(to_toml(s)), s);
}

TEST(Scenario, UnknownFieldsReportTheirLine) {
  try {
    parse_scenario("name = \"x\"\n[quantum]\nd = 3\ndd = 4\n", "bad.toml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad.toml:4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("quantum.dd"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_scenario("mode = \"nope\"\n"), ConfigError);
  EXPECT_THROW(parse_scenario("[quantum]\nd = \"three\"\n"), ConfigError);
  EXPECT_THROW(parse_scenario("[noise]\nloss = 0.1\n[noise.p_to_q]\nloss = 0.2\n"), ConfigError);
}

TEST(Scenario, GridIsCartesianFirstKeySlowest) {
  auto s = parse_scenario(kSmall);
  s.sweep = {{"quantum.d", {std::int64_t{2}, std::int64_t{3}}},
             {"adversary.strategy", {std::string("honest"), std::string("clone-symmetric"), std::string("measure-resend")}}};
  const auto g = expand_grid(s);
  ASSERT_EQ(g.size(), 6u);
  EXPECT_EQ(g[0].scenario.quantum.d, 2);
  EXPECT_EQ(g[2].scenario.adversary.strategy, "measure-resend");
  EXPECT_EQ(g[3].scenario.quantum.d, 3);
  EXPECT_TRUE(g[5].scenario.sweep.empty());
  EXPECT_EQ(g[4].assignments[1].second, "clone-symmetric");
  EXPECT_THROW(with_field(s, "quantum.e", std::int64_t{1}), ConfigError);
  EXPECT_THROW(with_field(s, "quantum.d", std::string("x")), ConfigError);
  EXPECT_EQ(expand_grid(parse_scenario(kSmall)).size(), 1u);
}

TEST(Runner, RowsAreDeterministic) {
  const auto s = parse_scenario(kSmall);
  const auto a = run_scenario(s, 1);
  const auto b = run_scenario(s, 3);
  EXPECT_EQ(to_csv(a.rows), to_csv(b.rows));
  EXPECT_EQ(to_json(a.rows).dump(), to_json(b.rows).dump());
  const auto* sum = a.rows.at(0).find("sum");
  ASSERT_NE(sum, nullptr);
  EXPECT_LE(sum->value, a.rows[0].find("bound")->value + *sum->radius);
  EXPECT_FALSE(a.causality_violation);
  EXPECT_EQ(to_csv(a.rows).find("runtime"), std::string::npos);
  EXPECT_NE(to_csv(a.rows, true).find("runtime"), std::string::npos);
}

TEST(Runner, NumbersRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(5.0 / 3.0), "1.6666666666666667");
  EXPECT_EQ(format_number(2.0), "2");
}

TEST(Runner, CsvColumnsAreTheUnion) {
  ResultRow a{"s", {{"x", "1"}}, {{"p", 0.5, std::nullopt}}, 0.0};
  ResultRow b{"s", {{"y", "2"}}, {{"q", 0.25, std::nullopt}}, 0.0};
  const auto csv = to_csv({a, b});
  const auto header = csv.substr(0, csv.find('\n'));
  for (const char* col : {"x", "y", "p", "q"}) EXPECT_NE(header.find(col), std::string::npos) << header;
}

TEST(Runner, NoiseOutsideRedundantModeIsRejected) {
  auto s = parse_scenario(kSmall);
  s.noise.p_to_q.loss = 0.1;
  EXPECT_THROW(run_point(s, 1), ConfigError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(invoke({"run", scenario_path("acausal.toml"), "--threads", "1"}), kCausalityViolation);
  EXPECT_EQ(invoke({"run", scenario_path("does-not-exist.toml")}), kConfigError);
  EXPECT_EQ(invoke({"frobnicate"}), kConfigError);
  EXPECT_EQ(invoke({"verify-bounds", "--d-max", "1"}), kConfigError);
  EXPECT_EQ(invoke({"chain-demo", "--tamper", "7"}), kConfigError);
  EXPECT_EQ(invoke({"chain-demo", "--depth", "3", "--sizing", "secure"}), kConfigError);
  EXPECT_EQ(invoke({"--help"}), kOk);
}

TEST(Cli, RunOutputIsByteIdentical) {
  std::string a, b;
  const std::vector<std::string> args{"run", scenario_path("superposed.toml"), "--trials", "50", "--threads", "2"};
  ASSERT_EQ(invoke(args, &a), kOk);
  ASSERT_EQ(invoke(args, &b), kOk);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.empty());
}

TEST(Cli, SingleValueSweepMatchesRun) {
  std::string run, sweep;
  ASSERT_EQ(invoke({"run", scenario_path("ideal-1d.toml"), "--trials", "30", "--threads", "1"}, &run), kOk);
  ASSERT_EQ(invoke({"sweep", scenario_path("ideal-1d.toml"), "--trials", "30", "--threads", "1", "--grid",
                    "quantum.d=4"},
                   &sweep),
            kOk);
  // The sweep adds its assignment as a column; every other cell agrees.
  const auto table = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::istringstream ls(line);
      std::string c;
      while (std::getline(ls, c, ',')) cells.push_back(c);
      rows.push_back(cells);
    }
    std::map<std::string, std::string> m;
    for (std::size_t i = 0; i < rows.at(0).size(); ++i) m[rows[0][i]] = i < rows.at(1).size() ? rows[1][i] : "";
    return m;
  };
  const auto a = table(run), b = table(sweep);
  EXPECT_EQ(b.size(), a.size() + 1);
  for (const auto& [k, v] : a) EXPECT_EQ(b.at(k), v) << k;
  EXPECT_EQ(invoke({"sweep", scenario_path("ideal-1d.toml")}), kConfigError);
}

TEST(Cli, VerifyBoundsSingleRow) {
  const auto rows = verify_bounds(2, 2);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].bound, 5.0 / 3.0, 1e-15);
  EXPECT_TRUE(rows[0].pass);
  std::string out;
  EXPECT_EQ(invoke({"verify-bounds", "--d-max", "3", "--m-max", "3", "--format", "csv"}, &out), kOk);
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 5);
  EXPECT_THROW(verify_bounds(33, 2), ConfigError);
}

TEST(Cli, ChainDemoJson) {
  std::string out;
  ASSERT_EQ(invoke({"chain-demo", "--depth", "1", "--bit", "1", "--format", "json"}, &out), kOk);
  EXPECT_NE(out.find("\"bit\""), std::string::npos);
}
