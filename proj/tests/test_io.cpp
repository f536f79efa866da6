#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cotlab/adaptation.hpp"
#include "cotlab/arithmetic.hpp"
#include "cotlab/io.hpp"

using namespace cotlab;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const std::string& name) { return std::string(COTLAB_FIXTURES) + "/" + name; }

std::vector<Scenario> generated() {
  std::vector<Scenario> all{tight_instance(4, 1, 0.5, 2), tight_instance(6, 2, 2, 0.5), omr_instance(3, 10, 5),
                            arith_scenario(), adaptation_fixture(), adaptation_fixture(true)};
  for (int v = 1; v <= 3; ++v) all.push_back(nfl_instance(v, 4, 10, 0.01));
  for (std::uint64_t i = 0; i < 30; ++i) all.push_back(random_stable_instance(i));
  for (std::uint64_t i = 0; i < 10; ++i) all.push_back(random_adaptation_fixture(i));
  return all;
}

}  // namespace

TEST(ScenarioJson, RoundTripIsLossless) {
  for (const auto& s : generated()) {
    auto back = io::parse_scenario(io::dump_scenario(s));
    EXPECT_EQ(back, s) << s.name;
    // Serialization is a fixed point after one trip.
    EXPECT_EQ(io::dump_scenario(back), io::dump_scenario(s)) << s.name;
  }
}

TEST(ScenarioJson, RoundTripPreservesRisks) {
  for (const auto& s : generated()) {
    auto back = io::parse_scenario(io::dump_scenario(s));
    auto a = decomposition_check(s.rule, s.f, s.g, s.nu, s.loss);
    auto b = decomposition_check(back.rule, back.f, back.g, back.nu, back.loss);
    EXPECT_EQ(a.reasoning, b.reasoning);
    EXPECT_EQ(a.tmr, b.tmr);
    EXPECT_EQ(a.otr, b.otr);
    EXPECT_EQ(a.omr, b.omr);
  }
}

TEST(ScenarioJson, GoldenFixturesMatchGenerators) {
  EXPECT_EQ(io::load_scenario(fixture("nfl1.json")), nfl_instance(1, 3, 1, 0.1));
  EXPECT_EQ(io::load_scenario(fixture("nfl2.json")), nfl_instance(2, 2, 5, 0.1));
  EXPECT_EQ(io::load_scenario(fixture("nfl3.json")), nfl_instance(3, 4, 2, 0.1));
  EXPECT_EQ(io::load_scenario(fixture("tight.json")), tight_instance(4, 1, 0.5, 2));
  EXPECT_EQ(io::load_scenario(fixture("omr.json")), omr_instance(5, 3, 10));
  EXPECT_EQ(io::load_scenario(fixture("arith.json")), arith_scenario());
  EXPECT_EQ(io::load_scenario(fixture("tiny.json")), adaptation_fixture());
}

TEST(ScenarioJson, GoldenFixturesVerify) {
  for (auto name : {"nfl1.json", "nfl2.json", "nfl3.json", "tight.json", "omr.json", "arith.json", "tiny.json"})
    EXPECT_TRUE(verify_scenario(io::load_scenario(fixture(name))).pass) << name;
  auto tampered = verify_scenario(io::load_scenario(fixture("tampered_nfl2.json")));
  EXPECT_FALSE(tampered.pass);
  EXPECT_EQ(tampered.failures(), std::vector<std::string>{"tmr"});
}

TEST(ScenarioJson, Errors) {
  EXPECT_THROW(io::load_scenario(fixture("malformed.json")), ParseError);
  EXPECT_THROW(io::load_scenario(fixture("unknown_family.json")), ParseError);
  EXPECT_THROW(io::load_scenario("/nonexistent/x.json"), ParseError);
  EXPECT_THROW(io::parse_scenario("{}"), ParseError);

  auto j = json::parse(io::dump_scenario(omr_instance(2, 3, 4)));
  j["version"] = 99;
  EXPECT_THROW(io::scenario_from_json(j), ParseError);

  // Constructor validation surfaces as a parse error.
  j = json::parse(io::dump_scenario(omr_instance(2, 3, 4)));
  j["nu"]["weights"][0] = 5.0;
  EXPECT_THROW(io::scenario_from_json(j), ParseError);
}

TEST(ReportJson, VerificationReportShape) {
  auto j = io::to_json(verify_scenario(omr_instance(2, 3, 4)));
  EXPECT_EQ(j["pass"], true);
  EXPECT_TRUE(j["risks"].contains("omr"));
  EXPECT_GT(j["checks"].size(), 5u);
}

TEST(Csv, AmpRows) {
  EXPECT_EQ(std::string(io::kAmpCsvHeader), "K,phi,delta,alpha,regime,bound");
  EXPECT_EQ(io::amp_csv_row(3, 1, 1), "3,1,1,2,linear,1");
  EXPECT_EQ(io::csv_number(0.1), "0.10000000000000001");
  std::ostringstream os;
  io::write_arith_csv(os, family_recoverability_report());
  std::size_t lines = 0;
  for (char c : os.str()) lines += c == '\n';
  EXPECT_EQ(lines, 901u);
}
