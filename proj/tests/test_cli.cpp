#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "inhomwalk/cli.hpp"
#include "inhomwalk/engine.hpp"
#include "inhomwalk/harness.hpp"

using namespace inhomwalk;
namespace fs = std::filesystem;

namespace {

const char* kLazyFamily =
    R"({"name":"lazy","members":[{"name":"lazy","base":{"atoms":[-1,0,1],"probs":[0.25,0.5,0.25],"lattice":true}}],
        "grids":{"nFor":{"ballot":[64,256]}}})";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("inhomwalk_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, VerifyBallotWritesPassingReport) {
  const std::string cfg = file("lazy.json", std::string(R"({"family":)") + kLazyFamily + R"(,"task":"verify"})");
  const std::string out = path("ballot.json");
  EXPECT_EQ(run({"verify", "ballot", "--config", cfg, "--out", out}), 0) << err_.str();
  const auto j = nlohmann::json::parse(slurp(out));
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["theoremId"], "ballot");
  EXPECT_EQ(j[0]["pass"], true);
}

TEST_F(Cli, SpreadCapFlagCanFailAVerifier) {
  const std::string cfg = file("lazy.json", std::string(R"({"family":)") + kLazyFamily + "}");
  EXPECT_EQ(run({"verify", "ballot", "--config", cfg, "--spread-cap", "1", "--out", path("r.json")}), 1);
}

TEST_F(Cli, IdenticalConfigGivesIdenticalBytes) {
  const std::string cfg = file("lazy.json", std::string(R"({"family":)") + kLazyFamily + R"(,"seed":9})");
  ASSERT_EQ(run({"verify", "ballot", "--config", cfg, "--out", path("a.csv")}), 0);
  ASSERT_EQ(run({"verify", "ballot", "--config", cfg, "--out", path("b.csv"), "--parallelism", "2"}), 0);
  const std::string a = slurp(path("a.csv"));
  EXPECT_EQ(a, slurp(path("b.csv")));
  EXPECT_EQ(a.substr(0, a.find('\n') + 1), csv_header());
}

TEST_F(Cli, ProbMatchesEngine) {
  const std::string cfg = file("p.json", std::string(R"({"family":)") + kLazyFamily +
                                             R"(,"task":"prob","query":{"n":12,"u":1,
      "constraint":{"bands":[{"lo":0}],"endpoint":2}}})");
  ASSERT_EQ(run({"prob", "--config", cfg}), 0) << err_.str();
  const auto j = nlohmann::json::parse(out_.str());
  std::vector<std::optional<Band>> bands(12, Band{0.0, kInf});
  const double want = event_prob(1, StepSchedule::homogeneous(lazy_walk(), 12), PathConstraint(12, bands, false, {}, 2));
  EXPECT_NEAR(j[0]["rows"][0]["value"].get<double>(), want, 1e-15);
}

TEST_F(Cli, ProbOfImpossibleEventIsZero) {
  const std::string far = file("far.json", std::string(R"({"family":)") + kLazyFamily +
                                               R"(,"query":{"n":3,"constraint":{"endpoint":10}}})");
  ASSERT_EQ(run({"prob", "--config", far}), 0) << err_.str();
  EXPECT_EQ(nlohmann::json::parse(out_.str())[0]["rows"][0]["value"].get<double>(), 0.0);
  const std::string gap = file("gap.json", std::string(R"({"family":)") + kLazyFamily +
                                               R"(,"query":{"n":3,"constraint":{"bands":[null,{"lo":0.2,"hi":0.8},null]}}})");
  ASSERT_EQ(run({"prob", "--config", gap}), 0) << err_.str();
  EXPECT_EQ(nlohmann::json::parse(out_.str())[0]["rows"][0]["value"].get<double>(), 0.0);
}

TEST_F(Cli, SampleAgreesWithProb) {
  const std::string q = R"(,"query":{"n":20,"constraint":{"bands":[{"lo":-3,"hi":3}]},"samples":40000}})";
  const std::string cfg = file("s.json", std::string(R"({"family":)") + kLazyFamily + q);
  ASSERT_EQ(run({"prob", "--config", cfg}), 0);
  const double exact = nlohmann::json::parse(out_.str())[0]["rows"][0]["value"].get<double>();
  ASSERT_EQ(run({"sample", "--config", cfg, "--seed", "4"}), 0) << err_.str();
  const auto j = nlohmann::json::parse(out_.str())[0];
  const double se = j["constants"][0]["value"].get<double>();
  EXPECT_NEAR(j["rows"][0]["value"].get<double>(), exact, 4 * se);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run({"verify", "ballot", "--config", file("bad.json", "{\"family\": \"lazy\",\n  \"seed\": }")}), 2);
  EXPECT_NE(err_.str().find(":2:"), std::string::npos) << err_.str();
  EXPECT_EQ(run({"verify", "ballot", "--config", file("u.json", R"({"family":"lazy","colour":"red"})")}), 2);
  EXPECT_NE(err_.str().find("colour"), std::string::npos);
  EXPECT_EQ(run({"verify", "nope", "--config", file("ok.json", R"({"family":"lazy"})")}), 2);
  EXPECT_EQ(run({"verify", "ballot", "--config", file("t.json", R"({"family":"lazy","theoremId":"llt"})")}), 2);
  EXPECT_EQ(run({"prob", "--config", file("v.json", R"({"family":"lazy","task":"verify"})")}), 2);
  EXPECT_EQ(run({"prob", "--config", file("m.json", R"({"family":"lazy","query":{"n":4,"member":"x"}})")}), 2);
  EXPECT_EQ(run({"verify", "ballot", "--config", path("missing.json")}), 2);
  EXPECT_EQ(run({"verify", "ballot", "--config", file("ok2.json", R"({"family":"lazy"})"), "--out",
                 path("no/such/dir/r.json")}),
            2);
  EXPECT_EQ(run({"frobnicate"}), 2);
}

TEST_F(Cli, LawCheck) {
  EXPECT_EQ(run({"law", "check", file("lazy.json", R"({"atoms":[-1,0,1],"probs":[1,2,1],"lattice":true})")}), 0);
  const auto j = nlohmann::json::parse(out_.str());
  EXPECT_EQ(j["member"], true);
  EXPECT_NEAR(j["variance"].get<double>(), 0.5, 1e-15);
  // The simple walk misses the minorant at 0.
  EXPECT_EQ(run({"law", "check", file("simple.json", R"({"atoms":[-1,1],"probs":[1,1],"lattice":true})")}), 1);
  EXPECT_EQ(run({"law", "check",
                 file("custom.json", R"({"law":{"atoms":[-1,1],"probs":[1,1],"lattice":true},
                                        "classParams":{"delta0":0.5,"c0":2,"minorant":{"-1":0.1,"1":0.1}}})")}),
            0);
  EXPECT_EQ(run({"law", "check", file("neg.json", R"({"atoms":[-1,1],"probs":[-1,2],"lattice":true})")}), 2);
  EXPECT_EQ(run({"law", "check", file("frac.json", R"({"atoms":[-0.5,1],"probs":[1,1],"lattice":true})")}), 2);
}

TEST_F(Cli, ReportMergeReflectsVerdicts) {
  const std::string cfg = file("lazy.json", std::string(R"({"family":)") + kLazyFamily + "}");
  ASSERT_EQ(run({"verify", "ballot", "--config", cfg, "--out", path("a.json")}), 0);
  ASSERT_EQ(run({"verify", "ballot", "--config", cfg, "--spread-cap", "1", "--out", path("b.json")}), 1);
  EXPECT_EQ(run({"report", "--merge", path("a.json"), path("a.json"), "--out", path("m.json")}), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("m.json"))).size(), 2u);
  EXPECT_EQ(run({"report", "--merge", path("a.json"), path("b.json"), "--format", "csv"}), 1);
  EXPECT_EQ(out_.str().substr(0, out_.str().find('\n') + 1), csv_header());
  EXPECT_EQ(run({"report", "--merge", file("junk.json", "[1, 2]")}), 2);
}
