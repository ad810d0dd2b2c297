#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "fsbp/cli.hpp"
#include "fsbp/fixtures.hpp"
#include "fsbp/io.hpp"

using namespace fsbp;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("fsbp_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("FSBP_SEED");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv("FSBP_SEED");
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    io::write_text(path(name), text);
    return path(name);
  }

  int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fsbp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const char* kMinimal =
    R"({"construct":{"space":{"kind":"monomial","degree":3},"grid":{"kind":"equidistant","n":10,"interval":[-1,1]}}})";

std::string error_of(const std::string& text) {
  try {
    io::parse_config(text);
  } catch (const io::ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const auto cfg = io::parse_config(std::string(kMinimal));
  ASSERT_TRUE(cfg.construct);
  EXPECT_EQ(cfg.construct->mode, NormMode::logistic_normalized);
  EXPECT_EQ(cfg.construct->optimizer.rng_seed, 0u);
  EXPECT_FALSE(cfg.construct->bandwidth);
  EXPECT_EQ(cfg.construct->space.degree, 3);
  EXPECT_EQ(cfg.construct->grid.build().size(), 10);
  EXPECT_FALSE(cfg.convergence);
}

TEST(Config, ValidationMessagesNameTheField) {
  EXPECT_NE(error_of(R"({"construct":{"space":{"kind":"monomial","degree":3},"grid":{"n":10},"bandwidth":10}})")
                .find("construct.bandwidth"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"construct":{"space":{"kind":"monomial","degree":-2},"grid":{"n":10}}})")
                .find("construct.space.degree"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"construct":{"space":{"kind":"monomial","degree":3},"grid":{"n":10},"colour":1}})")
                .find("construct.colour: unknown key"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"construct":{"space":{"kind":"monomial","degree":"3"},"grid":{"n":10}}})")
                .find("expected an integer"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"convergence":{"space":{"kind":"monomial","degree":3},"blocks":[2,4]}})")
                .find("convergence.blocks"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"construct":{"space":{"kind":"spline"},"grid":{"n":10}}})").find("construct.space.kind"),
            std::string::npos);
  EXPECT_NE(error_of("{not json").find("malformed"), std::string::npos);
  EXPECT_NE(error_of(R"({"plot":{}})").find("plot: unknown key"), std::string::npos);
}

TEST(Config, ExplicitGridAndOptimizer) {
  const auto cfg = io::parse_config(std::string(
      R"({"construct":{"space":{"kind":"monomial","degree":3},
          "grid":{"kind":"explicit","nodes":[-1,-0.62,-0.56,-0.53,-0.49,-0.36,0.06,0.2,0.75,1]},
          "mode":"softmax","bandwidth":4,
          "optimizer":{"memory":5,"rng_seed":12,"max_restarts":2}}})"));
  EXPECT_EQ(cfg.construct->grid.build().nodes()[1], -0.62);
  EXPECT_EQ(cfg.construct->mode, NormMode::softmax);
  EXPECT_EQ(*cfg.construct->bandwidth, 4);
  EXPECT_EQ(cfg.construct->optimizer.memory, 5);
  EXPECT_EQ(cfg.construct->optimizer.rng_seed, 12u);
  EXPECT_EQ(cfg.construct->optimizer.max_restarts, 2);
  EXPECT_FALSE(error_of(R"({"construct":{"space":{"kind":"exponential"},"grid":{"kind":"explicit","nodes":[0,0,1]}}})")
                   .empty());
}

TEST_F(TempDir, OperatorRoundTripIsBitExact) {
  const auto c = construct_operator(make_builtin_space({SpaceKind::monomial, 3}),
                                    make_grid(Interval(-1, 1), GridKind::equidistant, 10));
  const io::OperatorFile file{c.op, SpaceDescriptor{SpaceKind::monomial, 3}, {"logistic_normalized", 2, 7, 1e-13}};
  io::write_operator(path("op.json"), file);
  const auto back = io::read_operator(path("op.json"));
  EXPECT_EQ(back.op.p, c.op.p);
  EXPECT_EQ(back.op.q, c.op.q);
  EXPECT_EQ(back.op.grid.nodes(), c.op.grid.nodes());
  EXPECT_EQ(back.op.grid.interval(), c.op.grid.interval());
  EXPECT_EQ(back.op.space_name, c.op.space_name);
  EXPECT_EQ(back.space, file.space);
  EXPECT_EQ(*back.metadata.bandwidth, 2);
  EXPECT_EQ(back.metadata.seed, 7u);
  EXPECT_EQ(back.metadata.residual, 1e-13);
  EXPECT_EQ(back.metadata.tool_version, io::kToolVersion);
}

TEST_F(TempDir, FixtureFileLoadsAndVerifies) {
  const auto f = fixtures::dense_order4_n9();
  io::write_operator(path("n9.json"), {f.op, f.space, {}});
  const auto back = io::read_operator(path("n9.json"));
  EXPECT_TRUE(check_operator(back.op, make_builtin_space(*back.space), f.tolerances).pass);
}

TEST_F(TempDir, DamagedFilesRefused) {
  const auto f = fixtures::exponential_n4();
  io::write_operator(path("ok.json"), {f.op, f.space, {}});
  const auto text = io::read_text(path("ok.json"));
  write("cut.json", text.substr(0, text.size() / 2));
  EXPECT_THROW(io::read_operator(path("cut.json")), io::ConfigError);

  auto j = io::json::parse(text);
  j["p"][1] = -0.3301;
  write("neg.json", j.dump());
  try {
    io::read_operator(path("neg.json"));
    FAIL() << "negative weight accepted";
  } catch (const io::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("p: entry 1 is not positive"), std::string::npos);
  }

  j = io::json::parse(text);
  j["schema_version"] = "fsbp-operator/0";
  write("old.json", j.dump());
  EXPECT_THROW(io::read_operator(path("old.json")), io::ConfigError);

  j = io::json::parse(text);
  j["Q"].erase(1);
  write("short.json", j.dump());
  EXPECT_THROW(io::read_operator(path("short.json")), io::ConfigError);

  EXPECT_THROW(io::read_operator(path("missing.json")), io::ConfigError);
}

TEST(Csv, HeadersAndRows) {
  ConvergenceTable t;
  t.rows.push_back({2, 10, 20, 0.1, 1e-3});
  t.rows.push_back({4, 10, 40, 0.05, 6.25e-5, 4.0});
  const auto csv = io::convergence_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n_total,blocks,h,error,order");
  EXPECT_NE(csv.find("20,2,0.10000000000000001,0.001,\n"), std::string::npos);
  EXPECT_NE(csv.find("40,4,0.050000000000000003,6.2500000000000001e-05,4\n"), std::string::npos);
  EXPECT_EQ(io::probability_csv({0.0}, {1.5}), "t,probability_norm\n0,1.5\n");
  Vector x(1), u1(1), u2(1);
  x << 0.5;
  u1 << 3;
  u2 << 4;
  EXPECT_EQ(io::state_csv(x, u1, u2), "x,u1,u2,abs_psi_sq\n0.5,3,4,25\n");
}

TEST_F(TempDir, CliConstructAndVerify) {
  const auto cfg = write("poly3.json", kMinimal);
  EXPECT_EQ(cli({"construct", "--config", cfg, "--out", path("op.json"), "--report", path("rep.json")}), 0);
  ASSERT_TRUE(fs::exists(path("op.json")));
  const auto report = io::json::parse(io::read_text(path("rep.json")));
  EXPECT_EQ(report["optimization"]["status"], "converged");
  EXPECT_EQ(report["verification"]["pass"], true);

  EXPECT_EQ(cli({"verify", "--operator", path("op.json")}), 0);
  EXPECT_EQ(io::json::parse(out_.str())["pass"], true);
  // a cubic operator is not exact for quartics
  const auto quartic = write("q.json", R"({"verify":{"space":{"kind":"monomial","degree":4}}})");
  EXPECT_EQ(cli({"verify", "--operator", path("op.json"), "--config", quartic}), 1);
}

TEST_F(TempDir, CliSeedOverride) {
  const auto cfg = write("poly3.json", kMinimal);
  setenv("FSBP_SEED", "17", 1);
  ASSERT_EQ(cli({"construct", "--config", cfg, "--out", path("a.json"), "--report", path("ra.json")}), 0);
  EXPECT_EQ(io::read_operator(path("a.json")).metadata.seed, 17u);
  ASSERT_EQ(cli({"construct", "--config", cfg, "--out", path("b.json"), "--report", path("rb.json"), "--seed", "5"}), 0);
  EXPECT_EQ(io::read_operator(path("b.json")).metadata.seed, 5u);
  setenv("FSBP_SEED", "abc", 1);
  EXPECT_EQ(cli({"construct", "--config", cfg, "--out", path("c.json"), "--report", path("rc.json")}), 2);
}

TEST_F(TempDir, CliInfeasibleExitsOne) {
  const auto cfg = write("band.json", R"({"construct":{"space":{"kind":"monomial","degree":3},
      "grid":{"n":10},"bandwidth":3,"optimizer":{"max_restarts":0,"max_iters":2000}}})");
  EXPECT_EQ(cli({"construct", "--config", cfg, "--out", path("op.json"), "--report", path("rep.json")}), 1);
  EXPECT_FALSE(fs::exists(path("op.json")));
  EXPECT_EQ(io::json::parse(io::read_text(path("rep.json")))["optimization"]["status"], "infeasible");
}

TEST_F(TempDir, CliUsageErrors) {
  EXPECT_EQ(cli({"bogus"}), 2);
  EXPECT_EQ(cli({}), 2);
  EXPECT_EQ(cli({"construct"}), 2);
  EXPECT_EQ(cli({"construct", "--config", path("nope.json")}), 2);
  const auto bad = write("bad.json", R"({"construct":{"space":{"kind":"monomial","degree":3},"grid":{"n":10},"x":1}})");
  EXPECT_EQ(cli({"construct", "--config", bad}), 2);
  EXPECT_NE(err_.str().find("construct.x: unknown key"), std::string::npos);
  const auto other = write("other.json", R"({"verify":{}})");
  EXPECT_EQ(cli({"convergence", "--config", other}), 2);
  EXPECT_EQ(cli({"--help"}), 0);
}

TEST_F(TempDir, CliFixtures) {
  EXPECT_EQ(cli({"fixtures"}), 0);
  EXPECT_NE(out_.str().find("PASS dense_order4_n9"), std::string::npos);
  EXPECT_EQ(out_.str().find("FAIL"), std::string::npos);
}

TEST_F(TempDir, CliConvergenceWritesCsv) {
  const auto cfg = write("conv.json", R"({"convergence":{"space":{"kind":"monomial","degree":2},"nodes":6,
      "blocks":[2,4,8],"end_time":0.25}})");
  EXPECT_EQ(cli({"convergence", "--config", cfg, "--csv", path("c.csv")}), 0);
  const auto csv = io::read_text(path("c.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n_total,blocks,h,error,order");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST_F(TempDir, CliSchrodingerWritesCsv) {
  const auto cfg = write("s.json", R"({"schrodinger":{"space":"hermite","n":100,"end_time":0.05}})");
  EXPECT_EQ(cli({"schrodinger", "--config", cfg, "--series", path("n.csv"), "--snapshot", path("s.csv")}), 0);
  const auto series = io::read_text(path("n.csv"));
  const auto state = io::read_text(path("s.csv"));
  EXPECT_EQ(series.substr(0, series.find('\n')), "t,probability_norm");
  EXPECT_EQ(state.substr(0, state.find('\n')), "x,u1,u2,abs_psi_sq");
  EXPECT_EQ(std::count(state.begin(), state.end(), '\n'), 101);
}
