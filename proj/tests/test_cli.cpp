#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("killedfit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Invocation run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string(KILLEDFIT_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Invocation r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

// Rows of a CSV file, split on commas.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    rows.push_back(f);
  }
  return rows;
}

}  // namespace

TEST_F(Cli, FptPrintsDiscretizedMeanStepCount) {
  const auto r = run("fpt --case WD1");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("E(N) = 33.83"), std::string::npos) << r.out;
}

TEST_F(Cli, ConfigAndInputErrorsExitWithTwo) {
  write("bad_version.json", R"({"version": 99, "model": "WD"})");
  auto r = run("fpt -c " + path("bad_version.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("version"), std::string::npos) << r.err;

  write("unknown_key.json", R"({"version": 1, "model": "WD", "colour": 3})");
  EXPECT_EQ(run("fpt -c " + path("unknown_key.json").string()).code, 2);

  EXPECT_EQ(run("fpt --case WD9").code, 2);
  EXPECT_EQ(run("estimate --case WD1 -d " + path("missing.csv").string()).code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);

  write("bad.csv", "traj_id,step_index,value\nt1,0,0\nt1,1,0.5\nt1,3,0.7\n");
  r = run("estimate --case WD1 -d " + path("bad.csv").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
}

TEST_F(Cli, NumericalFailureExitsWithThree) {
  // Negative drift: the path never reaches b and the sub-step guard trips.
  const auto r = run("simulate --model WD --mu -1 --sigma 0.1 --b 10 --x0 0 --delta 1 -n 1");
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(Cli, NonConvergenceExitsWithFour) {
  ASSERT_EQ(run("simulate --case OU1 --seed 3 -n 2 -o " + path("t.csv").string()).code, 0);
  write("tight.json",
        R"({"version": 1, "model": "OU", "b": 10, "delta": 0.1,
            "optimizer": {"max_evals": 5, "restart": false}})");
  const auto r = run("estimate -c " + path("tight.json").string() + " -d " + path("t.csv").string() +
                     " --objective killed");
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST_F(Cli, SimulateHonorsSeed) {
  ASSERT_EQ(run("simulate --case OU1 --seed 5 -n 3 -o " + path("a.csv").string()).code, 0);
  ASSERT_EQ(run("simulate --case OU1 --seed 5 -n 3 -o " + path("b.csv").string()).code, 0);
  ASSERT_EQ(run("simulate --case OU1 --seed 6 -n 3 -o " + path("c.csv").string()).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(Cli, EstimateMatchesStudySingleTrajectoryRows) {
  const std::string common = "--case WD1 --seed 11";
  ASSERT_EQ(run("simulate " + common + " -n 4 -o " + path("t.csv").string()).code, 0);
  const auto e = run("estimate " + common + " -d " + path("t.csv").string() +
                     " --objective killed --no-global -o " + path("est.csv").string());
  ASSERT_EQ(e.code, 0) << e.err;
  const auto s = run("study " + common + " --n-total 4 -m 1 --objective killed -o " + path("sum.csv").string() +
                     " --raw-out " + path("raw.csv").string());
  ASSERT_EQ(s.code, 0) << s.err;

  const auto est = csv_rows(slurp(path("est.csv")));
  const auto raw = csv_rows(slurp(path("raw.csv")));
  ASSERT_EQ(est.size(), 5u);
  ASSERT_EQ(raw.size(), 5u);
  // est: traj_id,N,method,mu,sigma,... ; raw: method,m,group,mu,sigma,converged
  for (std::size_t i = 1; i < 5; ++i) {
    EXPECT_EQ(est[i][3], raw[i][3]) << "row " << i;
    EXPECT_EQ(est[i][4], raw[i][4]) << "row " << i;
  }
}

TEST_F(Cli, StudyCsvIsBitStable) {
  const std::string args = "study --case OU1 --seed 2 --n-total 6 -m 1,3 --objective both --threads ";
  ASSERT_EQ(run(args + "1 -o " + path("a.csv").string()).code, 0);
  ASSERT_EQ(run(args + "3 -o " + path("b.csv").string()).code, 0);
  const auto a = slurp(path("a.csv"));
  EXPECT_EQ(a, slurp(path("b.csv")));
  // Full precision: every estimate parses back to the printed digits.
  const auto rows = csv_rows(a);
  ASSERT_GT(rows.size(), 1u);
  const std::string avg = rows[1][5];
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", std::strtod(avg.c_str(), nullptr));
  EXPECT_EQ(avg, buf);
}

TEST_F(Cli, StudyWdCase2ShowsUpwardDriftBias) {
  // Desk-scale version of the single-trajectory WD table row: mean mu_hat
  // near 0.52 for a true value of 0.3.
  const auto r = run("study --case WD2 --seed 1 --n-total 400 -m 1 --objective killed -o " +
                     path("s.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(slurp(path("s.csv")));
  ASSERT_EQ(rows[1][3], "mu");
  const double avg = std::strtod(rows[1][5].c_str(), nullptr);
  EXPECT_NEAR(avg, 0.520, 0.06);
}

TEST_F(Cli, ConfigOutputsAreUsedUnlessOverridden) {
  write("run.json", R"({"version": 1, "model": "OU", "theta": {"mu": 0.43, "beta": 0.05, "sigma": 1.2},
                        "b": 10, "delta": 0.1, "seed": 4, "simulation": {"n_traj": 3},
                        "outputs": {"trajectories": ")" + path("cfg.csv").string() + R"("}})");
  ASSERT_EQ(run("simulate -c " + path("run.json").string()).code, 0);
  EXPECT_TRUE(fs::exists(path("cfg.csv")));
  ASSERT_EQ(run("simulate -c " + path("run.json").string() + " -o " + path("flag.csv").string()).code, 0);
  EXPECT_EQ(slurp(path("cfg.csv")), slurp(path("flag.csv")));

  ASSERT_EQ(run("study -c " + path("run.json").string() + " --n-total 4 -m 1,2 --figures-dir " +
                path("fig").string()).code,
            0);
  EXPECT_TRUE(fs::exists(path("fig") / "beta_killed_m2_qq.csv"));
  EXPECT_TRUE(fs::exists(path("fig") / "mu_killed_ci_vs_m.csv"));
}
