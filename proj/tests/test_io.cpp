#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "killedfit/errors.hpp"
#include "killedfit/io.hpp"

using namespace killedfit;
namespace fs = std::filesystem;

namespace {

io::IngestOptions wd_opts() {
  io::IngestOptions o;
  o.delta = 1.0;
  o.b = 10.0;
  o.kind = ModelKind::WD;
  return o;
}

long parse_error_line(const std::string& text, const io::IngestOptions& opts) {
  try {
    io::parse_trajectories_csv(text, opts);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(TrajectoryCsv, ParsesWithAndWithoutStepZero) {
  auto opts = wd_opts();
  opts.x0 = -1.0;
  const std::string text =
      "traj_id,step_index,value\n"
      "a,0,0.5\n"
      "a,1,1.25\n"
      "a,2,3\n"
      "\n"
      "b,1,2.0\n"
      "b,2,4.0\n";
  const auto set = io::parse_trajectories_csv(text, opts);
  ASSERT_EQ(set.trajectories.size(), 2u);
  EXPECT_EQ(set.ids[0], "a");
  EXPECT_EQ(set.trajectories[0].x0, 0.5);
  EXPECT_EQ(set.trajectories[0].obs, (std::vector<double>{1.25, 3.0}));
  EXPECT_EQ(set.trajectories[1].x0, -1.0);
  EXPECT_EQ(set.trajectories[1].obs, (std::vector<double>{2.0, 4.0}));
  EXPECT_TRUE(set.trajectories[1].crossed);

  opts.last_censored = true;
  EXPECT_FALSE(io::parse_trajectories_csv(text, opts).trajectories.back().crossed);
  EXPECT_TRUE(io::parse_trajectories_csv("traj_id,step_index,value\n", opts).trajectories.empty());
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  const std::vector<KilledTrajectory> trajs = {
      {0.1, 0.1, 10.0, {0.30000000000000004, 1.0 / 3.0, 9.999999999999998}, true},
      {-2.5, 0.1, 10.0, {}, true},
  };
  const auto text = io::format_trajectories_csv(trajs);
  io::IngestOptions opts;
  opts.delta = 0.1;
  opts.b = 10.0;
  const auto back = io::parse_trajectories_csv(text, opts);
  ASSERT_EQ(back.trajectories.size(), 2u);
  EXPECT_EQ(back.trajectories[0], trajs[0]);
  EXPECT_EQ(back.trajectories[1], trajs[1]);
  EXPECT_EQ(back.ids[1], "1");
}

TEST(TrajectoryCsv, ErrorsCarryLineNumbers) {
  const auto opts = wd_opts();
  EXPECT_EQ(parse_error_line("id,step,value\n", opts), 1);
  EXPECT_EQ(parse_error_line("traj_id,step_index,value\na,0,1\na,2,3\n", opts), 3);
  EXPECT_EQ(parse_error_line("traj_id,step_index,value\na,0,1\na,1,10.0\n", opts), 3);
  EXPECT_EQ(parse_error_line("traj_id,step_index,value\na,0,1\na,1,abc\n", opts), 3);
  EXPECT_EQ(parse_error_line("traj_id,step_index,value\na,0,1\nb,0,1\na,1,2\n", opts), 4);
  EXPECT_EQ(parse_error_line("traj_id,step_index,value\na,0,1,7\n", opts), 2);
  EXPECT_EQ(parse_error_line("traj_id,step_index,value\na,3,1\n", opts), 2);
  EXPECT_EQ(parse_error_line("traj_id,step_index,value\na,0,nan\n", opts), 2);
  // No x0 available for a trajectory starting at step 1.
  EXPECT_EQ(parse_error_line("traj_id,step_index,value\n\na,1,1\n", opts), 3);

  auto sr = wd_opts();
  sr.kind = ModelKind::SR;
  EXPECT_EQ(parse_error_line("traj_id,step_index,value\na,0,1\na,1,-0.5\n", sr), 3);

  try {
    io::parse_trajectories_csv("traj_id,step_index,value\na,0,1\na,1,12\n", opts);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(TrajectoryCsv, PerTrajectoryThresholds) {
  auto opts = wd_opts();
  opts.b_by_id["tall"] = 20.0;
  const auto set =
      io::parse_trajectories_csv("traj_id,step_index,value\ntall,0,0\ntall,1,15\n", opts);
  EXPECT_EQ(set.trajectories[0].b, 20.0);
  EXPECT_THROW(io::parse_trajectories_csv("traj_id,step_index,value\nshort,0,0\nshort,1,15\n", opts),
               ParseError);
}

TEST(Files, AtomicWriteAndRead) {
  const auto dir = fs::temp_directory_path() / "killedfit_io_test";
  fs::create_directories(dir);
  const auto path = (dir / "out.csv").string();
  io::write_file_atomic(path, "hello\n");
  EXPECT_EQ(io::read_file(path), "hello\n");
  EXPECT_FALSE(fs::exists(path + ".tmp"));
  io::write_file_atomic(path, "again\n");
  EXPECT_EQ(io::read_file(path), "again\n");
  fs::remove_all(dir);
  EXPECT_THROW(io::read_file((dir / "missing").string()), ParseError);
}

TEST(Tables, CsvAndText) {
  const Table t{{"m", "mean"}, {{1.0, 0.5}, {30.0, 0.25}}};
  EXPECT_EQ(io::format_table_csv(t), "m,mean\n1,0.5\n30,0.25\n");
  const auto text = io::format_table_text(t, 2);
  EXPECT_NE(text.find("30.00"), std::string::npos);
  EXPECT_NE(text.find("mean"), std::string::npos);
}

TEST(RunConfig, FullDocument) {
  const std::string text = R"({
    "version": 1,
    "model": "OU",
    "theta": {"mu": 0.43, "beta": 0.05, "sigma": 1.2},
    "x0": 0.0, "b": 10.0, "delta": 0.1,
    "b_by_id": {"cell7": 12.5},
    "simulation": {"n_traj": 50, "substep_divisor": 20, "stepper": "euler"},
    "study": {"n_total": 300, "group_sizes": [1, 30], "objectives": ["killed", "naive"],
              "n_boot": 40, "n_outer": 10},
    "crossing": {"g": "density_integral", "psi": "squared_diffusion"},
    "optimizer": {"max_evals": 900, "rel_tol": 1e-9, "restart": false},
    "seed": 42, "threads": 3,
    "outputs": {"estimates": "est.csv"}
  })";
  const auto c = io::parse_run_config(text);
  EXPECT_EQ(c.model, ModelKind::OU);
  ASSERT_TRUE(c.theta);
  EXPECT_EQ(*c.theta, ModelSpec::ou(0.43, 0.05, 1.2));
  EXPECT_EQ(c.threshold().b, 10.0);
  EXPECT_EQ(c.threshold().delta, 0.1);
  EXPECT_EQ(c.b_by_id.at("cell7"), 12.5);
  EXPECT_EQ(c.n_traj, 50u);
  EXPECT_EQ(c.substep_divisor, 20);
  EXPECT_EQ(c.stepper, Stepper::Euler);
  EXPECT_EQ(c.group_sizes, (std::vector<std::size_t>{1, 30}));
  EXPECT_EQ(c.objectives.size(), 2u);
  EXPECT_EQ(c.n_boot, 40u);
  EXPECT_EQ(c.crossing_method().g, GMethod::DensityIntegral);
  EXPECT_EQ(c.crossing_method().bridge, BridgeMethod::BaldiCaramellino);
  EXPECT_EQ(c.crossing_method().psi, PsiCoefficient::SquaredDiffusion);
  EXPECT_EQ(c.fit.nelder_mead.max_evals, 900);
  EXPECT_FALSE(c.fit.restart_on_max_evals);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.threads, 3);
  EXPECT_EQ(c.outputs.at("estimates"), "est.csv");
  EXPECT_EQ(c.ingest_options().kind, ModelKind::OU);
}

TEST(RunConfig, DefaultsFromMinimalDocument) {
  const auto c = io::parse_run_config(R"({"version": 1, "model": "WD", "b": 10})");
  EXPECT_FALSE(c.theta);
  EXPECT_EQ(c.crossing_method().g, GMethod::ExactWD);
  EXPECT_EQ(c.group_sizes, (std::vector<std::size_t>{1}));
  EXPECT_EQ(c.seed, 1u);
}

TEST(RunConfig, RejectsBadDocuments) {
  const char* bad[] = {
      R"({"model": "WD"})",
      R"({"version": 2, "model": "WD"})",
      R"({"version": 1, "model": "GBM"})",
      R"({"version": 1, "model": "WD", "sigma": 1})",
      R"({"version": 1, "model": "WD", "simulation": {"n_traj": 5, "substeps": 3}})",
      R"({"version": 1, "model": "WD", "theta": {"mu": 1, "beta": 1, "sigma": 1}})",
      R"({"version": 1, "model": "SR", "theta": {"mu": 0.1, "beta": 1, "sigma": 1}})",
      R"({"version": 1, "model": "OU", "crossing": {"bridge": "exact_wd"}})",
      R"({"version": 1, "model": "WD", "study": {"group_sizes": [0]}})",
      R"({"version": 1, "model": "WD", "study": {"objectives": ["ml"]}})",
      R"({"version": 1, "model": "WD", "delta": -1})",
      R"({"version": 1, "model": "WD", "seed": "x"})",
      R"({"version": 1, "model": "WD")",
  };
  for (const char* text : bad) EXPECT_THROW(io::parse_run_config(text), ParseError) << text;
}

TEST(Segmentation, SplitsAtSpikes) {
  // Resting level -70 mV shifted by +70; spikes reach +30 mV (100 after the
  // shift), followed by an undershoot below the start level.
  std::vector<double> v;
  auto ramp = [&](int n, double from, double to) {
    for (int i = 0; i < n; ++i) v.push_back(from + (to - from) * i / n);
  };
  ramp(5, -70.0, -60.0);   // discarded: before the first spike
  v.push_back(30.0);       // spike 1
  v.push_back(-80.0);      // undershoot
  ramp(6, -68.0, -58.0);   // segment 1
  v.push_back(25.0);       // spike 2
  v.push_back(28.0);
  ramp(4, -69.0, -59.0);   // segment 2, censored (no closing spike)

  io::SegmentOptions o;
  o.dt = 0.1;
  o.offset = 70.0;
  o.spike_level = 50.0;
  o.start_level = -5.0;
  const auto res = io::segment_recording(v, o);
  ASSERT_EQ(res.segments.size(), 2u);
  const auto& s1 = res.segments[0];
  EXPECT_EQ(s1.start_index, 7u);
  EXPECT_TRUE(s1.crossed);
  EXPECT_EQ(s1.values.size(), 6u);
  EXPECT_NEAR(s1.values.front(), 2.0, 1e-12);
  const auto& s2 = res.segments[1];
  EXPECT_FALSE(s2.crossed);
  EXPECT_EQ(s2.values.size(), 4u);
  // One group: b is the largest retained sample plus epsilon.
  EXPECT_NEAR(s1.b, 70.0 - 58.0 - 10.0 / 6.0 + 1e-3, 1e-9);
  EXPECT_EQ(s1.b, s2.b);

  const auto t = s1.to_trajectory(0.1);
  EXPECT_EQ(t.x0, s1.values.front());
  EXPECT_EQ(t.obs.size(), 5u);
  EXPECT_NO_THROW(t.validate(ModelKind::OU));
}

TEST(Segmentation, ManualThresholdTruncatesSegments) {
  std::vector<double> v{0.0, 100.0, 1.0, 2.0, 3.0, 4.0, 100.0, 1.0, 2.0, 100.0};
  io::SegmentOptions o;
  o.spike_level = 50.0;
  o.start_level = 0.5;
  o.rule = io::ThresholdRule::Manual;
  o.manual_b = {2.5};
  auto res = io::segment_recording(v, o);
  ASSERT_EQ(res.segments.size(), 2u);
  EXPECT_EQ(res.segments[0].values, (std::vector<double>{1.0, 2.0}));
  EXPECT_TRUE(res.segments[0].crossed);

  o.group_size = 1;
  o.manual_b = {10.0, 1.5};
  res = io::segment_recording(v, o);
  ASSERT_EQ(res.segments.size(), 2u);
  EXPECT_EQ(res.segments[0].b, 10.0);
  EXPECT_EQ(res.segments[1].values, (std::vector<double>{1.0}));

  o.manual_b = {1.0, 2.0, 3.0};
  EXPECT_THROW(io::segment_recording(v, o), DomainError);
}

TEST(Segmentation, NoSpikeWarns) {
  io::SegmentOptions o;
  o.spike_level = 50.0;
  const auto res = io::segment_recording({1.0, 2.0, 3.0}, o);
  ASSERT_EQ(res.segments.size(), 1u);
  EXPECT_FALSE(res.segments[0].crossed);
  EXPECT_FALSE(res.warnings.empty());
}
