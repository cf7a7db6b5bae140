#pragma once

// Trajectory CSV files, JSON run configuration and segmentation of
// continuous recordings into killed trajectories.
//
// CSV layout (header required):
//
//   traj_id,step_index,value
//   a,0,0.0          <- optional: step 0 is x0
//   a,1,0.31
//   ...
//
// Step indices of a trajectory must be consecutive. Without a step-0 row the
// initial state comes from IngestOptions::x0.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "killedfit/crossing.hpp"
#include "killedfit/estimate.hpp"
#include "killedfit/likelihood.hpp"
#include "killedfit/models.hpp"
#include "killedfit/simulate.hpp"
#include "killedfit/study.hpp"

namespace killedfit::io {

struct TrajectorySet {
  std::vector<std::string> ids;
  std::vector<KilledTrajectory> trajectories;
};

struct IngestOptions {
  double delta = 1.0;
  double b = 0.0;
  std::map<std::string, double> b_by_id;
  std::optional<double> x0;
  /// Model used to validate the state space (SR requires positive values).
  std::optional<ModelKind> kind;
  /// Mark the last trajectory as not having crossed (recording ended early).
  bool last_censored = false;
};

/// Throws ParseError carrying the 1-based line number, or DomainError naming
/// the trajectory whose invariants fail.
TrajectorySet parse_trajectories_csv(const std::string& text, const IngestOptions& opts);
TrajectorySet read_trajectories_csv(const std::string& path, const IngestOptions& opts);

/// Fixed "%.17g" formatting; ids default to 0, 1, ...
std::string format_trajectories_csv(const TrajectorySet& set);
std::string format_trajectories_csv(const std::vector<KilledTrajectory>& trajs);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string format_table_csv(const Table& table);
/// Right-aligned columns for terminal output.
std::string format_table_text(const Table& table, int precision = 4);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

inline constexpr int kConfigVersion = 1;

struct RunConfig {
  int version = kConfigVersion;
  ModelKind model = ModelKind::WD;
  std::optional<ModelSpec> theta;
  double x0 = 0.0;
  double b = 0.0;
  double delta = 1.0;
  std::map<std::string, double> b_by_id;
  bool last_censored = false;

  std::size_t n_traj = 100;
  int substep_divisor = 10;
  Stepper stepper = Stepper::ExactTransition;

  std::size_t n_total = 2000;
  std::vector<std::size_t> group_sizes{1};
  std::vector<Objective> objectives{Objective::Killed};
  std::size_t n_boot = 300;
  std::size_t n_outer = 300;

  std::optional<CrossingMethod> crossing;
  FitOptions fit{};

  std::uint64_t seed = 1;
  int threads = 1;
  std::map<std::string, std::string> outputs;

  ThresholdConfig threshold() const { return {b, x0, delta}; }
  CrossingMethod crossing_method() const;
  IngestOptions ingest_options() const;
};

/// Parses the JSON document; unknown keys, wrong types and a missing or
/// unsupported version are ParseErrors.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// ---------------------------------------------------------------------------
// Recording segmentation
// ---------------------------------------------------------------------------

enum class ThresholdRule { Manual, MaxPlusEpsilon };

struct SegmentOptions {
  double dt = 1.0;
  /// Added to every sample before anything else.
  double offset = 0.0;
  /// Translated samples above this level belong to a spike.
  double spike_level = 0.0;
  /// A segment starts at the first post-spike sample above this level.
  double start_level = 0.0;
  ThresholdRule rule = ThresholdRule::MaxPlusEpsilon;
  /// Manual thresholds: one for all groups, or one per group.
  std::vector<double> manual_b;
  double epsilon = 1e-3;
  /// Consecutive segments sharing one threshold; 0 puts all in one group.
  std::size_t group_size = 0;
};

struct RecordingSegment {
  std::size_t start_index = 0;
  /// One past the last retained sample.
  std::size_t end_index = 0;
  std::size_t group = 0;
  double b = 0.0;
  bool crossed = false;
  /// Translated samples, first one is x0.
  std::vector<double> values;

  KilledTrajectory to_trajectory(double dt) const;
};

struct SegmentationResult {
  std::vector<RecordingSegment> segments;
  std::vector<std::string> warnings;
};

/// Cuts a uniformly sampled recording at spikes. The stretch before the
/// first spike is discarded (its start is unknown); the stretch after the
/// last spike is kept as a censored segment. A recording without spikes
/// yields one censored segment starting at sample 0 and a warning.
SegmentationResult segment_recording(const std::vector<double>& samples,
                                     const SegmentOptions& opts);

}  // namespace killedfit::io
