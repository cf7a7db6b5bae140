#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "killedfit/bootstrap.hpp"
#include "killedfit/crossing.hpp"
#include "killedfit/errors.hpp"
#include "killedfit/estimate.hpp"
#include "killedfit/io.hpp"
#include "killedfit/simulate.hpp"
#include "killedfit/study.hpp"

namespace kf = killedfit;
namespace io = killedfit::io;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNotConverged = 4;

struct ModelFlags {
  std::string config;
  std::string preset;
  std::string model;
  std::optional<double> mu, beta, sigma, x0, b, delta;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("-c,--config", f.config, "JSON run configuration");
  cmd->add_option("--case", f.preset, "Preset parameter case, e.g. WD1, OU1, SR3");
  cmd->add_option("--model", f.model, "Model kind: WD, OU or SR");
  cmd->add_option("--mu", f.mu);
  cmd->add_option("--beta", f.beta);
  cmd->add_option("--sigma", f.sigma);
  cmd->add_option("--x0", f.x0, "Initial state");
  cmd->add_option("--b", f.b, "Threshold");
  cmd->add_option("--delta", f.delta, "Sampling step");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
}

// Config file first, then preset case, then individual flags.
io::RunConfig resolve(const ModelFlags& f) {
  io::RunConfig c;
  if (!f.config.empty()) c = io::load_run_config(f.config);
  if (!f.preset.empty()) {
    if (f.preset.size() < 3) throw kf::ParseError("unknown case '" + f.preset + "'");
    const auto kind = kf::parse_model_kind(f.preset.substr(0, 2));
    const auto pc = kf::preset_case(kind, std::atoi(f.preset.c_str() + 2));
    if (!pc) throw kf::ParseError("unknown case '" + f.preset + "'");
    c.model = kind;
    c.theta = pc->model;
    c.x0 = pc->cfg.x0;
    c.b = pc->cfg.b;
    c.delta = pc->cfg.delta;
  }
  if (!f.model.empty()) {
    const auto kind = kf::parse_model_kind(f.model);
    if (kind != c.model && c.theta) c.theta->kind = kind;
    c.model = kind;
  }
  if (f.mu || f.beta || f.sigma) {
    kf::ModelSpec m = c.theta.value_or(kf::ModelSpec{c.model, 0.0, 0.0, 1.0});
    m.kind = c.model;
    if (f.mu) m.mu = *f.mu;
    if (f.beta) m.beta = *f.beta;
    if (f.sigma) m.sigma = *f.sigma;
    c.theta = m;
  }
  if (c.theta && c.model == kf::ModelKind::WD) c.theta->beta = 0.0;
  if (f.x0) c.x0 = *f.x0;
  if (f.b) c.b = *f.b;
  if (f.delta) c.delta = *f.delta;
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (!(c.delta > 0.0)) throw kf::ParseError("delta must be positive");
  return c;
}

kf::ModelSpec require_theta(const io::RunConfig& c) {
  if (!c.theta) throw kf::ParseError("model parameters are required (theta, --case or --mu/--sigma)");
  try {
    c.theta->validate();
  } catch (const kf::DomainError& e) {
    throw kf::ParseError(e.what());
  }
  return *c.theta;
}

// A command-line path wins over the config's outputs section.
std::string output_path(const std::string& flag, const io::RunConfig& c, const char* key) {
  if (!flag.empty()) return flag;
  const auto it = c.outputs.find(key);
  return it == c.outputs.end() ? std::string() : it->second;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    io::write_file_atomic(path, content);
  }
}

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

// Full precision for CSV, rounded for the aligned text view.
std::string number(double v, bool csv, int precision) {
  if (!csv) return fixed(v, precision);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string objective_name(kf::Objective o) { return o == kf::Objective::Killed ? "killed" : "naive"; }

std::vector<kf::Objective> parse_objectives(const std::string& s) {
  std::vector<kf::Objective> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "killed") {
      out.push_back(kf::Objective::Killed);
    } else if (tok == "naive") {
      out.push_back(kf::Objective::Naive);
    } else if (tok == "both") {
      out.push_back(kf::Objective::Killed);
      out.push_back(kf::Objective::Naive);
    } else {
      throw kf::ParseError("unknown objective '" + tok + "'");
    }
  }
  if (out.empty()) throw kf::ParseError("no objective given");
  return out;
}

// Rows of strings rendered as CSV or as aligned text.
struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
  std::string text() const {
    std::vector<std::size_t> w(header.size(), 0);
    for (std::size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
    for (const auto& r : rows)
      for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].size());
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        out << (i ? "  " : "") << std::string(w[i] - std::min(w[i], r[i].size()), ' ') << r[i];
      }
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out.str();
  }
};

// ---------------------------------------------------------------------------

struct SimulateArgs {
  ModelFlags m;
  std::optional<std::size_t> n;
  std::optional<int> divisor;
  std::string stepper;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  auto c = resolve(a.m);
  kf::SimPlan plan;
  plan.model = require_theta(c);
  plan.cfg = c.threshold();
  plan.n_traj = a.n.value_or(c.n_traj);
  plan.substep_divisor = a.divisor.value_or(c.substep_divisor);
  plan.stepper = c.stepper;
  if (a.stepper == "euler") plan.stepper = kf::Stepper::Euler;
  if (a.stepper == "exact") plan.stepper = kf::Stepper::ExactTransition;
  plan.seed = c.seed;
  const auto trajs = kf::simulate_killed(plan, c.threads);
  emit(output_path(a.out, c, "trajectories"), io::format_trajectories_csv(trajs));
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  ModelFlags m;
  std::string data;
  std::string objectives = "both";
  std::string out;
  bool no_global = false;
};

std::vector<std::string> fit_row(const std::string& id, std::size_t n, const kf::FitResult& r, bool csv) {
  std::vector<std::string> row{id, std::to_string(n), objective_name(r.method)};
  for (double v : r.theta_hat.theta()) row.push_back(number(v, csv, 6));
  row.push_back(number(r.loglik, csv, 6));
  row.push_back(r.converged ? "1" : "0");
  row.push_back(r.boundary_flag ? "1" : "0");
  return row;
}

std::vector<std::string> fit_header(kf::ModelKind kind) {
  std::vector<std::string> h{"traj_id", "N", "method"};
  for (const auto& p : kf::parameter_names(kind)) h.push_back(p);
  h.insert(h.end(), {"loglik", "converged", "boundary"});
  return h;
}

int run_estimate(const EstimateArgs& a) {
  const auto c = resolve(a.m);
  const auto set = io::read_trajectories_csv(a.data, c.ingest_options());
  if (set.trajectories.empty()) throw kf::ParseError("no trajectories in '" + a.data + "'");
  const auto method = c.crossing_method();
  const auto objectives = parse_objectives(a.objectives);
  const auto out = output_path(a.out, c, "estimates");
  const bool csv = !out.empty();

  TextTable t{fit_header(c.model), {}};
  bool all_converged = true;
  for (std::size_t i = 0; i < set.trajectories.size(); ++i) {
    const std::span<const kf::KilledTrajectory> one(&set.trajectories[i], 1);
    for (auto obj : objectives) {
      const auto r = kf::fit(c.model, one, obj, method, c.fit);
      all_converged = all_converged && r.converged;
      t.rows.push_back(fit_row(set.ids[i], set.trajectories[i].n_steps(), r, csv));
    }
  }
  if (!a.no_global && set.trajectories.size() > 1) {
    std::size_t n_all = 0;
    for (const auto& tr : set.trajectories) n_all += tr.n_steps();
    for (auto obj : objectives) {
      const auto r = kf::fit(c.model, set.trajectories, obj, method, c.fit);
      all_converged = all_converged && r.converged;
      t.rows.push_back(fit_row("global", n_all, r, csv));
    }
  }
  if (out.empty()) {
    std::cout << t.text();
  } else {
    emit(out, t.csv());
  }
  return all_converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------

struct BootstrapArgs {
  ModelFlags m;
  std::string data;
  std::optional<std::size_t> n_boot;
  std::optional<int> divisor;
  std::string out;
};

int run_bootstrap(const BootstrapArgs& a) {
  const auto c = resolve(a.m);
  const auto set = io::read_trajectories_csv(a.data, c.ingest_options());
  const auto method = c.crossing_method();
  kf::BootstrapOptions bo;
  bo.n_boot = a.n_boot.value_or(c.n_boot);
  bo.substep_divisor = a.divisor.value_or(c.substep_divisor);
  bo.stepper = c.stepper;
  bo.seed = c.seed;
  bo.threads = c.threads;

  auto header = fit_header(c.model);
  for (const auto& p : kf::parameter_names(c.model)) header.push_back(p + "_bc");
  header.insert(header.end(), {"n_boot", "n_failed", "valid"});
  TextTable t{header, {}};
  const auto out = output_path(a.out, c, "estimates");
  const bool csv = !out.empty();
  bool ok = true;
  for (std::size_t i = 0; i < set.trajectories.size(); ++i) {
    const std::span<const kf::KilledTrajectory> one(&set.trajectories[i], 1);
    const auto r = kf::fit(c.model, one, kf::Objective::Killed, method, c.fit);
    auto row = fit_row(set.ids[i], set.trajectories[i].n_steps(), r, csv);
    if (!r.converged) {
      ok = false;
      for (std::size_t k = 0; k < kf::parameter_count(c.model); ++k) row.push_back("nan");
      row.insert(row.end(), {"0", "0", "0"});
    } else {
      const std::uint64_t prefix[] = {i};
      const auto rep = kf::bias_correct(one, r, method, c.fit, bo, prefix);
      for (double v : rep.theta_bc) row.push_back(number(v, csv, 6));
      row.push_back(std::to_string(rep.n_boot));
      row.push_back(std::to_string(rep.n_failed));
      row.push_back(rep.valid ? "1" : "0");
      ok = ok && rep.valid;
    }
    t.rows.push_back(std::move(row));
  }
  if (out.empty()) {
    std::cout << t.text();
  } else {
    emit(out, t.csv());
  }
  return ok ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------

struct StudyArgs {
  ModelFlags m;
  std::optional<std::size_t> n_total;
  std::vector<std::size_t> group_sizes;
  std::string objectives;
  std::optional<int> divisor;
  std::string out;
  std::string raw_out;
  std::string figures_dir;
};

int run_study(const StudyArgs& a) {
  const auto c = resolve(a.m);
  kf::StudyPlan plan;
  plan.model = require_theta(c);
  plan.cfg = c.threshold();
  plan.substep_divisor = a.divisor.value_or(c.substep_divisor);
  plan.stepper = c.stepper;
  plan.seed = c.seed;
  plan.n_total = a.n_total.value_or(c.n_total);
  plan.group_sizes = a.group_sizes.empty() ? c.group_sizes : a.group_sizes;
  plan.objectives = a.objectives.empty() ? c.objectives : parse_objectives(a.objectives);
  plan.method = c.crossing_method();
  plan.fit = c.fit;
  plan.threads = c.threads;
  const auto res = kf::run_study(plan);

  TextTable t{{"method", "m", "k", "par", "true", "avg", "rel_bias", "sd", "q2.5", "q97.5",
               "avg_N", "not_converged"},
              {}};
  const auto out = output_path(a.out, c, "summary");
  const auto raw_out = output_path(a.raw_out, c, "raw");
  const auto figures_dir = output_path(a.figures_dir, c, "figures");
  const bool csv = !out.empty();
  for (const auto& s : res.summaries) {
    for (const auto& p : s.params) {
      t.rows.push_back({objective_name(s.objective), std::to_string(s.group_size),
                        std::to_string(s.n_replicates), p.name, number(p.truth, csv, 4),
                        number(p.mean, csv, 4), number(p.rel_bias, csv, 4), number(p.sd, csv, 4),
                        number(p.q025, csv, 4), number(p.q975, csv, 4), number(s.avg_N, csv, 2),
                        std::to_string(s.n_nonconverged)});
    }
  }
  if (out.empty()) {
    std::cout << t.text();
  } else {
    emit(out, t.csv());
  }

  if (!raw_out.empty()) {
    TextTable raw{{"method", "m", "group"}, {}};
    for (const auto& p : kf::parameter_names(plan.model.kind)) raw.header.push_back(p);
    raw.header.push_back("converged");
    for (const auto& g : res.raw) {
      for (std::size_t i = 0; i < g.theta.size(); ++i) {
        std::vector<std::string> row{objective_name(g.objective), std::to_string(g.group_size),
                                     std::to_string(i)};
        for (double v : g.theta[i]) row.push_back(number(v, true, 0));
        row.push_back(g.converged[i] ? "1" : "0");
        raw.rows.push_back(std::move(row));
      }
    }
    emit(raw_out, raw.csv());
  }

  if (!figures_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(figures_dir);
    const auto names = kf::parameter_names(plan.model.kind);
    const auto truth = plan.model.theta();
    for (const auto& g : res.raw) {
      const std::string tag = objective_name(g.objective) + "_m" + std::to_string(g.group_size);
      for (std::size_t p = 0; p < names.size(); ++p) {
        std::vector<double> rel = g.column(p);
        for (double& v : rel) v = (v - truth[p]) / truth[p];
        const auto base = (fs::path(figures_dir) / (names[p] + "_" + tag)).string();
        io::write_file_atomic(base + "_density.csv", io::format_table_csv(kf::kernel_density(rel)));
        io::write_file_atomic(base + "_qq.csv", io::format_table_csv(kf::normal_qq(rel)));
      }
    }
    for (auto obj : plan.objectives) {
      for (std::size_t p = 0; p < names.size(); ++p) {
        const auto path = fs::path(figures_dir) / (names[p] + "_" + objective_name(obj) + "_ci_vs_m.csv");
        io::write_file_atomic(path.string(),
                              io::format_table_csv(kf::ci_vs_m(res, obj, p, truth[p])));
      }
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct FptArgs {
  ModelFlags m;
  long horizon = 1500;
};

int run_fpt(const FptArgs& a) {
  const auto c = resolve(a.m);
  const auto model = require_theta(c);
  const auto cfg = c.threshold();
  cfg.validate(model.kind);
  const double et = kf::mean_fpt(model, cfg);
  std::cout << "model " << kf::to_string(model.kind) << "  b=" << cfg.b << "  x0=" << cfg.x0
            << "  delta=" << cfg.delta << '\n';
  if (model.kind == kf::ModelKind::WD) {
    const double en = kf::discretized_mean_N(model, cfg, a.horizon > 0 ? std::optional<long>(a.horizon)
                                                                      : std::nullopt);
    const double full = kf::discretized_mean_N(model, cfg);
    std::cout << "E(N) = " << fixed(en, 2);
    if (a.horizon > 0) std::cout << "  (series truncated at n = " << a.horizon << ")";
    std::cout << '\n';
    std::cout << "E(N) untruncated = " << fixed(full, 2) << '\n';
  }
  std::cout << "E(T) = " << fixed(et, 4) << "  E(T)/delta = " << fixed(et / cfg.delta, 2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SegmentArgs {
  std::string input;
  io::SegmentOptions opts;
  std::string threshold = "max";
  std::string out;
  std::string config_out;
};

int run_segment(SegmentArgs a) {
  std::vector<double> samples;
  {
    std::istringstream in(io::read_file(a.input));
    std::string line;
    long no = 0;
    while (std::getline(in, line)) {
      ++no;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      try {
        std::size_t used = 0;
        samples.push_back(std::stod(line.substr(pos), &used));
      } catch (const std::exception&) {
        throw kf::ParseError("invalid sample '" + line + "'", no);
      }
    }
  }
  if (a.threshold.rfind("manual:", 0) == 0) {
    a.opts.rule = io::ThresholdRule::Manual;
    std::stringstream ss(a.threshold.substr(7));
    std::string tok;
    while (std::getline(ss, tok, ',')) a.opts.manual_b.push_back(std::stod(tok));
  } else if (a.threshold == "max") {
    a.opts.rule = io::ThresholdRule::MaxPlusEpsilon;
  } else {
    throw kf::ParseError("threshold must be 'max' or 'manual:B1[,B2,...]'");
  }
  const auto res = io::segment_recording(samples, a.opts);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';

  io::TrajectorySet set;
  TextTable t{{"traj_id", "start", "points", "group", "b", "crossed"}, {}};
  for (std::size_t i = 0; i < res.segments.size(); ++i) {
    const auto& s = res.segments[i];
    const std::string id = "seg" + std::to_string(i + 1);
    set.ids.push_back(id);
    set.trajectories.push_back(s.to_trajectory(a.opts.dt));
    t.rows.push_back({id, std::to_string(s.start_index), std::to_string(s.values.size()),
                      std::to_string(s.group), fixed(s.b, 4), s.crossed ? "1" : "0"});
  }
  std::cout << t.text();
  if (!a.out.empty()) io::write_file_atomic(a.out, io::format_trajectories_csv(set));
  if (!a.config_out.empty()) {
    std::ostringstream js;
    js << "{\n  \"version\": " << io::kConfigVersion << ",\n  \"model\": \"SR\",\n  \"delta\": "
       << a.opts.dt << ",\n  \"b_by_id\": {";
    for (std::size_t i = 0; i < set.ids.size(); ++i) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", set.trajectories[i].b);
      js << (i ? ", " : "") << '"' << set.ids[i] << "\": " << buf;
    }
    js << "}";
    if (!set.trajectories.empty() && !set.trajectories.back().crossed) js << ",\n  \"last_censored\": true";
    js << "\n}\n";
    io::write_file_atomic(a.config_out, js.str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and maximum likelihood estimation for diffusions killed at a threshold"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate killed trajectories to CSV");
  add_model_flags(c_sim, sim.m);
  c_sim->add_option("-n,--n-traj", sim.n, "Number of trajectories");
  c_sim->add_option("--divisor", sim.divisor, "Sub-steps per sampling step");
  c_sim->add_option("--stepper", sim.stepper, "exact or euler")->check(CLI::IsMember({"exact", "euler"}));
  c_sim->add_option("-o,--out", sim.out, "Output CSV (default stdout)");

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Fit each trajectory and all of them jointly");
  add_model_flags(c_est, est.m);
  c_est->add_option("-d,--data", est.data, "Trajectory CSV")->required();
  c_est->add_option("--objective", est.objectives, "killed, naive or both");
  c_est->add_flag("--no-global", est.no_global, "Skip the pooled fit");
  c_est->add_option("-o,--out", est.out, "Output CSV (default: text to stdout)");

  BootstrapArgs boot;
  auto* c_boot = app.add_subcommand("bootstrap", "Per-trajectory parametric bootstrap bias correction");
  add_model_flags(c_boot, boot.m);
  c_boot->add_option("-d,--data", boot.data, "Trajectory CSV")->required();
  c_boot->add_option("--n-boot", boot.n_boot, "Bootstrap samples per trajectory");
  c_boot->add_option("--divisor", boot.divisor, "Sub-steps per sampling step");
  c_boot->add_option("-o,--out", boot.out, "Output CSV (default: text to stdout)");

  StudyArgs st;
  auto* c_study = app.add_subcommand("study", "Monte Carlo simulation study");
  add_model_flags(c_study, st.m);
  c_study->add_option("--n-total", st.n_total, "Total simulated trajectories");
  c_study->add_option("-m,--group-sizes", st.group_sizes, "Group sizes m")->delimiter(',');
  c_study->add_option("--objective", st.objectives, "killed, naive or both");
  c_study->add_option("--divisor", st.divisor, "Sub-steps per sampling step");
  c_study->add_option("-o,--out", st.out, "Summary CSV (default: text to stdout)");
  c_study->add_option("--raw-out", st.raw_out, "Per-group estimates CSV");
  c_study->add_option("--figures-dir", st.figures_dir, "Directory for density, Q-Q and CI tables");

  FptArgs fpt;
  auto* c_fpt = app.add_subcommand("fpt", "Mean first-passage time and mean step count");
  add_model_flags(c_fpt, fpt.m);
  c_fpt->add_option("--horizon", fpt.horizon, "Truncate the E(N) series after this many steps (0 = until converged)");

  SegmentArgs seg;
  auto* c_seg = app.add_subcommand("segment", "Cut a recording into killed trajectories");
  c_seg->add_option("-i,--input", seg.input, "One sample per line")->required();
  c_seg->add_option("--dt", seg.opts.dt, "Sampling step")->required();
  c_seg->add_option("--offset", seg.opts.offset, "Added to every sample");
  c_seg->add_option("--spike-level", seg.opts.spike_level, "Spike detection level (after offset)")->required();
  c_seg->add_option("--start-level", seg.opts.start_level, "Segment start level (after offset)")->required();
  c_seg->add_option("--threshold", seg.threshold, "'max' or 'manual:B1[,B2,...]'");
  c_seg->add_option("--epsilon", seg.opts.epsilon, "Margin for the max rule");
  c_seg->add_option("--group-size", seg.opts.group_size, "Segments per threshold group (0 = all)");
  c_seg->add_option("-o,--out", seg.out, "Trajectory CSV");
  c_seg->add_option("--config-out", seg.config_out, "Sidecar config with per-segment thresholds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_est) return run_estimate(est);
    if (*c_boot) return run_bootstrap(boot);
    if (*c_study) return run_study(st);
    if (*c_fpt) return run_fpt(fpt);
    if (*c_seg) return run_segment(seg);
  } catch (const kf::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const kf::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const kf::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
