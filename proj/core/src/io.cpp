#include "killedfit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "killedfit/errors.hpp"

namespace killedfit::io {

namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, long line) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("invalid numeric value '" + std::string(s) + "'", line);
  }
  return v;
}

long parse_index(std::string_view s, long line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
    throw ParseError("invalid step index '" + std::string(s) + "'", line);
  }
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

TrajectorySet parse_trajectories_csv(const std::string& text, const IngestOptions& opts) {
  TrajectorySet set;
  std::istringstream in(text);
  std::string raw;
  long line_no = 0;
  bool header_seen = false;

  struct Pending {
    std::string id;
    std::optional<double> x0;
    std::vector<double> obs;
    long next_step = -1;
    long first_line = 0;
  };
  std::optional<Pending> cur;
  std::set<std::string> finished;

  auto threshold_for = [&](const std::string& id) {
    const auto it = opts.b_by_id.find(id);
    return it != opts.b_by_id.end() ? it->second : opts.b;
  };
  auto flush = [&] {
    if (!cur) return;
    KilledTrajectory t;
    t.delta = opts.delta;
    t.b = threshold_for(cur->id);
    if (cur->x0) {
      t.x0 = *cur->x0;
    } else if (opts.x0) {
      t.x0 = *opts.x0;
    } else {
      throw ParseError("trajectory '" + cur->id + "' has no step 0 and no default x0 is configured",
                       cur->first_line);
    }
    t.obs = std::move(cur->obs);
    if (opts.kind) {
      try {
        t.validate(*opts.kind);
      } catch (const DomainError& e) {
        throw DomainError("trajectory '" + cur->id + "': " + e.what());
      }
    }
    set.ids.push_back(cur->id);
    finished.insert(cur->id);
    set.trajectories.push_back(std::move(t));
    cur.reset();
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "traj_id" || fields[1] != "step_index" ||
          fields[2] != "value") {
        throw ParseError("expected header 'traj_id,step_index,value'", line_no);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError("expected 3 fields, found " + std::to_string(fields.size()), line_no);
    }
    const std::string id(fields[0]);
    if (id.empty()) throw ParseError("empty traj_id", line_no);
    const long step = parse_index(fields[1], line_no);
    const double value = parse_double(fields[2], line_no);

    if (!cur || cur->id != id) {
      flush();
      if (finished.count(id)) {
        throw ParseError("rows of trajectory '" + id + "' are not contiguous", line_no);
      }
      if (step > 1) {
        throw ParseError("trajectory '" + id + "' must start at step 0 or 1", line_no);
      }
      cur = Pending{id, std::nullopt, {}, step, line_no};
    }
    if (step != cur->next_step) {
      throw ParseError("trajectory '" + id + "': expected step " + std::to_string(cur->next_step) +
                           ", found " + std::to_string(step),
                       line_no);
    }
    const double b = threshold_for(id);
    if (!(value < b)) {
      throw ParseError("trajectory '" + id + "': value " + fmt17(value) +
                           " is not below the threshold " + fmt17(b),
                       line_no);
    }
    if (opts.kind == ModelKind::SR && !(value > 0.0)) {
      throw ParseError("trajectory '" + id + "': SR values must be positive", line_no);
    }
    if (step == 0) {
      cur->x0 = value;
    } else {
      cur->obs.push_back(value);
    }
    ++cur->next_step;
  }
  flush();
  if (opts.last_censored && !set.trajectories.empty()) set.trajectories.back().crossed = false;
  return set;
}

TrajectorySet read_trajectories_csv(const std::string& path, const IngestOptions& opts) {
  return parse_trajectories_csv(read_file(path), opts);
}

std::string format_trajectories_csv(const TrajectorySet& set) {
  std::string out = "traj_id,step_index,value\n";
  for (std::size_t i = 0; i < set.trajectories.size(); ++i) {
    const std::string id = i < set.ids.size() ? set.ids[i] : std::to_string(i);
    const auto& t = set.trajectories[i];
    out += id + ",0," + fmt17(t.x0) + "\n";
    for (std::size_t j = 0; j < t.obs.size(); ++j) {
      out += id + "," + std::to_string(j + 1) + "," + fmt17(t.obs[j]) + "\n";
    }
  }
  return out;
}

std::string format_trajectories_csv(const std::vector<KilledTrajectory>& trajs) {
  return format_trajectories_csv(TrajectorySet{{}, trajs});
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_table_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += fmt17(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string format_table_text(const Table& table, int precision) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(table.columns);
  for (const auto& row : table.rows) {
    std::vector<std::string> r;
    for (double v : row) {
      std::ostringstream ss;
      ss << std::fixed << std::setprecision(precision) << v;
      r.push_back(ss.str());
    }
    cells.push_back(std::move(r));
  }
  std::vector<std::size_t> width;
  for (const auto& r : cells) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  for (const auto& r : cells) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << r[i];
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

CrossingMethod RunConfig::crossing_method() const {
  return crossing ? *crossing : CrossingMethod::default_for(model);
}

IngestOptions RunConfig::ingest_options() const {
  IngestOptions o;
  o.delta = delta;
  o.b = b;
  o.b_by_id = b_by_id;
  o.x0 = x0;
  o.kind = model;
  o.last_censored = last_censored;
  return o;
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return key == a; });
    if (!ok) throw ParseError("unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(where + "." + key + " must be a number");
  return v.get<double>();
}

template <typename T>
T get_count(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ParseError(where + "." + key + " must be a non-negative integer");
  }
  return static_cast<T>(v.get<unsigned long long>());
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ParseError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

Objective parse_objective(const std::string& s) {
  if (s == "killed") return Objective::Killed;
  if (s == "naive") return Objective::Naive;
  throw ParseError("unknown objective '" + s + "' (expected killed or naive)");
}

Stepper parse_stepper(const std::string& s) {
  if (s == "exact") return Stepper::ExactTransition;
  if (s == "euler") return Stepper::Euler;
  throw ParseError("unknown stepper '" + s + "' (expected exact or euler)");
}

CrossingMethod parse_crossing(const json& j, ModelKind kind) {
  check_keys(j, {"bridge", "g", "psi"}, "crossing");
  CrossingMethod m = CrossingMethod::default_for(kind);
  if (j.contains("bridge")) {
    const auto s = get_string(j, "bridge", "crossing");
    if (s == "exact_wd") {
      m.bridge = BridgeMethod::ExactWD;
    } else if (s == "baldi_caramellino") {
      m.bridge = BridgeMethod::BaldiCaramellino;
    } else {
      throw ParseError("unknown bridge method '" + s + "'");
    }
  }
  if (j.contains("g")) {
    const auto s = get_string(j, "g", "crossing");
    if (s == "exact_wd") {
      m.g = GMethod::ExactWD;
    } else if (s == "psi") {
      m.g = GMethod::PsiApprox;
    } else if (s == "density_integral") {
      m.g = GMethod::DensityIntegral;
    } else {
      throw ParseError("unknown G method '" + s + "'");
    }
  }
  if (j.contains("psi")) {
    const auto s = get_string(j, "psi", "crossing");
    if (s == "printed") {
      m.psi = PsiCoefficient::Printed;
    } else if (s == "squared_diffusion") {
      m.psi = PsiCoefficient::SquaredDiffusion;
    } else {
      throw ParseError("unknown psi coefficient '" + s + "'");
    }
  }
  try {
    m.validate(kind);
  } catch (const DomainError& e) {
    throw ParseError(std::string("crossing: ") + e.what());
  }
  return m;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  try {
    check_keys(j, {"version", "model", "theta", "x0", "b", "delta", "b_by_id", "last_censored",
                   "simulation", "study", "crossing", "optimizer", "seed", "threads", "outputs"},
               "config");
    if (!j.contains("version")) throw ParseError("config: missing 'version'");
    if (!j.at("version").is_number_integer() || j.at("version").get<int>() != kConfigVersion) {
      throw ParseError("config: unsupported version (expected " + std::to_string(kConfigVersion) + ")");
    }
    if (!j.contains("model")) throw ParseError("config: missing 'model'");
    c.model = parse_model_kind(get_string(j, "model", "config"));

    if (j.contains("theta")) {
      const auto& t = j.at("theta");
      if (c.model == ModelKind::WD) {
        check_keys(t, {"mu", "sigma"}, "theta");
      } else {
        check_keys(t, {"mu", "beta", "sigma"}, "theta");
      }
      ModelSpec m{c.model, get_number(t, "mu", "theta"), 0.0, get_number(t, "sigma", "theta")};
      if (c.model != ModelKind::WD) m.beta = get_number(t, "beta", "theta");
      try {
        m.validate();
      } catch (const DomainError& e) {
        throw ParseError(std::string("theta: ") + e.what());
      }
      c.theta = m;
    }
    if (j.contains("x0")) c.x0 = get_number(j, "x0", "config");
    if (j.contains("b")) c.b = get_number(j, "b", "config");
    if (j.contains("delta")) c.delta = get_number(j, "delta", "config");
    if (j.contains("b_by_id")) {
      const auto& m = j.at("b_by_id");
      if (!m.is_object()) throw ParseError("b_by_id must be an object");
      for (const auto& [id, v] : m.items()) {
        if (!v.is_number()) throw ParseError("b_by_id." + id + " must be a number");
        c.b_by_id[id] = v.get<double>();
      }
    }
    if (j.contains("last_censored")) {
      if (!j.at("last_censored").is_boolean()) throw ParseError("last_censored must be a boolean");
      c.last_censored = j.at("last_censored").get<bool>();
    }
    if (j.contains("simulation")) {
      const auto& s = j.at("simulation");
      check_keys(s, {"n_traj", "substep_divisor", "stepper"}, "simulation");
      if (s.contains("n_traj")) c.n_traj = get_count<std::size_t>(s, "n_traj", "simulation");
      if (s.contains("substep_divisor")) {
        c.substep_divisor = get_count<int>(s, "substep_divisor", "simulation");
        if (c.substep_divisor < 1) throw ParseError("simulation.substep_divisor must be >= 1");
      }
      if (s.contains("stepper")) c.stepper = parse_stepper(get_string(s, "stepper", "simulation"));
    }
    if (j.contains("study")) {
      const auto& s = j.at("study");
      check_keys(s, {"n_total", "group_sizes", "objectives", "n_boot", "n_outer"}, "study");
      if (s.contains("n_total")) c.n_total = get_count<std::size_t>(s, "n_total", "study");
      if (s.contains("n_boot")) c.n_boot = get_count<std::size_t>(s, "n_boot", "study");
      if (s.contains("n_outer")) c.n_outer = get_count<std::size_t>(s, "n_outer", "study");
      if (s.contains("group_sizes")) {
        const auto& g = s.at("group_sizes");
        if (!g.is_array() || g.empty()) throw ParseError("study.group_sizes must be a non-empty array");
        c.group_sizes.clear();
        for (const auto& v : g) {
          if (!v.is_number_integer() || v.get<long long>() < 1) {
            throw ParseError("study.group_sizes entries must be positive integers");
          }
          c.group_sizes.push_back(v.get<std::size_t>());
        }
      }
      if (s.contains("objectives")) {
        const auto& o = s.at("objectives");
        if (!o.is_array() || o.empty()) throw ParseError("study.objectives must be a non-empty array");
        c.objectives.clear();
        for (const auto& v : o) {
          if (!v.is_string()) throw ParseError("study.objectives entries must be strings");
          c.objectives.push_back(parse_objective(v.get<std::string>()));
        }
      }
    }
    if (j.contains("crossing")) c.crossing = parse_crossing(j.at("crossing"), c.model);
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      check_keys(o, {"max_evals", "rel_tol", "restart", "initial_rel_step", "initial_abs_step"},
                 "optimizer");
      if (o.contains("max_evals")) c.fit.nelder_mead.max_evals = get_count<int>(o, "max_evals", "optimizer");
      if (o.contains("rel_tol")) c.fit.nelder_mead.rel_tol = get_number(o, "rel_tol", "optimizer");
      if (o.contains("restart")) {
        if (!o.at("restart").is_boolean()) throw ParseError("optimizer.restart must be a boolean");
        c.fit.restart_on_max_evals = o.at("restart").get<bool>();
      }
      if (o.contains("initial_rel_step")) {
        c.fit.initial_rel_step = get_number(o, "initial_rel_step", "optimizer");
      }
      if (o.contains("initial_abs_step")) {
        c.fit.initial_abs_step = get_number(o, "initial_abs_step", "optimizer");
      }
    }
    if (j.contains("seed")) c.seed = get_count<std::uint64_t>(j, "seed", "config");
    if (j.contains("threads")) c.threads = get_count<int>(j, "threads", "config");
    if (j.contains("outputs")) {
      const auto& o = j.at("outputs");
      check_keys(o, {"trajectories", "estimates", "summary", "raw", "figures"}, "outputs");
      for (const auto& [k, v] : o.items()) {
        if (!v.is_string()) throw ParseError("outputs." + k + " must be a string");
        c.outputs[k] = v.get<std::string>();
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!(c.delta > 0.0)) throw ParseError("config: delta must be positive");
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

// ---------------------------------------------------------------------------
// Segmentation
// ---------------------------------------------------------------------------

KilledTrajectory RecordingSegment::to_trajectory(double dt) const {
  KilledTrajectory t;
  t.delta = dt;
  t.b = b;
  t.crossed = crossed;
  if (!values.empty()) {
    t.x0 = values.front();
    t.obs.assign(values.begin() + 1, values.end());
  }
  return t;
}

SegmentationResult segment_recording(const std::vector<double>& samples,
                                     const SegmentOptions& opts) {
  if (!(opts.dt > 0.0)) throw DomainError("segment_recording: dt must be positive");
  if (opts.rule == ThresholdRule::Manual && opts.manual_b.empty()) {
    throw DomainError("segment_recording: manual threshold rule needs at least one value");
  }
  SegmentationResult res;
  std::vector<double> y(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) y[i] = samples[i] + opts.offset;

  // Spike runs [first, last] of samples above the spike level.
  std::vector<std::pair<std::size_t, std::size_t>> spikes;
  for (std::size_t i = 0; i < y.size();) {
    if (y[i] > opts.spike_level) {
      std::size_t k = i;
      while (k + 1 < y.size() && y[k + 1] > opts.spike_level) ++k;
      spikes.emplace_back(i, k);
      i = k + 1;
    } else {
      ++i;
    }
  }

  // Candidate segments: [start, end) and whether a spike closes them.
  struct Raw {
    std::size_t start, end;
    bool crossed;
  };
  std::vector<Raw> raw;
  if (spikes.empty()) {
    res.warnings.push_back("no spike found; the whole recording is one censored segment");
    if (!y.empty()) raw.push_back({0, y.size(), false});
  } else {
    for (std::size_t s = 0; s < spikes.size(); ++s) {
      const std::size_t from = spikes[s].second + 1;
      const std::size_t to = s + 1 < spikes.size() ? spikes[s + 1].first : y.size();
      std::size_t start = from;
      while (start < to && !(y[start] > opts.start_level)) ++start;
      if (start >= to) {
        if (s + 1 < spikes.size()) {
          res.warnings.push_back("no sample above the start level between spikes " +
                                 std::to_string(s + 1) + " and " + std::to_string(s + 2));
        }
        continue;
      }
      raw.push_back({start, to, s + 1 < spikes.size()});
    }
  }

  const std::size_t per_group = opts.group_size == 0 ? std::max<std::size_t>(raw.size(), 1)
                                                     : opts.group_size;
  const std::size_t n_groups = (raw.size() + per_group - 1) / per_group;
  if (opts.rule == ThresholdRule::Manual && opts.manual_b.size() != 1 &&
      opts.manual_b.size() != n_groups) {
    throw DomainError("segment_recording: " + std::to_string(opts.manual_b.size()) +
                      " manual thresholds for " + std::to_string(n_groups) + " groups");
  }

  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::size_t lo = g * per_group;
    const std::size_t hi = std::min(raw.size(), lo + per_group);
    double b;
    if (opts.rule == ThresholdRule::Manual) {
      b = opts.manual_b.size() == 1 ? opts.manual_b.front() : opts.manual_b[g];
    } else {
      double mx = -numerics::kInf;
      for (std::size_t s = lo; s < hi; ++s)
        for (std::size_t i = raw[s].start; i < raw[s].end; ++i) mx = std::max(mx, y[i]);
      b = mx + opts.epsilon;
    }
    for (std::size_t s = lo; s < hi; ++s) {
      RecordingSegment seg;
      seg.start_index = raw[s].start;
      seg.group = g;
      seg.b = b;
      seg.crossed = raw[s].crossed;
      std::size_t end = raw[s].start;
      while (end < raw[s].end && y[end] < b) ++end;
      if (end < raw[s].end) seg.crossed = true;  // reached b before the spike run
      seg.end_index = end;
      seg.values.assign(y.begin() + static_cast<std::ptrdiff_t>(raw[s].start),
                        y.begin() + static_cast<std::ptrdiff_t>(end));
      if (seg.values.empty()) {
        res.warnings.push_back("segment starting at sample " + std::to_string(raw[s].start) +
                               " is not below its threshold and was dropped");
        continue;
      }
      res.segments.push_back(std::move(seg));
    }
  }
  return res;
}

}  // namespace killedfit::io
