#include "pushmpc/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pushmpc {
namespace {

constexpr char kCsvHeader[] =
    "t,x_r,y_r,th_r,v_r,w_r,x_o,y_o,th_o,e_x,e_y,e_th,e_v,e_w,"
    "a_r,eps_r,f1R,f1L,f2R,f2L,mode,lat_off,qp_status,qp_iters,solve_ms";

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* what) {
  throw std::runtime_error("config key '" + key + "': expected " + what +
                           ", got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (trim(value.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  bad_value(key, value, "a number");
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    int v = std::stoi(value, &pos);
    if (trim(value.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  bad_value(key, value, "an integer");
}

unsigned long parse_ulong(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    unsigned long v = std::stoul(value, &pos);
    if (trim(value.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  bad_value(key, value, "a nonnegative integer");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  bad_value(key, value, "on/off");
}

template <typename Vec>
Vec parse_vec(const std::string& key, const std::string& value) {
  Vec out;
  std::stringstream ss(value);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= out.size()) bad_value(key, value, "fewer entries");
    out[i++] = parse_double(key, trim(item));
  }
  if (i != out.size())
    throw std::runtime_error("config key '" + key + "': expected " +
                             std::to_string(out.size()) + " comma separated " +
                             "values, got " + std::to_string(i));
  return out;
}

// Keys of the form push<K>_side/radius/sweep/line address push K (1 based),
// growing the plan as needed. Returns false if the key is not of that form.
bool apply_push_entry(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value) {
  if (key.rfind("push", 0) != 0 || key.size() < 6 ||
      !std::isdigit(static_cast<unsigned char>(key[4])))
    return false;
  size_t i = 4;
  while (i < key.size() && std::isdigit(static_cast<unsigned char>(key[i])))
    ++i;
  int idx = std::stoi(key.substr(4, i - 4));
  if (idx < 1 || idx > 64)
    throw std::runtime_error("config key '" + key +
                             "': push index out of range 1..64");
  std::string field = key.substr(i);
  if (static_cast<int>(cfg.pushes.size()) < idx) cfg.pushes.resize(idx);
  PushSpec& p = cfg.pushes[idx - 1];
  if (field == "_side") {
    p.side = parse_int(key, value);
    if (p.side < 0 || p.side > 3) bad_value(key, value, "a side index 0..3");
  } else if (field == "_radius") {
    p.radius = parse_double(key, value);
  } else if (field == "_sweep") {
    p.sweep = parse_double(key, value);
  } else if (field == "_line") {
    p.line = parse_double(key, value);
  } else {
    throw std::runtime_error("unknown config key '" + key + "'");
  }
  return true;
}

std::string qp_status_name(QpStatus s) {
  switch (s) {
    case QpStatus::optimal:
      return "optimal";
    case QpStatus::max_iters:
      return "max_iters";
    case QpStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

PlantParams make_plant(const ExperimentConfig& cfg) {
  PlantParams p;
  p.friction = cfg.friction;
  p.geometry = cfg.geometry;
  p.bumper_offset = cfg.bumper_offset;
  p.bumper_half_width = cfg.bumper_half_width;
  p.gap_tol = cfg.gap_tol;
  p.align_tol = cfg.align_tol;
  p.stick_tol = cfg.stick_tol;
  p.substeps = cfg.substeps;
  return p;
}

ControllerConfig make_controller_config(const ExperimentConfig& cfg) {
  ControllerConfig c;
  c.weights = cfg.weights;
  c.limits = cfg.limits;
  c.horizon = cfg.horizon;
  c.ts = cfg.ts;
  c.friction = cfg.friction;
  c.geometry = cfg.geometry;
  c.constraint_tol = cfg.constraint_tol;
  c.pushing_constraint = cfg.constraint_enabled;
  c.qp = cfg.qp;
  return c;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.ts < 1e-4) throw std::runtime_error("config: ts must be >= 1e-4");
  if (cfg.horizon < 1) throw std::runtime_error("config: horizon must be >= 1");
  if (cfg.substeps < 1)
    throw std::runtime_error("config: substeps must be >= 1");
  if (cfg.settle_time < 0.0)
    throw std::runtime_error("config: settle_time must be >= 0");
}

// Metric accumulation across heterogeneous phases. Break transitions are
// only counted between consecutive closed-loop rows; maneuvers detach on
// purpose.
struct MetricsBuilder {
  double min_force = std::numeric_limits<double>::infinity();
  double max_stick_res = 0.0;
  double min_power = std::numeric_limits<double>::infinity();
  double max_lat = 0.0;
  int breaks = 0;
  int slips = 0;
  int fallbacks = 0;
  int steps = 0;
  double solve_sum = 0.0;
  double solve_max = 0.0;
  double step_ms_sum = 0.0;
  std::vector<double> obj_err;
  ContactMode prev_mode = ContactMode::broken;
  bool have_prev = false;

  void physics(const ContactStatus& st) {
    min_force = std::min(min_force, st.forces.minCoeff());
    if (st.mode == ContactMode::stick)
      max_stick_res = std::max(max_stick_res, st.residual);
    min_power = std::min(min_power, st.wrench.dot(st.object_twist));
    if (st.mode != ContactMode::broken)
      max_lat = std::max(max_lat, std::abs(st.lateral_offset));
  }

  void closed_loop_row(const ContactStatus& st, const ControlDecision& dec,
                       double solve_ms, double step_ms, double obj_track_err) {
    physics(st);
    if (have_prev && prev_mode != ContactMode::broken &&
        st.mode == ContactMode::broken)
      ++breaks;
    prev_mode = st.mode;
    have_prev = true;
    if (st.mode == ContactMode::slip) ++slips;
    if (dec.fallback) ++fallbacks;
    ++steps;
    solve_sum += solve_ms;
    solve_max = std::max(solve_max, solve_ms);
    step_ms_sum += step_ms;
    obj_err.push_back(obj_track_err);
  }

  void maneuver_row(const ContactStatus& st) {
    physics(st);
    have_prev = false;
  }

  void finalize(RunMetrics& m) const {
    m.steps = steps;
    m.contact_break_count = breaks;
    m.slip_step_count = slips;
    m.fallback_count = fallbacks;
    m.max_lateral_offset = max_lat;
    m.min_force_component = std::isfinite(min_force) ? min_force : 0.0;
    m.max_stick_residual = max_stick_res;
    m.min_contact_power = std::isfinite(min_power) ? min_power : 0.0;
    if (steps > 0) {
      m.mean_solve_ms = solve_sum / steps;
      m.max_solve_ms = solve_max;
      m.mean_control_step_ms = step_ms_sum / steps;
    }
    if (!obj_err.empty()) {
      size_t tail = std::max<size_t>(1, obj_err.size() / 5);
      double sum = 0.0;
      for (size_t i = obj_err.size() - tail; i < obj_err.size(); ++i)
        sum += obj_err[i];
      m.final_avg_object_position_error = sum / static_cast<double>(tail);
    }
  }
};

// Tracks `path` closed loop until its end plus settle_time, starting at
// world.time == t_start. Appends one row per control step.
void run_closed_loop(const ExperimentConfig& cfg, const PlantParams& plant,
                     MpcController& ctl, const ReferencePath& path,
                     double t_start, WorldState& world, RunResult& res,
                     MetricsBuilder& mb) {
  const double d = plant.bumper_offset + plant.geometry.half_side;
  const double dur = path_duration(path) + cfg.settle_time;
  const int n = static_cast<int>(std::ceil(dur / cfg.ts - 1e-9));
  std::vector<ReferenceSample> refs(cfg.horizon + 1);
  for (int k = 0; k < n; ++k) {
    const auto t0 = Clock::now();
    const double tl = world.time - t_start;
    for (int i = 0; i <= cfg.horizon; ++i)
      refs[i] = sample_path(path, tl + i * cfg.ts);
    const RobotState measured = world.robot;
    const ObjectPose obj_pre = world.object;
    const double t_row = world.time;
    const Vec2 p_or = object_in_robot_frame(world);

    const auto ts0 = Clock::now();
    const ControlDecision dec = ctl.step(measured, p_or, refs);
    const double solve_ms = ms_since(ts0);

    const ContactStatus st = step_world(plant, world, dec.vel_cmd, cfg.ts);
    const double step_ms = ms_since(t0);

    const double ox = refs[0].x + d * std::cos(refs[0].theta);
    const double oy = refs[0].y + d * std::sin(refs[0].theta);
    const double obj_track_err = std::hypot(obj_pre.x - ox, obj_pre.y - oy);
    mb.closed_loop_row(st, dec, solve_ms, step_ms, obj_track_err);

    LogRow row;
    row.t = t_row;
    row.robot = measured;
    row.object = obj_pre;
    row.e = error_from_state(measured, refs[0]);
    row.u = dec.u;
    row.forces = st.forces;
    row.mode = st.mode;
    row.lateral_offset = st.lateral_offset;
    row.qp_status = qp_status_name(dec.status);
    row.qp_iters = dec.qp_iterations;
    row.solve_ms = solve_ms;
    res.log.push_back(std::move(row));
  }
}

// Replays `path` open loop with the interval-average twist of each chunk,
// chunking at segment boundaries so every interval stays inside one segment.
void run_maneuver(const ExperimentConfig& cfg, const PlantParams& plant,
                  const ReferencePath& path, WorldState& world, RunResult& res,
                  MetricsBuilder& mb) {
  const double dur = path_duration(path);
  const std::vector<double> bounds = segment_boundaries(path);
  double tl = 0.0;
  while (tl < dur - 1e-9) {
    double tn = std::min(tl + cfg.ts, dur);
    for (double b : bounds) {
      if (b > tl + 1e-9) {
        tn = std::min(tn, b);
        break;
      }
    }
    const Vec2 cmd = interval_twist(path, tl, tn);
    const RobotState rob_pre = world.robot;
    const ObjectPose obj_pre = world.object;
    const double t_row = world.time;
    const ContactStatus st = step_world(plant, world, cmd, tn - tl);
    mb.maneuver_row(st);

    LogRow row;
    row.t = t_row;
    row.robot = rob_pre;
    row.object = obj_pre;
    row.e = error_from_state(rob_pre, sample_path(path, tl));
    row.forces = st.forces;
    row.mode = st.mode;
    row.lateral_offset = st.lateral_offset;
    row.qp_status = "skipped";
    res.log.push_back(std::move(row));
    tl = tn;
  }
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "scenario") {
    if (value != "line_track" && value != "manipulate")
      bad_value(key, value, "line_track or manipulate");
    cfg.scenario = value;
  } else if (key == "ts") {
    cfg.ts = parse_double(key, value);
  } else if (key == "horizon") {
    cfg.horizon = parse_int(key, value);
  } else if (key == "q_error") {
    cfg.weights.q_error = parse_vec<Vec5>(key, value);
  } else if (key == "p_terminal") {
    cfg.weights.p_terminal = parse_vec<Vec5>(key, value);
  } else if (key == "r_input") {
    cfg.weights.r_input = parse_vec<Vec6>(key, value);
  } else if (key == "r_rate") {
    cfg.weights.r_rate = parse_vec<Vec6>(key, value);
  } else if (key == "accel_max") {
    cfg.limits.accel_max = parse_double(key, value);
  } else if (key == "alpha_max") {
    cfg.limits.alpha_max = parse_double(key, value);
  } else if (key == "force_max") {
    cfg.limits.force_max = parse_double(key, value);
  } else if (key == "rate_factor") {
    cfg.limits.rate_factor = parse_double(key, value);
  } else if (key == "qp_tol") {
    cfg.qp.tol = parse_double(key, value);
  } else if (key == "qp_max_iters") {
    cfg.qp.max_iters = parse_int(key, value);
  } else if (key == "constraint_enabled") {
    cfg.constraint_enabled = parse_bool(key, value);
  } else if (key == "constraint_tol") {
    cfg.constraint_tol = parse_double(key, value);
  } else if (key == "mu_contact") {
    cfg.friction.mu_contact = parse_double(key, value);
  } else if (key == "mu_support") {
    cfg.friction.mu_support = parse_double(key, value);
  } else if (key == "object_mass") {
    cfg.friction.object_mass = parse_double(key, value);
  } else if (key == "gravity") {
    cfg.friction.gravity = parse_double(key, value);
  } else if (key == "half_side") {
    cfg.geometry.half_side = parse_double(key, value);
  } else if (key == "bumper_offset") {
    cfg.bumper_offset = parse_double(key, value);
  } else if (key == "bumper_half_width") {
    cfg.bumper_half_width = parse_double(key, value);
  } else if (key == "gap_tol") {
    cfg.gap_tol = parse_double(key, value);
  } else if (key == "align_tol") {
    cfg.align_tol = parse_double(key, value);
  } else if (key == "stick_tol") {
    cfg.stick_tol = parse_double(key, value);
  } else if (key == "substeps") {
    cfg.substeps = parse_int(key, value);
  } else if (key == "phi") {
    cfg.phi = parse_double(key, value);
  } else if (key == "line_length") {
    cfg.line_length = parse_double(key, value);
  } else if (key == "line_v_max") {
    cfg.line_v_max = parse_double(key, value);
  } else if (key == "line_a_max") {
    cfg.line_a_max = parse_double(key, value);
  } else if (key == "goal_x") {
    cfg.goal_x = parse_double(key, value);
  } else if (key == "goal_y") {
    cfg.goal_y = parse_double(key, value);
  } else if (key == "goal_theta") {
    cfg.goal_theta = parse_double(key, value);
  } else if (key == "goal_pos_tol") {
    cfg.goal_pos_tol = parse_double(key, value);
  } else if (key == "goal_angle_tol_deg") {
    cfg.goal_angle_tol_deg = parse_double(key, value);
  } else if (key == "push_v_max") {
    cfg.push_v_max = parse_double(key, value);
  } else if (key == "push_a_max") {
    cfg.push_a_max = parse_double(key, value);
  } else if (key == "push_count") {
    int n = parse_int(key, value);
    if (n < 0 || n > 64) bad_value(key, value, "a count in 0..64");
    cfg.pushes.resize(n);
  } else if (key == "clearance_margin") {
    cfg.maneuver.clearance_margin = parse_double(key, value);
  } else if (key == "retreat_min") {
    cfg.maneuver.retreat_min = parse_double(key, value);
  } else if (key == "maneuver_v_max") {
    cfg.maneuver.travel_v_max = parse_double(key, value);
  } else if (key == "maneuver_a_max") {
    cfg.maneuver.travel_a_max = parse_double(key, value);
  } else if (key == "spin_w_max") {
    cfg.maneuver.spin_w_max = parse_double(key, value);
  } else if (key == "spin_a_max") {
    cfg.maneuver.spin_a_max = parse_double(key, value);
  } else if (key == "approach_speed") {
    cfg.maneuver.approach_speed = parse_double(key, value);
  } else if (key == "approach_a_max") {
    cfg.maneuver.approach_a_max = parse_double(key, value);
  } else if (key == "settle_time") {
    cfg.settle_time = parse_double(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_ulong(key, value);
  } else if (!apply_push_entry(cfg, key, value)) {
    throw std::runtime_error("unknown config key '" + key + "'");
  }
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (size_t hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               " has no '=': '" + line + "'");
    apply_config_entry(cfg, trim(line.substr(0, eq)),
                       trim(line.substr(eq + 1)));
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  apply_config_text(cfg, text);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_text(const ExperimentConfig& cfg) {
  std::string out;
  char buf[256];
  auto put = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };
  auto num = [&](const char* key, double v) { put("%s = %.17g\n", key, v); };
  auto vec = [&](const char* key, const auto& v) {
    out += key;
    out += " =";
    for (int i = 0; i < v.size(); ++i) put(i ? ", %.17g" : " %.17g", v[i]);
    out += '\n';
  };
  out += "scenario = " + cfg.scenario + '\n';
  num("ts", cfg.ts);
  put("horizon = %d\n", cfg.horizon);
  vec("q_error", cfg.weights.q_error);
  vec("p_terminal", cfg.weights.p_terminal);
  vec("r_input", cfg.weights.r_input);
  vec("r_rate", cfg.weights.r_rate);
  num("accel_max", cfg.limits.accel_max);
  num("alpha_max", cfg.limits.alpha_max);
  num("force_max", cfg.limits.force_max);
  num("rate_factor", cfg.limits.rate_factor);
  num("qp_tol", cfg.qp.tol);
  put("qp_max_iters = %d\n", cfg.qp.max_iters);
  put("constraint_enabled = %s\n", cfg.constraint_enabled ? "on" : "off");
  num("constraint_tol", cfg.constraint_tol);
  num("mu_contact", cfg.friction.mu_contact);
  num("mu_support", cfg.friction.mu_support);
  num("object_mass", cfg.friction.object_mass);
  num("gravity", cfg.friction.gravity);
  num("half_side", cfg.geometry.half_side);
  num("bumper_offset", cfg.bumper_offset);
  num("bumper_half_width", cfg.bumper_half_width);
  num("gap_tol", cfg.gap_tol);
  num("align_tol", cfg.align_tol);
  num("stick_tol", cfg.stick_tol);
  put("substeps = %d\n", cfg.substeps);
  num("phi", cfg.phi);
  num("line_length", cfg.line_length);
  num("line_v_max", cfg.line_v_max);
  num("line_a_max", cfg.line_a_max);
  num("goal_x", cfg.goal_x);
  num("goal_y", cfg.goal_y);
  num("goal_theta", cfg.goal_theta);
  num("goal_pos_tol", cfg.goal_pos_tol);
  num("goal_angle_tol_deg", cfg.goal_angle_tol_deg);
  num("push_v_max", cfg.push_v_max);
  num("push_a_max", cfg.push_a_max);
  put("push_count = %d\n", static_cast<int>(cfg.pushes.size()));
  for (size_t k = 0; k < cfg.pushes.size(); ++k) {
    const PushSpec& p = cfg.pushes[k];
    put("push%zu_side = %d\n", k + 1, p.side);
    put("push%zu_radius = %.17g\n", k + 1, p.radius);
    put("push%zu_sweep = %.17g\n", k + 1, p.sweep);
    put("push%zu_line = %.17g\n", k + 1, p.line);
  }
  num("clearance_margin", cfg.maneuver.clearance_margin);
  num("retreat_min", cfg.maneuver.retreat_min);
  num("maneuver_v_max", cfg.maneuver.travel_v_max);
  num("maneuver_a_max", cfg.maneuver.travel_a_max);
  num("spin_w_max", cfg.maneuver.spin_w_max);
  num("spin_a_max", cfg.maneuver.spin_a_max);
  num("approach_speed", cfg.maneuver.approach_speed);
  num("approach_a_max", cfg.maneuver.approach_a_max);
  num("settle_time", cfg.settle_time);
  put("seed = %lu\n", cfg.seed);
  return out;
}

std::string csv_string(const std::vector<LogRow>& log) {
  std::string out(kCsvHeader);
  out += '\n';
  char buf[64];
  auto num = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
    out += buf;
  };
  for (const LogRow& r : log) {
    num(r.t, ',');
    num(r.robot.x, ',');
    num(r.robot.y, ',');
    num(r.robot.theta, ',');
    num(r.robot.v, ',');
    num(r.robot.w, ',');
    num(r.object.x, ',');
    num(r.object.y, ',');
    num(r.object.theta, ',');
    for (int i = 0; i < 5; ++i) num(r.e[i], ',');
    num(r.u[0], ',');
    num(r.u[1], ',');
    for (int i = 0; i < 4; ++i) num(r.forces[i], ',');
    out += contact_mode_name(r.mode);
    out += ',';
    num(r.lateral_offset, ',');
    out += r.qp_status;
    out += ',';
    std::snprintf(buf, sizeof buf, "%d,", r.qp_iters);
    out += buf;
    num(r.solve_ms, '\n');
  }
  return out;
}

void write_csv(const std::string& path, const std::vector<LogRow>& log) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << csv_string(log);
}

void write_metrics(const std::string& path, const RunMetrics& m,
                   const ExperimentConfig& cfg) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  char buf[64];
  auto num = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    out << name << ' ' << buf << '\n';
  };
  out << "scenario " << cfg.scenario << '\n';
  out << "seed " << cfg.seed << '\n';
  out << "task_success " << (m.task_success ? 1 : 0) << '\n';
  out << "steps " << m.steps << '\n';
  num("sim_duration", m.sim_duration);
  num("wall_time_s", m.wall_time_s);
  num("final_avg_object_position_error", m.final_avg_object_position_error);
  num("final_position_error", m.final_position_error);
  num("final_orientation_error_deg", m.final_orientation_error_deg);
  num("max_lateral_offset", m.max_lateral_offset);
  out << "contact_break_count " << m.contact_break_count << '\n';
  out << "slip_step_count " << m.slip_step_count << '\n';
  out << "fallback_count " << m.fallback_count << '\n';
  num("mean_solve_ms", m.mean_solve_ms);
  num("max_solve_ms", m.max_solve_ms);
  num("mean_control_step_ms", m.mean_control_step_ms);
  num("min_force_component", m.min_force_component);
  num("max_stick_residual", m.max_stick_residual);
  num("min_contact_power", m.min_contact_power);
  out << "failure_reason "
      << (m.failure_reason.empty() ? "-" : m.failure_reason) << '\n';
}

RunResult run_line_tracking(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto wall0 = Clock::now();
  const PlantParams plant = make_plant(cfg);
  MpcController ctl(make_controller_config(cfg));
  const ReferencePath path = line_path(0.0, 0.0, 0.0, cfg.line_length,
                                       cfg.line_v_max, cfg.line_a_max);
  RobotState r0;
  r0.y = cfg.phi;
  WorldState world = attach_world(plant, r0);

  RunResult res;
  MetricsBuilder mb;
  run_closed_loop(cfg, plant, ctl, path, 0.0, world, res, mb);

  RunMetrics& m = res.metrics;
  const double d = plant.bumper_offset + plant.geometry.half_side;
  double ex, ey, eth;
  path_end_pose(path, ex, ey, eth);
  const double ox = ex + d * std::cos(eth);
  const double oy = ey + d * std::sin(eth);
  m.final_position_error = std::hypot(world.object.x - ox, world.object.y - oy);
  m.final_orientation_error_deg =
      std::abs(wrap_angle(world.object.theta - eth)) * 180.0 / std::numbers::pi;
  m.task_success = true;
  m.sim_duration = world.time;
  mb.finalize(m);
  m.wall_time_s = ms_since(wall0) / 1e3;
  return res;
}

RunResult run_manipulation(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto wall0 = Clock::now();
  const PlantParams plant = make_plant(cfg);
  MpcController ctl(make_controller_config(cfg));
  ManeuverParams mp = cfg.maneuver;
  mp.contact_distance = plant.bumper_offset + plant.geometry.half_side;
  mp.circumradius = plant.geometry.half_side * std::numbers::sqrt2;
  const double d = mp.contact_distance;

  RunResult res;
  RunMetrics& m = res.metrics;
  MetricsBuilder mb;

  auto finish = [&](const WorldState& world) {
    m.final_position_error =
        std::hypot(world.object.x - cfg.goal_x, world.object.y - cfg.goal_y);
    m.final_orientation_error_deg =
        std::abs(wrap_angle(world.object.theta - cfg.goal_theta)) * 180.0 /
        std::numbers::pi;
    m.sim_duration = world.time;
    if (m.failure_reason.empty()) {
      const bool hit = m.final_position_error <= cfg.goal_pos_tol &&
                       m.final_orientation_error_deg <= cfg.goal_angle_tol_deg;
      m.task_success = hit;
      if (!hit) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "final pose misses goal: position error %.4f m, "
                      "orientation error %.2f deg",
                      m.final_position_error, m.final_orientation_error_deg);
        m.failure_reason = buf;
      }
    }
    mb.finalize(m);
    m.wall_time_s = ms_since(wall0) / 1e3;
  };

  // The object starts at the origin. A goal that is already met needs no
  // pushes at all.
  ObjectPose expected;
  WorldState world;
  world.object = expected;
  if (std::hypot(cfg.goal_x, cfg.goal_y) <= 1e-9 &&
      std::abs(wrap_angle(cfg.goal_theta)) <= 1e-9) {
    finish(world);
    return res;
  }
  if (cfg.pushes.empty()) {
    m.failure_reason = "no pushes configured";
    m.task_success = false;
    finish(world);
    return res;
  }

  auto side_normal = [](const ObjectPose& o, int side) {
    return o.theta + side * std::numbers::pi / 2.0;
  };

  // Start attached and centered on the first push's face.
  {
    const double n0 = side_normal(expected, cfg.pushes.front().side);
    world.robot.x = expected.x + d * std::cos(n0);
    world.robot.y = expected.y + d * std::sin(n0);
    world.robot.theta =
        side_push_heading(expected.theta, cfg.pushes.front().side);
  }

  for (size_t i = 0; i < cfg.pushes.size(); ++i) {
    const PushSpec& push = cfg.pushes[i];
    if (i > 0) {
      const ReferencePath man = repositioning_maneuver(
          world.robot, world.object.x, world.object.y, world.object.theta,
          push.side, mp);
      run_maneuver(cfg, plant, man, world, res, mb);
      const ContactStatus st = resolve_contact(plant, world, Vec2::Zero());
      const double want_psi = side_push_heading(world.object.theta, push.side);
      const double heading_err =
          std::abs(wrap_angle(world.robot.theta - want_psi));
      if (st.mode == ContactMode::broken ||
          std::abs(st.lateral_offset) > 1e-3 || heading_err > plant.align_tol) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "re-contact failed before push %zu: gap %.3g m, lateral "
                      "offset %.3g m, heading error %.3g rad",
                      i + 1, st.gap, st.lateral_offset, heading_err);
        m.failure_reason = buf;
        m.task_success = false;
        finish(world);
        return res;
      }
    }

    // The push reference is planned from the expected object pose, so closed
    // loop tracking steers the real object back onto the plan.
    ReferencePath path;
    const double n = side_normal(expected, push.side);
    const double psi = side_push_heading(expected.theta, push.side);
    path.x0 = expected.x + d * std::cos(n);
    path.y0 = expected.y + d * std::sin(n);
    path.theta0 = psi;
    if (push.radius > 0.0 && std::abs(push.sweep) > 1e-12) {
      PathSegment arc;
      arc.kind = PathSegment::Kind::arc;
      arc.length = std::abs(push.sweep) * push.radius;
      arc.curvature = (push.sweep > 0.0 ? 1.0 : -1.0) / push.radius;
      arc.v_max = cfg.push_v_max;
      arc.a_max = cfg.push_a_max;
      path.segments.push_back(arc);
    }
    if (push.line > 0.0) {
      PathSegment line;
      line.length = push.line;
      line.v_max = cfg.push_v_max;
      line.a_max = cfg.push_a_max;
      path.segments.push_back(line);
    }

    ctl.reset();
    run_closed_loop(cfg, plant, ctl, path, world.time, world, res, mb);

    // Rigid carry keeps the object one contact distance ahead of the robot,
    // so the planned end pose advances the expected object pose exactly.
    double rx, ry, rth;
    path_end_pose(path, rx, ry, rth);
    expected.x = rx + d * std::cos(rth);
    expected.y = ry + d * std::sin(rth);
    expected.theta += rth - psi;
  }

  finish(world);
  return res;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.scenario == "line_track") return run_line_tracking(cfg);
  if (cfg.scenario == "manipulate") return run_manipulation(cfg);
  throw std::runtime_error("unknown scenario '" + cfg.scenario + "'");
}

}  // namespace pushmpc
