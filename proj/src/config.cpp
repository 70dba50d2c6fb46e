#include "vservo/config.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "vservo/siso.hpp"

namespace vservo {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::Parse, what); }

double num(const Json& j, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) bad(std::string(key) + " must be a number");
  return j[key].get<double>();
}

Vec3 vec3(const Json& j) {
  if (!j.is_array() || j.size() != 3) bad("expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec6 vec6(const Json& j) {
  if (!j.is_array() || j.size() != 6) bad("expected a 6-vector");
  Vec6 v;
  for (int i = 0; i < 6; ++i) {
    if (!j[i].is_number()) bad("non-numeric joint value");
    v[i] = j[i].get<double>();
  }
  return v;
}

Mat3 mat3_rows(const Json& j) {
  if (!j.is_array() || j.size() != 3) bad("expected 3 rows");
  Mat3 R;
  for (int r = 0; r < 3; ++r) R.row(r) = vec3(j[r]).transpose();
  return R;
}

RobotGeometry geometry_from(const Json& j, RobotGeometry g) {
  g.a1 = num(j, "a1", g.a1);
  g.L1 = num(j, "L1", g.L1);
  g.L2 = num(j, "L2", g.L2);
  g.L3 = num(j, "L3", g.L3);
  g.L4 = num(j, "L4", g.L4);
  g.Lt = num(j, "Lt", g.Lt);
  if (j.contains("limits")) {
    const Json& l = j["limits"];
    if (!l.is_array() || l.size() != 6) bad("limits needs six [lo, hi] pairs");
    for (int i = 0; i < 6; ++i) g.limits[i] = {l[i][0].get<double>(), l[i][1].get<double>()};
  }
  return g;
}

CameraParams camera_from(const Json& j, CameraParams c) {
  c.F = num(j, "F", c.F);
  c.b = num(j, "b", c.b);
  c.f_u = num(j, "f_u", c.f_u);
  c.f_v = num(j, "f_v", c.f_v);
  c.sensor_w = num(j, "sensor_w", c.sensor_w);
  c.sensor_h = num(j, "sensor_h", c.sensor_h);
  c.alpha = num(j, "alpha", c.alpha);
  c.beta = num(j, "beta", c.beta);
  return c;
}

ActuatorParams actuator_from(const Json& j, ActuatorParams a) {
  a.R = num(j, "R", a.R);
  a.L = num(j, "L", a.L);
  a.Km = num(j, "Km", a.Km);
  a.Ja = num(j, "Ja", a.Ja);
  a.Jg = num(j, "Jg", a.Jg);
  a.Bm = num(j, "Bm", a.Bm);
  if (j.contains("r")) {
    if (!j["r"].is_array() || j["r"].size() != 6) bad("r needs six gear ratios");
    for (int i = 0; i < 6; ++i) a.r[i] = j["r"][i].get<double>();
  }
  return a;
}

ControllerGains gains_from(const Json& j, ControllerGains g) {
  g.tau_in = num(j, "tau_in", g.tau_in);
  g.omega_n = num(j, "omega_n", g.omega_n);
  g.zeta = num(j, "zeta", g.zeta);
  g.tau_ext = num(j, "tau_ext", g.tau_ext);
  g.tau_forward = num(j, "tau_forward", g.tau_forward);
  return g;
}

WorkspaceParams workspace_from(const Json& j, WorkspaceParams w) {
  w.r_V = num(j, "r_V", w.r_V);
  w.r_T = num(j, "r_T", w.r_T);
  w.r_Vr = num(j, "r_Vr", w.r_Vr);
  w.r_Tr = num(j, "r_Tr", w.r_Tr);
  w.L_VT = num(j, "L_VT", w.L_VT);
  w.L_M = num(j, "L_M", w.L_M);
  w.d = num(j, "d", w.d);
  w.Z_max = num(j, "Z_max", w.Z_max);
  w.resolution = num(j, "resolution", w.resolution);
  w.alpha = num(j, "alpha", w.alpha);
  w.beta = num(j, "beta", w.beta);
  w.L_CE = num(j, "L_CE", w.L_CE);
  return w;
}

SystemKind system_from(const std::string& s) {
  if (s == "visual") return SystemKind::Visual;
  if (s == "tool") return SystemKind::Tool;
  if (s == "siso_visual" || s == "siso-visual") return SystemKind::SisoVisual;
  if (s == "siso_tool" || s == "siso-tool") return SystemKind::SisoTool;
  bad("unknown system '" + s + "'");
}

ControllerKind controller_from(const std::string& s) {
  if (s == "fb_only" || s == "fb-only") return ControllerKind::FbOnly;
  if (s == "ff_fb" || s == "ff+fb") return ControllerKind::FfFb;
  if (s == "fb_lin" || s == "fb-lin") return ControllerKind::FbLin;
  bad("unknown controller '" + s + "'");
}

Json resolve(const Json& j, const std::string& base_dir) {
  if (j.is_string()) {
    std::filesystem::path p(j.get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return read_json_file(p.string());
  }
  if (!j.is_object()) bad("expected an object or a file name");
  return j;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    bad(path + ": " + e.what());
  }
}

WorkbenchConfig workbench_from_json(const Json& j) {
  WorkbenchConfig wb;
  try {
    if (j.contains("geometry")) wb.geo = geometry_from(j["geometry"], wb.geo);
    if (j.contains("camera")) wb.cam = camera_from(j["camera"], wb.cam);
    if (j.contains("actuator")) wb.act = actuator_from(j["actuator"], wb.act);
    if (j.contains("gains")) wb.gains = gains_from(j["gains"], wb.gains);
    if (j.contains("workspace")) wb.ws = workspace_from(j["workspace"], wb.ws);
    if (j.contains("out_dir")) wb.out_dir = j["out_dir"].get<std::string>();
  } catch (const Json::exception& e) {
    bad(e.what());
  }
  wb.gains.validate();
  return wb;
}

WorkbenchConfig load_workbench(const std::string& path) { return workbench_from_json(read_json_file(path)); }

ScenarioConfig scenario_from_json(const Json& j, const WorkbenchConfig& wb) {
  ScenarioConfig c;
  try {
    if (!j.is_object()) bad("scenario must be an object");
    c.name = j.value("name", c.name);
    c.system = system_from(j.value("system", std::string("tool")));
    c.controller = controller_from(j.value("controller", std::string("ff_fb")));
    std::string plant = j.value("plant", std::string("full"));
    if (plant != "full" && plant != "ideal") bad("plant must be full or ideal");
    c.plant = plant == "full" ? PlantKind::Full : PlantKind::Ideal;

    c.scene = c.system == SystemKind::Visual ? visual_scene_default() : tool_scene_default();
    c.scene.geo = wb.geo;
    c.scene.cam = wb.cam;
    c.dyn.geo = wb.geo;
    c.dyn.act = wb.act;
    c.gains = wb.gains;

    if (j.contains("q0")) c.q0 = vec6(j["q0"]);
    if (j.contains("target_q")) c.target_q = vec6(j["target_q"]);
    if (j.contains("target_pose")) {
      Pose p;
      p.d = vec3(j["target_pose"].at("d"));
      p.R = mat3_rows(j["target_pose"].at("R"));
      c.target_pose = p;
    }
    if (j.contains("d_q")) c.d_q = vec6(j["d_q"]);
    if (j.contains("gains")) c.gains = gains_from(j["gains"], c.gains);
    if (j.contains("dls")) {
      const Json& d = j["dls"];
      c.dls.lambda_max = num(d, "lambda_max", c.dls.lambda_max);
      c.dls.delta = num(d, "delta", c.dls.delta);
      c.dls.sigma_th = num(d, "sigma_th", c.dls.sigma_th);
    }
    c.duration = num(j, "duration", c.duration);
    c.dt = num(j, "dt", c.dt);
    c.resynth = num(j, "resynth", c.resynth);
    c.crossfade = num(j, "crossfade", c.crossfade);
    c.record_every = static_cast<int>(num(j, "record_every", c.record_every));
    c.seed = static_cast<std::uint64_t>(num(j, "seed", static_cast<double>(c.seed)));

    if (j.contains("scene")) {
      const Json& s = j["scene"];
      if (s.contains("ref_points")) {
        c.scene.ref_points.clear();
        for (const auto& p : s["ref_points"]) c.scene.ref_points.push_back(vec3(p));
      }
      if (s.contains("qV_bar")) c.scene.qV_bar = vec6(s["qV_bar"]);
      c.scene.L_CE = num(s, "L_CE", c.scene.L_CE);
      c.scene.L_VT = num(s, "L_VT", c.scene.L_VT);
      c.scene.L_tool = num(s, "L_tool", c.scene.L_tool);
    }
    if (j.contains("plant_scale")) {
      RobotGeometry g = c.scene.geo;
      g.L2 *= num(j["plant_scale"], "L2", 1.0);
      g.L4 *= num(j["plant_scale"], "L4", 1.0);
      c.plant_geo = g;
    }
    if (j.contains("siso")) {
      const Json& s = j["siso"];
      auto& m = c.siso;
      m.phi = num(s, "phi", m.phi);
      m.qV = num(s, "qV", m.qV);
      m.L_VT = num(s, "L_VT", m.L_VT);
      m.Lt = num(s, "Lt", m.Lt);
      m.half_view = num(s, "half_view", m.half_view);
      m.q0 = num(s, "q0", m.q0);
      m.q_target = num(s, "q_target", m.q_target);
      m.d = num(s, "d", m.d);
    }
  } catch (const Json::exception& e) {
    bad(e.what());
  }
  if (!(c.dt > 0) || !(c.duration > 0)) bad("dt and duration must be positive");
  c.gains.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path, const WorkbenchConfig& wb) {
  return scenario_from_json(read_json_file(path), wb);
}

SearchSpec search_from_json(const Json& j, const WorkbenchConfig& wb) {
  SearchSpec s;
  s.geo = wb.geo;
  s.ws = wb.ws;
  try {
    if (!j.is_object()) bad("search config must be an object");
    s.name = j.value("name", s.name);
    auto& p = s.params;
    p.E_bound = num(j, "E_bound", p.E_bound);
    p.E_T = num(j, "E_T", p.E_T);
    p.K_est = num(j, "K_est", p.K_est);
    p.K_sd = num(j, "K_sd", p.K_sd);
    p.tau_delay = num(j, "tau_delay", p.tau_delay);
    p.sigma_target = num(j, "sigma_target", p.sigma_target);
    p.perfect_sensing = j.value("perfect_sensing", p.perfect_sensing);
    p.image_size = static_cast<int>(num(j, "image_size", p.image_size));
    p.seed = static_cast<std::uint64_t>(num(j, "seed", static_cast<double>(p.seed)));
    p.max_iterations = static_cast<int>(num(j, "max_iterations", p.max_iterations));
    p.energy.act = wb.act;
    if (j.contains("workspace")) s.ws = workspace_from(j["workspace"], s.ws);
    s.ws.resolution = num(j, "resolution", s.ws.resolution);
    if (j.contains("field")) {
      const Json& f = j["field"];
      s.field.base = num(f, "base", s.field.base);
      s.field.floor = num(f, "floor", s.field.floor);
      if (f.contains("wells")) {
        s.field.wells.clear();
        for (const auto& w : f["wells"])
          s.field.wells.push_back({vec3(w.at("centre")), num(w, "depth", 0), num(w, "width", 0.1)});
      }
    }
  } catch (const Json::exception& e) {
    bad(e.what());
  }
  if (!(s.params.E_bound >= 0)) bad("E_bound must be non-negative");
  if (!(s.field.floor > 0)) bad("field floor must be positive");
  return s;
}

SearchSpec load_search(const std::string& path, const WorkbenchConfig& wb) {
  return search_from_json(read_json_file(path), wb);
}

SweepSpec sweep_from_json(const Json& j, const std::string& base_dir) {
  SweepSpec s;
  try {
    s.name = j.value("name", s.name);
    s.kind = j.at("kind").get<std::string>();
    s.parameter = j.at("parameter").get<std::string>();
    for (const auto& v : j.at("values")) s.values.push_back(v.get<double>());
    s.repeats = static_cast<int>(num(j, "repeats", 1));
    s.phi = num(j, "phi", s.phi);
    s.omega_n = num(j, "omega_n", s.omega_n);
    s.duration = num(j, "duration", s.duration);
    s.dt = num(j, "dt", s.dt);
    if (s.kind == "scenario") s.base = resolve(j.at("scenario"), base_dir);
    else if (s.kind == "search") s.base = resolve(j.at("search"), base_dir);
    else if (s.kind != "reduced_visual") bad("unknown sweep kind '" + s.kind + "'");
  } catch (const Json::exception& e) {
    bad(e.what());
  }
  if (s.values.empty()) bad("sweep has no values");
  if (s.repeats < 1) bad("repeats must be positive");
  return s;
}

SweepSpec load_sweep(const std::string& path) {
  return sweep_from_json(read_json_file(path),
                         std::filesystem::path(path).parent_path().string());
}

namespace {

void apply_scenario_param(ScenarioConfig& c, const std::string& p, double v) {
  if (p == "L2_scale" || p == "L4_scale") {
    RobotGeometry g = c.plant_geo ? *c.plant_geo : c.scene.geo;
    (p == "L2_scale" ? g.L2 : g.L4) = (p == "L2_scale" ? c.scene.geo.L2 : c.scene.geo.L4) * v;
    c.plant_geo = g;
  } else if (p == "zeta") {
    c.gains.zeta = v;
  } else if (p == "omega_n") {
    c.gains.omega_n = v;
  } else if (p == "tau_in") {
    c.gains.tau_in = v;
  } else if (p == "phi") {
    c.siso.phi = v;
  } else if (p == "siso_d") {
    c.siso.d = v;
  } else if (p == "d_scale") {
    c.d_q *= v;
  } else {
    bad("unknown scenario sweep parameter '" + p + "'");
  }
}

void apply_search_param(SearchSpec& s, const std::string& p, double v) {
  if (p == "K_est") s.params.K_est = v;
  else if (p == "K_sd") s.params.K_sd = v;
  else if (p == "E_T") s.params.E_T = v;
  else if (p == "E_bound") s.params.E_bound = v;
  else if (p == "tau_delay") s.params.tau_delay = v;
  else bad("unknown search sweep parameter '" + p + "'");
}

}  // namespace

SweepTable run_sweep(const SweepSpec& s, const WorkbenchConfig& wb) {
  SweepTable t;
  if (s.kind == "scenario") {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      ScenarioConfig c = scenario_from_json(s.base, wb);
      apply_scenario_param(c, s.parameter, s.values[i]);
      ScenarioResult r = integrate_scenario(c);
      const auto& tr = r.trace;
      const long m = r.metrics.sse.size();
      double scale = tr.out.empty() ? 1.0 : (tr.target_out - tr.out.front()).cwiseAbs().maxCoeff();
      if (!(scale > 0)) scale = 1.0;
      if (i == 0) {
        t.header = {"value", "settling", "rise", "overshoot", "max_sse", "max_rel_sse", "settled", "diverged"};
        for (long k = 0; k < m; ++k) t.header.push_back("sse_" + std::to_string(k));
        for (long k = 0; k < m; ++k) t.header.push_back("rel_" + std::to_string(k));
      }
      const auto& mt = r.metrics;
      std::vector<double> row = {s.values[i], mt.settling, mt.rise, mt.overshoot, mt.max_sse,
                                 mt.max_sse / scale, mt.settled ? 1.0 : 0.0, r.diverged ? 1.0 : 0.0};
      for (long k = 0; k < m; ++k) row.push_back(mt.sse(k));
      for (long k = 0; k < m; ++k) row.push_back(mt.sse(k) / scale);
      t.rows.push_back(row);
    }
  } else if (s.kind == "search") {
    t.header = {"value", "iterations", "avg_dis_new", "reached_global", "final_N", "safety_violations"};
    SearchSpec base = search_from_json(s.base, wb);
    NodeGrid grid = build_operational_space(base.ws, base.geo);
    for (double v : s.values) {
      SearchSpec sp = base;
      apply_search_param(sp, s.parameter, v);
      CostFn cost = grid_energy_cost(grid, sp.params.tau_delay, sp.params.energy);
      double it = 0, dis = 0, reach = 0, fin = 0, viol = 0;
      for (int k = 0; k < s.repeats; ++k) {
        SearchParams p = sp.params;
        p.seed = sp.params.seed + k;
        SearchResult r = run_search(grid, sp.field, p, cost);
        it += r.iterations;
        dis += r.avg_dis_new;
        reach += r.reached_global;
        fin += r.final_N;
        viol += r.safety_violations;
      }
      const double n = s.repeats;
      t.rows.push_back({v, it / n, dis / n, reach / n, fin / n, viol});
    }
  } else {
    if (s.parameter != "zeta") bad("reduced_visual sweeps scan zeta");
    t.header = {"value", "settling", "overshoot"};
    for (double z : s.values) {
      ZetaScan sc = brute_force_zeta(s.phi, s.omega_n, z, z, 1.0, 1e-3, s.duration, s.dt);
      t.rows.push_back({z, sc.settling.front(), sc.overshoot.front()});
    }
  }
  return t;
}

std::vector<int> unmatched_channels(const ResponseMetrics& m, double tol) {
  std::vector<int> out;
  for (long k = 0; k < m.sse.size(); ++k)
    if (m.sse(k) > tol) out.push_back(static_cast<int>(k));
  return out;
}

Json metrics_to_json(const ScenarioResult& r, const ScenarioConfig& cfg) {
  const auto& m = r.metrics;
  Json j;
  j["name"] = cfg.name;
  j["system"] = to_string(cfg.system);
  j["controller"] = to_string(cfg.controller);
  j["plant"] = to_string(cfg.plant);
  j["settling"] = m.settling;
  j["rise"] = m.rise;
  j["overshoot"] = m.overshoot;
  j["sse"] = std::vector<double>(m.sse.data(), m.sse.data() + m.sse.size());
  j["max_sse"] = m.max_sse;
  j["settled"] = m.settled;
  j["diverged"] = r.diverged;
  j["fov_fraction"] = m.fov_fraction;
  // features are in mm on the sensor, flange positions in m, angles in rad
  const double tol = cfg.system == SystemKind::Visual ? 1e-3 : 1e-3 * 1e-3;
  j["match_tolerance"] = tol;
  j["unmatched_channels"] = unmatched_channels(m, tol);
  const auto& tr = r.trace;
  j["target_out"] = std::vector<double>(tr.target_out.data(), tr.target_out.data() + tr.target_out.size());
  j["q_target"] = std::vector<double>(tr.q_target.data(), tr.q_target.data() + 6);
  return j;
}

namespace {

void put(std::ostream& os, double v) { os << std::setprecision(10) << v; }

}  // namespace

void write_trace_csv(std::ostream& os, const ScenarioTrace& tr) {
  const long nq = tr.q.empty() ? 0 : tr.q.front().size();
  const long no = tr.out.empty() ? 0 : tr.out.front().size();
  os << "t";
  for (long i = 0; i < nq; ++i) os << ",q" << i + 1;
  for (long i = 0; i < nq; ++i) os << ",q_ref" << i + 1;
  for (long i = 0; i < no; ++i) os << ",out" << i + 1;
  os << ",in_fov,fade\n";
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    put(os, tr.t[k]);
    for (long i = 0; i < nq; ++i) os << ',', put(os, tr.q[k](i));
    for (long i = 0; i < nq; ++i) os << ',', put(os, k < tr.q_ref.size() ? tr.q_ref[k](i) : 0.0);
    for (long i = 0; i < no; ++i) os << ',', put(os, tr.out[k](i));
    os << ',' << (k < tr.in_fov.size() ? tr.in_fov[k] : 1) << ',';
    put(os, k < tr.fade.size() ? tr.fade[k] : 1.0);
    os << '\n';
  }
}

void write_search_csv(std::ostream& os, const SearchResult& r) {
  os << "iter,node,x,y,z,N,E_remaining\n";
  for (const auto& s : r.trajectory) {
    os << s.iteration << ',' << s.node;
    for (int i = 0; i < 3; ++i) os << ',', put(os, s.pos(i));
    os << ',';
    put(os, s.N);
    os << ',';
    put(os, s.E_remaining);
    os << '\n';
  }
}

Json search_summary_json(const SearchResult& r, const NodeGrid& g, const SearchSpec& s) {
  Json j;
  j["name"] = s.name;
  j["nodes"] = g.size();
  j["nodes_before_pruning"] = g.ideal_count;
  j["initial_nodes"] = r.initial;
  j["iterations"] = r.iterations;
  j["final_node"] = r.final_node;
  const Vec3& p = g.pos[r.final_node];
  j["final_position"] = {p.x(), p.y(), p.z()};
  j["final_N"] = r.final_N;
  j["best_possible_N"] = r.best_possible_N;
  j["reached_global"] = r.reached_global;
  j["exp_min"] = r.exp_min;
  j["Avg_Dis_new"] = r.avg_dis_new;
  j["safety_violations"] = r.safety_violations;
  j["forced_retreat"] = r.forced_retreat;
  j["E_remaining"] = r.trajectory.empty() ? s.params.E_bound : r.trajectory.back().E_remaining;
  return j;
}

void write_table_csv(std::ostream& os, const SweepTable& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      put(os, row[i]);
    }
    os << '\n';
  }
}

}  // namespace vservo
