// vservo command line: kinematics, scenario runs, placement search, sweeps
// and the noise estimator.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "vservo/camera.hpp"
#include "vservo/config.hpp"
#include "vservo/kinematics.hpp"

using namespace vservo;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kParse = 2, kUnreachable = 3, kNotSettled = 4, kDiverged = 5 };

Json pose_json(const Pose& p) {
  Json j;
  j["d"] = {p.d.x(), p.d.y(), p.d.z()};
  Json R = Json::array();
  for (int r = 0; r < 3; ++r) R.push_back({p.R(r, 0), p.R(r, 1), p.R(r, 2)});
  j["R"] = R;
  return j;
}

Json deg_vec(const Vec6& q) {
  Json a = Json::array();
  for (int i = 0; i < 6; ++i) a.push_back(rad2deg(q[i]));
  return a;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorKind::Parse, "cannot write " + p.string());
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vservo: visual servoing workbench"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  long long seed = -1;
  app.add_option("--config", config_path, "workbench JSON with cell defaults");
  app.add_option("--out-dir", out_dir, "directory for emitted files");
  app.add_option("--seed", seed, "override the seed of the run");

  std::vector<double> fk_q;
  auto* fk = app.add_subcommand("fk", "forward kinematics, joint angles in degrees");
  fk->add_option("q", fk_q, "six joint angles (deg)")->required()->expected(6);

  std::vector<double> ik_args;
  auto* ik = app.add_subcommand("ik", "inverse kinematics of x y z roll pitch yaw (m, deg)");
  ik->add_option("pose", ik_args, "x y z [roll pitch yaw], or x y z and --R")->required()->expected(3, 6);
  std::vector<double> ik_R;
  ik->add_option("--R", ik_R, "rotation matrix, 9 numbers row by row")->expected(9);

  std::string scen_path;
  auto* sim = app.add_subcommand("simulate", "run a closed-loop scenario file");
  sim->add_option("scenario", scen_path)->required();

  std::string search_path;
  auto* search = app.add_subcommand("search", "camera placement search");
  search->add_option("config", search_path)->required();

  std::string sweep_path;
  auto* sweep = app.add_subcommand("sweep", "parameter sweep");
  sweep->add_option("spec", sweep_path)->required();

  std::string pgm_path;
  int patch = 7;
  auto* noise = app.add_subcommand("noise-estimate", "noise level of a binary PGM");
  noise->add_option("pgm", pgm_path)->required();
  noise->add_option("-d,--patch", patch, "patch size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    WorkbenchConfig wb;
    if (!config_path.empty()) wb = load_workbench(config_path);
    if (!out_dir.empty()) wb.out_dir = out_dir;
    const fs::path out(wb.out_dir);

    if (*fk) {
      Vec6 q;
      for (int i = 0; i < 6; ++i) q[i] = deg2rad(fk_q[i]);
      std::cout << pose_json(forward_kinematics(q, wb.geo)).dump(2) << "\n";
      return kOk;
    }

    if (*ik) {
      Pose p;
      p.d = Vec3(ik_args[0], ik_args[1], ik_args[2]);
      if (ik_R.size() == 9) {
        for (int i = 0; i < 9; ++i) p.R(i / 3, i % 3) = ik_R[i];
      } else if (ik_args.size() == 6) {
        p.R = rot_z(deg2rad(ik_args[5])) * rot_y(deg2rad(ik_args[4])) * rot_x(deg2rad(ik_args[3]));
      } else if (ik_args.size() != 3) {
        throw Error(ErrorKind::Parse, "ik takes x y z, optionally roll pitch yaw");
      }
      auto set = inverse_kinematics(p, wb.geo);
      Vec6 pick = select_joint_solution(set, wb.geo, std::nullopt, SelectMode::TargetGen);
      Json j;
      j["wrist_singular"] = set.wrist_singular;
      j["shoulder_singular"] = set.shoulder_singular;
      Json cands = Json::array();
      for (const auto& c : set.candidates) {
        Json e;
        e["arm"] = to_string(c.arm);
        e["elbow"] = to_string(c.elbow);
        e["wrist"] = to_string(c.wrist);
        e["q_deg"] = deg_vec(c.q);
        e["within_limits"] = wb.geo.within_limits(c.q);
        e["selected"] = (c.q - pick).norm() < 1e-9;
        cands.push_back(e);
      }
      j["candidates"] = cands;
      j["selected_q_deg"] = deg_vec(pick);
      std::cout << j.dump(2) << "\n";
      return kOk;
    }

    if (*sim) {
      ScenarioConfig c = load_scenario(scen_path, wb);
      if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
      ScenarioResult r = integrate_scenario(c);
      fs::create_directories(out);
      auto csv = open_out(out / (c.name + ".trace.csv"));
      write_trace_csv(csv, r.trace);
      Json m = metrics_to_json(r, c);
      open_out(out / (c.name + ".metrics.json")) << m.dump(2) << "\n";
      std::cout << m.dump(2) << "\n";
      if (r.diverged) return kDiverged;
      return r.metrics.settled ? kOk : kNotSettled;
    }

    if (*search) {
      SearchSpec s = load_search(search_path, wb);
      if (seed >= 0) s.params.seed = static_cast<std::uint64_t>(seed);
      NodeGrid g = build_operational_space(s.ws, s.geo);
      SearchResult r = run_search(g, s.field, s.params);
      fs::create_directories(out);
      auto csv = open_out(out / (s.name + ".trajectory.csv"));
      write_search_csv(csv, r);
      Json j = search_summary_json(r, g, s);
      open_out(out / (s.name + ".summary.json")) << j.dump(2) << "\n";
      std::cout << j.dump(2) << "\n";
      return kOk;
    }

    if (*sweep) {
      SweepSpec s = load_sweep(sweep_path);
      if (seed >= 0 && s.kind == "search") s.base["seed"] = seed;
      SweepTable t = run_sweep(s, wb);
      fs::create_directories(out);
      auto csv = open_out(out / (s.name + ".sweep.csv"));
      write_table_csv(csv, t);
      write_table_csv(std::cout, t);
      return kOk;
    }

    if (*noise) {
      Image img = read_pgm(pgm_path);
      NoiseEstimate e = estimate_noise_level(img, patch);
      std::cout << std::fixed << std::setprecision(6) << e.sigma << "\n";
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Unreachable: return kUnreachable;
      case ErrorKind::Diverged: return kDiverged;
      default: return kParse;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  }
  return kOk;
}
