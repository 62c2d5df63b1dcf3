// Command-line front end: config-driven simulation, initial-data
// classification, period sweeps, and the Hamilton-Jacobi limit integrator.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diraclab/config.hpp"
#include "diraclab/criteria.hpp"
#include "diraclab/csv.hpp"
#include "diraclab/hjlimit.hpp"
#include "diraclab/scenarios.hpp"
#include "diraclab/solver.hpp"

namespace {

using namespace diraclab;
using nlohmann::json;

struct CommonOpts {
  std::string config_path;
  std::string preset_id;
  std::vector<std::string> overrides;
  std::string out_dir;
  int jobs = 0;
  int snapshots = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_jobs = false,
                bool with_snapshots = false) {
  cmd->add_option("--config", opts.config_path, "Path to a run config file");
  cmd->add_option("--preset", opts.preset_id, "Use a named preset instead of a config file");
  cmd->add_option("--set", opts.overrides, "Override a config entry, e.g. solver.t_end=5");
  cmd->add_option("--out", opts.out_dir, "Output directory");
  if (with_jobs) cmd->add_option("--jobs", opts.jobs, "Parallel sweep workers (default: cores)");
  if (with_snapshots)
    cmd->add_option("--snapshots", opts.snapshots, "Density snapshot stride in steps");
}

RunConfig load_from_opts(const CommonOpts& opts) {
  if (!opts.config_path.empty() && !opts.preset_id.empty())
    throw ConfigError("give either --config or --preset, not both");
  RunConfig rc;
  if (!opts.preset_id.empty()) {
    rc = preset(opts.preset_id).config;
    if (!opts.overrides.empty()) {
      ParsedConfig pc = parse_config_text(serialize_config(rc));
      for (const std::string& o : opts.overrides) apply_override(pc, o);
      rc = build_run_config(pc);
    }
  } else if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("cannot read config file " + opts.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    rc = load_config(ss.str(), opts.overrides);
  } else {
    throw ConfigError("a config is required: pass --config PATH or --preset ID");
  }
  if (opts.snapshots >= 0) rc.snapshot_stride = opts.snapshots;
  return rc;
}

std::filesystem::path resolve_out_dir(const CommonOpts& opts, const RunConfig& rc) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (!rc.output.dir.empty()) return rc.output.dir;
  if (const char* env = std::getenv("DIRACLAB_OUT"); env && *env) return env;
  return ".";
}

int cmd_simulate(const CommonOpts& opts) {
  RunConfig rc = load_from_opts(opts);
  std::filesystem::path dir = resolve_out_dir(opts, rc);
  Trajectory traj = simulate(rc);
  std::filesystem::path traj_path = dir / rc.output.trajectory;
  write_file_atomic(traj_path, trajectory_csv(traj));
  std::cout << "wrote " << traj_path.string() << " (" << traj.size() << " rows)\n";
  if (rc.snapshot_stride > 0) {
    std::filesystem::path snap_path = dir / rc.output.snapshots;
    write_file_atomic(snap_path, snapshots_csv(traj, rc.grid));
    std::cout << "wrote " << snap_path.string() << " (" << traj.snapshots.size()
              << " snapshots)\n";
  }
  if (traj.floor_applied) std::cerr << "note: density floor was applied during the run\n";
  return 0;
}

int cmd_classify(const CommonOpts& opts) {
  RunConfig rc = load_from_opts(opts);
  const GrowthModel& model = rc.models[rc.schedule.model_at(0.0)];
  FateClass fate = classify_initial(rc.ic, model, rc.eps, rc.grid);
  json out;
  out["tag"] = to_string(fate.tag);
  out["witness"] = fate.witness;
  if (fate.tag == FateTag::ExtinctionInterval)
    out["margin"] = fate.margin;
  else
    out["margin"] = nullptr;
  std::cout << out.dump() << "\n";
  return 0;
}

// One sweep member: the preset schedule rescaled to period T, run for
// ceil(5/T) + 10 burn-in periods plus one measurement period.
SweepRow sweep_member(const RunConfig& base, double T) {
  RunConfig rc = base;
  if (!base.schedule.period())
    throw ConfigError("[schedule]: sweep requires a periodic schedule");
  double scale = T / *base.schedule.period();
  std::vector<EnvironmentSchedule::Segment> segs;
  for (const auto& s : base.schedule.segments()) segs.push_back({s.t_start * scale, s.model});
  rc.schedule = EnvironmentSchedule::piecewise(segs, T);
  long burn = static_cast<long>(std::ceil(5.0 / T)) + 10;
  rc.t_end = static_cast<double>(burn + 1) * T;
  rc.snapshot_stride = 0;

  Trajectory tr = simulate(rc);
  double t0 = rc.t_end - T;
  SweepRow row;
  row.T = T;
  double mean = 0.0, mn = std::numeric_limits<double>::infinity();
  double tprev = -1.0, rprev = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    if (tr.times[k] < t0 - 1e-9) continue;
    if (tprev >= 0.0) mean += 0.5 * (tr.rho[k] + rprev) * (tr.times[k] - tprev);
    mn = std::min(mn, tr.rho[k]);
    tprev = tr.times[k];
    rprev = tr.rho[k];
  }
  row.mean_rho = mean / T;
  row.min_rho = mn;
  row.extinct = mn < 1e-4;
  return row;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<double>& cli_values) {
  RunConfig rc = load_from_opts(opts);
  std::filesystem::path dir = resolve_out_dir(opts, rc);
  std::vector<double> values = cli_values.empty() ? rc.sweep_values : cli_values;
  if (values.empty())
    throw ConfigError("[sweep].values: no sweep values given (config or --values)");
  if (!rc.schedule.period())
    throw ConfigError("[schedule]: sweep requires a periodic schedule");
  for (double v : values)
    if (!(v > 0.0)) throw ConfigError("[sweep].values: periods must be > 0");

  unsigned jobs = opts.jobs > 0 ? static_cast<unsigned>(opts.jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, values.size());

  std::vector<SweepRow> rows(values.size());
  std::vector<std::string> errors(values.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < values.size();) {
        try {
          rows[i] = sweep_member(rc, values[i]);
        } catch (const std::exception& e) {
          rows[i].T = values[i];
          rows[i].failed = true;
          errors[i] = e.what();
        }
      }
    });
  }
  for (auto& th : pool) th.join();

  std::filesystem::path path = dir / rc.output.sweep;
  write_file_atomic(path, sweep_csv(rows));
  std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";

  bool any_failed = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].failed) {
      any_failed = true;
      std::cerr << "sweep member T=" << format_double(values[i]) << " failed: " << errors[i]
                << "\n";
    }
  }
  return any_failed ? 3 : 0;
}

int cmd_hjlimit(const CommonOpts& opts) {
  RunConfig rc = load_from_opts(opts);
  std::filesystem::path dir = resolve_out_dir(opts, rc);

  double x0, M0;
  if (rc.hj.x0) {
    x0 = *rc.hj.x0;
  } else {
    const auto& comps = rc.ic.components();
    if (comps.size() != 1 || comps[0].kind == InitialCondition::Kind::Box)
      throw ConfigError("[hj].x0: required unless the IC is a single Gaussian kind");
    x0 = comps[0].center;
  }
  if (rc.hj.M0) {
    M0 = *rc.hj.M0;
  } else {
    const auto& comps = rc.ic.components();
    if (comps.size() == 1 && comps[0].kind == InitialCondition::Kind::GroundStateGaussian)
      M0 = std::sqrt(comps[0].g);
    else if (comps.size() == 1 && comps[0].kind == InitialCondition::Kind::Gaussian)
      M0 = 1.0;
    else
      throw ConfigError("[hj].m0: required unless the IC is a single Gaussian kind");
  }
  double t_end = rc.hj.t_end.value_or(rc.t_end);

  HJTrajectory traj = hj_simulate(rc.models, rc.schedule, x0, M0, t_end, rc.hj.dt);
  for (const auto& e : traj.events)
    std::cerr << "phase flip at t=" << format_double(e.t) << ": " << to_string(e.from) << " -> "
              << to_string(e.to) << "\n";

  std::filesystem::path csv_path = dir / rc.output.hj_trajectory;
  write_file_atomic(csv_path, hj_csv(traj, rc.psi));

  json out;
  out["x0"] = x0;
  out["m0"] = M0;
  const GrowthModel& m0model = rc.models[rc.schedule.model_at(0.0)];
  bool starts_extinct = m0model.rate(x0, 0.0) < 0.0;
  out["initial_phase"] = starts_extinct ? "extinct" : "persistent";
  if (auto tb = traj.t_bar())
    out["t_bar"] = *tb;
  else
    out["t_bar"] = nullptr;
  if (starts_extinct) {
    ConcavityConstants cc;
    if (rc.hj.constants) {
      cc = *rc.hj.constants;
    } else if (m0model.form() == GrowthModel::Form::Quadratic) {
      cc.K2_lower = cc.K2_upper = m0model.quad_g();
      cc.L1_lower = cc.L1_upper = 0.5 * M0;
    } else {
      throw ConfigError(
          "[hj]: concavity constants are required for non-quadratic growth rates");
    }
    DurationBounds b =
        extinction_duration_bounds(m0model, x0, cc, rc.grid.x_min, rc.grid.x_max);
    out["duration_bounds"] = {
        {"lower", b.lower}, {"upper", b.upper}, {"A1", b.A1}, {"A2", b.A2}};
  } else {
    out["duration_bounds"] = nullptr;
  }
  json events = json::array();
  for (const auto& e : traj.events)
    events.push_back({{"t", e.t}, {"from", to_string(e.from)}, {"to", to_string(e.to)}});
  out["events"] = events;

  std::filesystem::path json_path = dir / rc.output.hj_bounds;
  write_file_atomic(json_path, out.dump(2) + "\n");
  std::cout << "wrote " << csv_path.string() << " and " << json_path.string() << "\n";
  return 0;
}

int cmd_preset(const std::string& action, const std::string& id) {
  if (action == "list") {
    for (const std::string& pid : preset_ids()) {
      Preset p = preset(pid);
      std::cout << pid << "  -  " << p.title << "\n";
    }
    return 0;
  }
  if (action == "export") {
    if (id.empty()) throw ConfigError("preset export: an id is required");
    std::cout << serialize_config(preset(id).config);
    return 0;
  }
  throw ConfigError("preset: unknown action '" + action + "' (use list or export)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diraclab - numerical laboratory for Dirac concentration in "
               "selection-mutation dynamics"};
  app.require_subcommand(1);

  CommonOpts sim_opts, cls_opts, swp_opts, hj_opts;
  std::vector<double> sweep_values;
  std::string preset_action, preset_id;

  CLI::App* sim = app.add_subcommand("simulate", "Run the PDE solver and write a trajectory CSV");
  add_common(sim, sim_opts, false, true);

  CLI::App* cls =
      app.add_subcommand("classify", "Classify the initial data (JSON verdict on stdout)");
  add_common(cls, cls_opts);

  CLI::App* swp = app.add_subcommand("sweep", "Sweep the switching period T");
  add_common(swp, swp_opts, true);
  swp->add_option("--values", sweep_values, "Periods to sweep (overrides [sweep].values)")
      ->delimiter(',');

  CLI::App* hj = app.add_subcommand("hjlimit", "Integrate the Hamilton-Jacobi limit dynamics");
  add_common(hj, hj_opts);

  CLI::App* pre = app.add_subcommand("preset", "List or export named presets");
  pre->add_option("action", preset_action, "list or export")->required();
  pre->add_option("id", preset_id, "preset id for export");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (cls->parsed()) return cmd_classify(cls_opts);
    if (swp->parsed()) return cmd_sweep(swp_opts, sweep_values);
    if (hj->parsed()) return cmd_hjlimit(hj_opts);
    if (pre->parsed()) return cmd_preset(preset_action, preset_id);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
