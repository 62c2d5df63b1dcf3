#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include "diraclab/errors.hpp"
#include "diraclab/hjlimit.hpp"
#include "diraclab/solver.hpp"

namespace diraclab {

// Shortest decimal form that round-trips the double exactly; locale-free.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Outputs are staged to a sibling temp file and renamed into place, so a
// failed run never leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file " + tmp.string());
    out << content;
    if (!out.good()) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ConfigError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("failed to move output into place at " + path.string());
  }
}

inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,rho,I,xbar,umax,J\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out += format_double(traj.times[i]);
    out += ',';
    out += format_double(traj.rho[i]);
    out += ',';
    out += format_double(traj.I[i]);
    out += ',';
    out += format_double(traj.xbar[i]);
    out += ',';
    out += format_double(traj.umax[i]);
    out += ',';
    out += format_double(traj.J[i]);
    out += '\n';
  }
  return out;
}

// Long-format density snapshots.
inline std::string snapshots_csv(const Trajectory& traj, const TraitGrid& grid) {
  std::string out = "t,x,n\n";
  for (const auto& snap : traj.snapshots) {
    std::string t = format_double(snap.t);
    for (int i = 0; i < grid.n_points; ++i) {
      out += t;
      out += ',';
      out += format_double(grid.x(i));
      out += ',';
      out += format_double(snap.n[i]);
      out += '\n';
    }
  }
  return out;
}

// HJ trajectories share the PDE trajectory columns (rho = I/psi(xbar); J is
// the discrete derivative of I) followed by source=hj and the closure state.
inline std::string hj_csv(const HJTrajectory& traj, const ConsumptionWeight& psi) {
  std::string out = "t,rho,I,xbar,umax,J,source,M,phase\n";
  const std::size_t n = traj.times.size();
  for (std::size_t i = 0; i < n; ++i) {
    double dI;
    if (n < 2) {
      dI = 0.0;
    } else if (i == 0) {
      dI = (traj.I[1] - traj.I[0]) / (traj.times[1] - traj.times[0]);
    } else if (i == n - 1) {
      dI = (traj.I[i] - traj.I[i - 1]) / (traj.times[i] - traj.times[i - 1]);
    } else {
      dI = (traj.I[i + 1] - traj.I[i - 1]) / (traj.times[i + 1] - traj.times[i - 1]);
    }
    out += format_double(traj.times[i]);
    out += ',';
    out += format_double(traj.I[i] / psi(traj.xbar[i]));
    out += ',';
    out += format_double(traj.I[i]);
    out += ',';
    out += format_double(traj.xbar[i]);
    out += ',';
    out += format_double(traj.umax[i]);
    out += ',';
    out += format_double(dI);
    out += ",hj,";
    out += format_double(traj.M[i]);
    out += ',';
    out += to_string(traj.phase[i]);
    out += '\n';
  }
  return out;
}

struct SweepRow {
  double T = 0.0;
  double mean_rho = 0.0;
  double min_rho = 0.0;
  bool extinct = false;
  bool failed = false;
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "T,mean_rho,min_rho,extinct\n";
  for (const SweepRow& r : rows) {
    out += format_double(r.T);
    if (r.failed) {
      out += ",nan,nan,nan\n";
    } else {
      out += ',';
      out += format_double(r.mean_rho);
      out += ',';
      out += format_double(r.min_rho);
      out += ',';
      out += r.extinct ? "true" : "false";
      out += '\n';
    }
  }
  return out;
}

}  // namespace diraclab
