#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "diraclab/errors.hpp"
#include "diraclab/model.hpp"

namespace diraclab {

// Hopf-Cole transform u = eps ln n, clamped below so that numerically zero
// density regions stay finite. The floor only truncates values that are far
// below double underflow at the epsilons of interest.
struct HopfColeField {
  std::vector<double> u;
  double eps = 1e-3;
  double u_floor = -2.0;
};

inline HopfColeField hopf_cole(std::span<const double> n, double eps, double u_floor = -2.0) {
  if (!(eps > 0.0)) throw std::invalid_argument("hopf_cole: eps must be > 0");
  if (!(u_floor < 0.0)) throw std::invalid_argument("hopf_cole: u_floor must be < 0");
  HopfColeField f;
  f.eps = eps;
  f.u_floor = u_floor;
  f.u.resize(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0.0) throw std::invalid_argument("hopf_cole: negative density");
    f.u[i] = n[i] > 0.0 ? std::max(eps * std::log(n[i]), u_floor) : u_floor;
  }
  return f;
}

struct Interval {
  double lo, hi;
};

// Vertex of the parabola through (x0 - dx, um), (x0, u0), (x0 + dx, up).
// Callers pass the discrete argmax and its neighbours; the offset is then
// bounded by dx/2 and the curvature is the centered second difference.
struct ParabolicVertex {
  double x;
  double value;
  double curvature;
};

inline ParabolicVertex parabolic_vertex(double x0, double dx, double um, double u0, double up) {
  double denom = um - 2.0 * u0 + up;
  if (denom == 0.0) return {x0, u0, 0.0};
  double delta = 0.5 * dx * (um - up) / denom;
  double slope = (up - um) / (2.0 * dx);
  double curv = denom / (dx * dx);
  return {x0 + delta, u0 - slope * slope / (2.0 * curv), curv};
}

// Concentration diagnostics of a Hopf-Cole field: the refined argmax xbar,
// the refined maximum, the discrete curvature there, and the near-zero set
// Gamma extracted at tolerance tol_gamma (default 10 eps, matching the
// O(eps ln) width of the concentration layer).
struct ConcentrationReport {
  double xbar = 0.0;
  double u_max = 0.0;
  double curvature = 0.0;
  std::vector<Interval> gamma_set;
  bool at_boundary = false;
};

inline ConcentrationReport concentration_point(const HopfColeField& f, const TraitGrid& grid,
                                               double tol_gamma = -1.0) {
  const auto& u = f.u;
  if (static_cast<int>(u.size()) != grid.n_points)
    throw std::invalid_argument("concentration_point: field/grid size mismatch");
  if (tol_gamma < 0.0) tol_gamma = 10.0 * f.eps;

  int imax = 0;
  for (int i = 1; i < grid.n_points; ++i)
    if (u[i] > u[imax]) imax = i;  // ties resolve to the smaller x

  ConcentrationReport rep;
  if (imax == 0 || imax == grid.n_points - 1) {
    rep.at_boundary = true;
    rep.xbar = grid.x(imax);
    rep.u_max = u[imax];
    int j = imax == 0 ? 1 : grid.n_points - 2;
    rep.curvature = (u[j - 1] - 2.0 * u[j] + u[j + 1]) / (grid.dx * grid.dx);
  } else {
    auto v = parabolic_vertex(grid.x(imax), grid.dx, u[imax - 1], u[imax], u[imax + 1]);
    rep.xbar = v.x;
    rep.u_max = v.value;
    rep.curvature = v.curvature;
  }

  int start = -1;
  for (int i = 0; i < grid.n_points; ++i) {
    bool inside = u[i] >= -tol_gamma;
    if (inside && start < 0) start = i;
    if ((!inside || i == grid.n_points - 1) && start >= 0) {
      int end = inside ? i : i - 1;
      rep.gamma_set.push_back({grid.x(start), grid.x(end)});
      start = -1;
    }
  }
  return rep;
}

// J = (1/eps) * integral of psi n R(x, I) dx, the drift of the competition
// level up to the O(eps) mutation flux.
inline double compute_J(std::span<const double> n, const GrowthModel& model, double I, double eps,
                        const ConsumptionWeight& psi, const TraitGrid& grid) {
  if (static_cast<int>(n.size()) != grid.n_points)
    throw std::invalid_argument("compute_J: state/grid size mismatch");
  double s = 0.0;
  for (int i = 0; i < grid.n_points; ++i) {
    double x = grid.x(i);
    double term = psi(x) * n[i] * model.rate(x, I);
    s += (i == 0 || i == grid.n_points - 1) ? 0.5 * term : term;
  }
  return s * grid.dx / eps;
}

inline double bv_norm(std::span<const double> series, std::span<const double> times) {
  if (series.size() != times.size() || series.size() < 2)
    throw std::invalid_argument("bv_norm: need two equally long series");
  double s = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) s += std::abs(series[i] - series[i - 1]);
  return s;
}

inline double sub_lipschitz_min_slope(std::span<const double> series,
                                      std::span<const double> times) {
  if (series.size() != times.size() || series.size() < 2)
    throw std::invalid_argument("sub_lipschitz_min_slope: need two equally long series");
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < series.size(); ++i) {
    double dt = times[i] - times[i - 1];
    if (!(dt > 0.0)) throw std::invalid_argument("sub_lipschitz_min_slope: times must increase");
    m = std::min(m, (series[i] - series[i - 1]) / dt);
  }
  return m;
}

// Residuals of the limit constraints: max u (tends to 0 while the competition
// stays bounded below) and R(xbar, I) (tends to 0 likewise).
struct ConstraintResiduals {
  double max_u;
  double R_at_xbar;
};

inline ConstraintResiduals constraint_residuals(const HopfColeField& f, const TraitGrid& grid,
                                                const GrowthModel& model, double I) {
  auto rep = concentration_point(f, grid);
  return {rep.u_max, model.rate(rep.xbar, I)};
}

}  // namespace diraclab
