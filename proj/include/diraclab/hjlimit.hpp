#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "diraclab/errors.hpp"
#include "diraclab/model.hpp"

namespace diraclab {

// Limit dynamics of the concentration point under the quadratic closure
// u(t, x) = -M(t) (x - xbar(t))^2 / 2:
//   xbar' = grad R(xbar, I) / M,      M' = -2 M^2 - D2 R(xbar, I),
// with I pinned by the constraint R(xbar, I) = 0 while the population
// persists, and I = 0 during an extinction phase. An extinction phase ends at
// Tbar, the first time R(xbar, 0) returns to zero; the closure is exact for
// quadratic growth rates with Gaussian initial data and is validated against
// the PDE solver elsewhere.

enum class HJPhase { Persistent, Extinct };

inline const char* to_string(HJPhase p) {
  return p == HJPhase::Persistent ? "persistent" : "extinct";
}

struct HJState {
  double t = 0.0;
  double xbar = 0.0;
  double M = 1.0;       // -D2 u at the maximum, must stay > 0
  double I = 0.0;
  double umax = 0.0;    // 0 under the constraint; integrated depth while extinct
  HJPhase phase = HJPhase::Persistent;
};

// Competition level pinned by R(xbar, I) = 0. Supported growth rates are
// affine in I, so the root is a(xbar) exactly.
inline double solve_I_constraint(const GrowthModel& model, double xbar) {
  double a = model.rate(xbar, 0.0);
  if (a < 0.0)
    throw NumericalError("solve_I_constraint: R(xbar, 0) < 0 has no nonnegative root", 0.0);
  return a;
}

namespace detail {

struct HJVars {
  double x, M, w;
};

// One RK4 increment of (xbar, M, umax-depth) at fixed phase.
inline HJVars hj_rk4(const GrowthModel& m, HJVars y, double h, bool extinct) {
  auto f = [&](const HJVars& v) -> HJVars {
    if (!(v.M > 0.0))
      throw NumericalError("hj_step: quadratic closure broke down (M <= 0)", 0.0);
    double I = extinct ? 0.0 : std::max(0.0, m.rate(v.x, 0.0));
    return {m.rate_dx(v.x, I) / v.M, -2.0 * v.M * v.M - m.rate_dxx(v.x, I),
            extinct ? m.rate(v.x, 0.0) : 0.0};
  };
  auto add = [](const HJVars& a, const HJVars& b, double s) -> HJVars {
    return {a.x + s * b.x, a.M + s * b.M, a.w + s * b.w};
  };
  HJVars k1 = f(y);
  HJVars k2 = f(add(y, k1, 0.5 * h));
  HJVars k3 = f(add(y, k2, 0.5 * h));
  HJVars k4 = f(add(y, k3, h));
  return {y.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          y.M + h / 6.0 * (k1.M + 2.0 * k2.M + 2.0 * k3.M + k4.M),
          y.w + h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w)};
}

}  // namespace detail

// Advances one step of length dt. During an extinction phase the crossing
// R(xbar, 0) = 0 is located by bisection to 1e-9 in t; the state switches to
// the persistent branch there and finishes the step under the constraint.
// When a crossing happens its time is written to *crossing_t.
inline HJState hj_step(const HJState& s, const GrowthModel& model, double dt,
                       double* crossing_t = nullptr) {
  if (!(dt > 0.0)) throw ConfigError("hj_step: dt must be > 0");
  if (!(s.M > 0.0)) throw NumericalError("hj_step: M must be > 0", s.t);

  detail::HJVars y0{s.xbar, s.M, s.umax};
  HJState out = s;
  out.t = s.t + dt;

  if (s.phase == HJPhase::Persistent) {
    detail::HJVars y = detail::hj_rk4(model, y0, dt, false);
    out.xbar = y.x;
    out.M = y.M;
    out.umax = 0.0;
    out.I = std::max(0.0, model.rate(out.xbar, 0.0));
  } else {
    detail::HJVars y = detail::hj_rk4(model, y0, dt, true);
    if (model.rate(y.x, 0.0) >= 0.0) {
      // Tbar inside this step: bisect on the sub-step length.
      double lo = 0.0, hi = dt;
      while (hi - lo > 1e-9) {
        double mid = 0.5 * (lo + hi);
        if (model.rate(detail::hj_rk4(model, y0, mid, true).x, 0.0) < 0.0)
          lo = mid;
        else
          hi = mid;
      }
      detail::HJVars yc = detail::hj_rk4(model, y0, hi, true);
      if (crossing_t) *crossing_t = s.t + hi;
      detail::HJVars y1 = detail::hj_rk4(model, yc, dt - hi, false);
      out.xbar = y1.x;
      out.M = y1.M;
      out.umax = 0.0;  // constraint reattaches at the crossing
      out.phase = HJPhase::Persistent;
      out.I = std::max(0.0, model.rate(out.xbar, 0.0));
    } else {
      out.xbar = y.x;
      out.M = y.M;
      out.umax = y.w;
      out.I = 0.0;
    }
  }
  if (!(out.M > 0.0))
    throw NumericalError("hj_step: quadratic closure broke down (M <= 0)", s.t);
  return out;
}

// Two-sided bound on the extinction duration,
//   A1 (-R(x0,0))/|grad R(x0,0)|^2 <= Tbar <= A2 (-R(x0,0))/|grad R(xT,0)|^2,
// with A1 = min(2 L1_upper, sqrt(K2_upper)), A2 = max(2 L1_lower,
// sqrt(K2_lower)) from the curvature sandwich, and xT the nearest root of
// R(., 0) in the direction of motion (the sign of the initial gradient).
struct DurationBounds {
  double lower = 0.0;
  double upper = 0.0;
  double A1 = 0.0;
  double A2 = 0.0;
};

inline DurationBounds extinction_duration_bounds(const GrowthModel& model, double xbar0,
                                                 const ConcavityConstants& constants,
                                                 double x_search_min = -100.0,
                                                 double x_search_max = 100.0) {
  constants.validate();
  DurationBounds b;
  b.A1 = std::min(2.0 * constants.L1_upper, std::sqrt(constants.K2_upper));
  b.A2 = std::max(2.0 * constants.L1_lower, std::sqrt(constants.K2_lower));

  double R0 = model.rate(xbar0, 0.0);
  if (R0 > 0.0)
    throw ConfigError("duration bounds: xbar0 is already viable (R(xbar0, 0) > 0)");
  if (R0 == 0.0) return b;  // degenerate: no extinction phase

  double grad0 = model.rate_dx(xbar0, 0.0);
  if (grad0 == 0.0)
    throw ConfigError("duration bounds: grad R(xbar0, 0) = 0; the bounds are not finite");

  std::vector<double> roots = grad0 > 0.0 ? model.a().roots_in(xbar0, x_search_max)
                                          : model.a().roots_in(x_search_min, xbar0);
  double xT;
  if (grad0 > 0.0) {
    if (roots.empty()) throw ConfigError("duration bounds: no viability boundary ahead");
    xT = roots.front();
  } else {
    if (roots.empty()) throw ConfigError("duration bounds: no viability boundary ahead");
    xT = roots.back();
  }
  double gradT = model.rate_dx(xT, 0.0);
  if (gradT == 0.0)
    throw ConfigError("duration bounds: grad R vanishes at the viability boundary");

  b.lower = b.A1 * (-R0) / (grad0 * grad0);
  b.upper = b.A2 * (-R0) / (gradT * gradT);
  return b;
}

struct HJTrajectory {
  std::vector<double> times, xbar, M, I, umax;
  std::vector<HJPhase> phase;
  struct Event {
    double t;
    HJPhase from, to;
  };
  std::vector<Event> events;

  // First recovery of viability when the run starts extinct.
  std::optional<double> t_bar() const {
    for (const Event& e : events)
      if (e.from == HJPhase::Extinct && e.to == HJPhase::Persistent) return e.t;
    return std::nullopt;
  }
};

// Integrates the closure over [0, t_end] against a (possibly switching)
// environment. At every switch time the phase is re-evaluated from the new
// landscape: R_new(xbar, 0) > 0 resumes the constrained branch, otherwise an
// extinction phase opens; xbar and M stay continuous across the switch.
inline HJTrajectory hj_simulate(const std::vector<GrowthModel>& models,
                                const EnvironmentSchedule& schedule, double x0, double M0,
                                double t_end, double dt = 1e-3) {
  if (models.empty()) throw ConfigError("hj_simulate: empty model table");
  if (schedule.max_model_index() >= static_cast<int>(models.size()))
    throw ConfigError("hj_simulate: schedule references a missing model");
  if (!(M0 > 0.0)) throw ConfigError("hj_simulate: M0 must be > 0");
  if (!(dt > 0.0)) throw ConfigError("hj_simulate: dt must be > 0");
  if (!(t_end >= 0.0)) throw ConfigError("hj_simulate: t_end must be >= 0");

  HJState s;
  s.t = 0.0;
  s.xbar = x0;
  s.M = M0;
  {
    const GrowthModel& m0 = models[schedule.model_at(0.0)];
    if (m0.rate(x0, 0.0) >= 0.0) {
      s.phase = HJPhase::Persistent;
      s.I = m0.rate(x0, 0.0);
    } else {
      s.phase = HJPhase::Extinct;
      s.I = 0.0;
    }
  }

  HJTrajectory traj;
  auto record = [&](const HJState& st) {
    traj.times.push_back(st.t);
    traj.xbar.push_back(st.xbar);
    traj.M.push_back(st.M);
    traj.I.push_back(st.I);
    traj.umax.push_back(st.phase == HJPhase::Persistent ? 0.0 : st.umax);
    traj.phase.push_back(st.phase);
  };
  record(s);

  int mi = schedule.model_at(0.0);
  auto next_sw = schedule.next_switch_after(0.0, t_end);

  const double t_tol = 1e-12 * std::max(1.0, t_end);
  while (s.t < t_end - t_tol) {
    double t_event = next_sw ? next_sw->t : t_end;

    double remaining = t_event - s.t;
    bool lands = remaining <= dt * (1.0 + 1e-9);
    double dt_step = lands ? remaining : dt;
    if (!(dt_step > 0.0)) throw ConfigError("hj_simulate: non-positive step; check switch times");

    double crossing = -1.0;
    HJPhase before = s.phase;
    s = hj_step(s, models[mi], dt_step, &crossing);
    if (s.phase != before) traj.events.push_back({crossing, before, s.phase});
    if (lands) {
      s.t = t_event;
      if (next_sw && t_event == next_sw->t) {
        // Re-classify against the landscape that opens at the switch.
        mi = next_sw->model;
        next_sw = schedule.next_switch_after(s.t, t_end);
        const GrowthModel& mn = models[mi];
        HJPhase np = mn.rate(s.xbar, 0.0) > 0.0 ? HJPhase::Persistent : HJPhase::Extinct;
        if (np != s.phase) {
          traj.events.push_back({s.t, s.phase, np});
          s.phase = np;
          s.umax = 0.0;
        }
        s.I = np == HJPhase::Persistent ? mn.rate(s.xbar, 0.0) : 0.0;
      }
    }
    record(s);
  }
  return traj;
}

}  // namespace diraclab
