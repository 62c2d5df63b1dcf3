#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "diraclab/diagnostics.hpp"
#include "diraclab/errors.hpp"
#include "diraclab/model.hpp"

namespace diraclab {

// Semi-implicit scheme for the rescaled selection-mutation equation
//   dt n - eps Lap n = (1/eps) n R(x, I(t)),   I = integral psi n dx.
// Diffusion and the linear reaction are implicit with the nonlocal term I
// frozen at the previous step, so each step is the tridiagonal solve
//   (1 + 2 L - q R(x_i, I^n)) n_i' - L (n_{i-1}' + n_{i+1}') = n_i,
// with L = eps dt/dx^2, q = dt/eps, and mirrored ghost nodes for the
// zero-flux boundary. While dt K0/eps < 1 the matrix is a strictly
// diagonally dominant M-matrix: the solve preserves positivity, and with the
// trapezoid quadrature the mirror rows conserve mass exactly when R = 0.

enum class BoundaryCondition { NeumannZeroFlux };

struct SolverConfig {
  double eps = 1e-3;
  double dt = 1e-4;
  double t_end = 10.0;
  TraitGrid grid;
  BoundaryCondition boundary = BoundaryCondition::NeumannZeroFlux;
  int snapshot_stride = 0;     // 0 = no snapshots
  double density_floor = 0.0;  // 0 = no floor
  double u_floor = -2.0;       // clamp for the recorded max-u observable

  void validate() const {
    if (!(eps > 0.0)) throw ConfigError("solver: eps must be > 0");
    if (!(dt > 0.0)) throw ConfigError("solver: dt must be > 0");
    if (!(t_end >= 0.0)) throw ConfigError("solver: t_end must be >= 0");
    if (snapshot_stride < 0) throw ConfigError("solver: snapshot_stride must be >= 0");
    if (density_floor < 0.0) throw ConfigError("solver: density_floor must be >= 0");
    if (!(u_floor < 0.0)) throw ConfigError("solver: u_floor must be < 0");
  }
};

struct SimState {
  double t = 0.0;
  std::vector<double> n;
  double I = 0.0;
  double rho = 0.0;
};

struct Trajectory {
  std::vector<double> times, rho, I, xbar, umax, J;
  struct Snapshot {
    double t;
    std::vector<double> n;
  };
  std::vector<Snapshot> snapshots;
  bool floor_applied = false;

  std::size_t size() const { return times.size(); }
};

inline double trapezoid(std::span<const double> f, double dx) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * dx;
}

inline double compute_rho(std::span<const double> n, const TraitGrid& grid) {
  return trapezoid(n, grid.dx);
}

inline double compute_I(std::span<const double> n, const ConsumptionWeight& psi,
                        const TraitGrid& grid) {
  if (psi.is_constant()) return psi.constant_value() * trapezoid(n, grid.dx);
  double s = 0.0;
  for (int i = 0; i < grid.n_points; ++i) {
    double term = psi(grid.x(i)) * n[i];
    s += (i == 0 || i == grid.n_points - 1) ? 0.5 * term : term;
  }
  return s * grid.dx;
}

inline SimState make_state(std::vector<double> n, const ConsumptionWeight& psi,
                           const TraitGrid& grid, double t = 0.0) {
  SimState s;
  s.t = t;
  s.n = std::move(n);
  s.rho = compute_rho(s.n, grid);
  s.I = compute_I(s.n, psi, grid);
  return s;
}

// Reusable stepping workspace: grid nodes, psi samples, the I-independent part
// of the diagonal, and the Thomas sweep buffers. One allocation-free sweep per
// step once warmed up.
class Stepper {
 public:
  Stepper(const SolverConfig& cfg, const ConsumptionWeight& psi) : cfg_(cfg), psi_(psi) {
    cfg_.validate();
    const int n = cfg_.grid.n_points;
    x_.resize(n);
    psi_v_.resize(n);
    base_.resize(n);
    cp_.resize(n);
    dp_.resize(n);
    for (int i = 0; i < n; ++i) {
      x_[i] = cfg_.grid.x(i);
      psi_v_[i] = psi_(x_[i]);
    }
  }

  const SolverConfig& config() const { return cfg_; }

  // Advances the state in place by dt_step with the reaction frozen at
  // competition level I_frozen. Throws NumericalError if the matrix loses
  // strict diagonal dominance or the solution stops being finite.
  void advance(SimState& s, const GrowthModel& model, double I_frozen, double dt_step,
               bool* floored = nullptr) {
    prepare(model, dt_step);
    const int n = cfg_.grid.n_points;
    if (static_cast<int>(s.n.size()) != n)
      throw ConfigError("solver: state size does not match the grid");

    // strict diagonal dominance <=> 1 - q max_i R(x_i, I) > 0
    if (1.0 - q_ * (amax_ - I_frozen) <= 0.0)
      throw NumericalError("solver: tridiagonal matrix lost strict diagonal dominance", s.t);

    const double qI = q_ * I_frozen;
    auto& v = s.n;

    double denom = base_[0] + qI;
    cp_[0] = -2.0 * lambda_ / denom;
    dp_[0] = v[0] / denom;
    for (int i = 1; i < n - 1; ++i) {
      denom = base_[i] + qI + lambda_ * cp_[i - 1];
      cp_[i] = -lambda_ / denom;
      dp_[i] = (v[i] + lambda_ * dp_[i - 1]) / denom;
    }
    denom = base_[n - 1] + qI + 2.0 * lambda_ * cp_[n - 2];
    v[n - 1] = (v[n - 1] + 2.0 * lambda_ * dp_[n - 2]) / denom;
    for (int i = n - 2; i >= 0; --i) v[i] = dp_[i] - cp_[i] * v[i + 1];

    if (cfg_.density_floor > 0.0) {
      for (double& e : v)
        if (e < cfg_.density_floor) {
          e = cfg_.density_floor;
          if (floored) *floored = true;
        }
    }

    s.t += dt_step;
    refresh(s);
  }

  // Recomputes the cached integrals and checks finiteness.
  void refresh(SimState& s) const {
    double rho = 0.0, I = 0.0;
    const int n = cfg_.grid.n_points;
    bool finite = true;
    for (int i = 0; i < n; ++i) {
      double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      finite = finite && std::isfinite(s.n[i]);
      rho += w * s.n[i];
      I += w * psi_v_[i] * s.n[i];
    }
    if (!finite)
      throw NumericalError("solver: non-finite density after the linear solve", s.t);
    s.rho = rho * cfg_.grid.dx;
    s.I = I * cfg_.grid.dx;
  }

  std::span<const double> psi_values() const { return psi_v_; }

 private:
  void prepare(const GrowthModel& model, double dt_step) {
    if (cur_model_ == &model && cur_dt_ == dt_step) return;
    cur_model_ = &model;
    cur_dt_ = dt_step;
    lambda_ = cfg_.eps * dt_step / (cfg_.grid.dx * cfg_.grid.dx);
    q_ = dt_step / cfg_.eps;
    const int n = cfg_.grid.n_points;
    const Polynomial& a = model.a();
    for (int i = 0; i < n; ++i) base_[i] = 1.0 + 2.0 * lambda_ - q_ * a(x_[i]);
    amax_ = a.max_on(cfg_.grid.x_min, cfg_.grid.x_max).value;
  }

  SolverConfig cfg_;
  ConsumptionWeight psi_;
  std::vector<double> x_, psi_v_, base_, cp_, dp_;
  const GrowthModel* cur_model_ = nullptr;
  double cur_dt_ = -1.0;
  double lambda_ = 0.0, q_ = 0.0, amax_ = 0.0;
};

// One scheme step with I frozen at the supplied level. Test hook: with a = 0
// and I_frozen = 0 the reaction vanishes exactly and the step is pure
// reflecting diffusion.
inline SimState step_with_frozen_I(const SimState& state, const SolverConfig& cfg,
                                   const GrowthModel& model, const ConsumptionWeight& psi,
                                   double I_frozen, double dt_step) {
  Stepper stepper(cfg, psi);
  SimState s = state;
  stepper.advance(s, model, I_frozen, dt_step);
  return s;
}

// One scheme step with I taken from the previous state.
inline SimState step(const SimState& state, const SolverConfig& cfg, const GrowthModel& model,
                     const ConsumptionWeight& psi) {
  return step_with_frozen_I(state, cfg, model, psi, state.I, cfg.dt);
}

namespace detail {

// Argmax observables straight from the density: u is only evaluated at the
// maximum node and its neighbours, which keeps the per-step cost flat.
inline void record_peak(const SimState& s, const SolverConfig& cfg, double& xbar, double& umax) {
  const auto& n = s.n;
  const int N = cfg.grid.n_points;
  int imax = 0;
  for (int i = 1; i < N; ++i)
    if (n[i] > n[imax]) imax = i;
  auto u_at = [&](int i) {
    return n[i] > 0.0 ? std::max(cfg.eps * std::log(n[i]), cfg.u_floor) : cfg.u_floor;
  };
  if (imax == 0 || imax == N - 1 || n[imax] <= 0.0) {
    xbar = cfg.grid.x(imax);
    umax = u_at(imax);
    return;
  }
  auto v = parabolic_vertex(cfg.grid.x(imax), cfg.grid.dx, u_at(imax - 1), u_at(imax),
                            u_at(imax + 1));
  xbar = v.x;
  umax = v.value;
}

}  // namespace detail

// Full run over [0, t_end]: iterates the scheme, lands exactly on every
// environment switch by shortening the final step before it, records the
// scalar observables at t = 0 and after every step, and stores density
// snapshots every snapshot_stride steps when requested.
inline Trajectory run(const SolverConfig& cfg, const std::vector<GrowthModel>& models,
                      const EnvironmentSchedule& schedule, const ConsumptionWeight& psi,
                      const InitialCondition& ic) {
  cfg.validate();
  if (models.empty()) throw ConfigError("run: empty model table");
  if (schedule.max_model_index() >= static_cast<int>(models.size()))
    throw ConfigError("run: schedule references a missing model");

  // Stability precondition dt K0/eps < 1 for every scheduled model, and the
  // cap used by the runtime boundedness check I <= 2 I_M.
  double I_cap = 0.0;
  for (const GrowthModel& m : models) {
    double K0 = m.a().max_on(cfg.grid.x_min, cfg.grid.x_max).value;
    if (cfg.dt * K0 / cfg.eps >= 1.0)
      throw ConfigError("run: dt*K0/eps >= 1; shrink dt or enlarge eps");
    double I_M = K0 > 0.0 ? K0 : 1.0;  // nonviable landscapes cannot grow I at all
    I_cap = std::max(I_cap, 2.0 * I_M);
  }

  Stepper stepper(cfg, psi);
  SimState s = make_state(ic.sample(cfg.grid, cfg.eps), psi, cfg.grid, 0.0);
  const double I_check = std::max(I_cap, 2.0 * s.I) * (1.0 + 1e-9);

  int mi = schedule.model_at(0.0);
  auto next_sw = schedule.next_switch_after(0.0, cfg.t_end);

  Trajectory traj;
  auto record = [&](const SimState& st) {
    traj.times.push_back(st.t);
    traj.rho.push_back(st.rho);
    traj.I.push_back(st.I);
    double xbar, umax;
    detail::record_peak(st, cfg, xbar, umax);
    traj.xbar.push_back(xbar);
    traj.umax.push_back(umax);
    traj.J.push_back(compute_J(st.n, models[mi], st.I, cfg.eps, psi, cfg.grid));
  };

  record(s);
  if (cfg.snapshot_stride > 0) traj.snapshots.push_back({s.t, s.n});

  long step_index = 0;
  const double t_tol = 1e-12 * std::max(1.0, cfg.t_end);
  while (s.t < cfg.t_end - t_tol) {
    double t_event = next_sw ? next_sw->t : cfg.t_end;

    double remaining = t_event - s.t;
    bool lands = remaining <= cfg.dt * (1.0 + 1e-9);
    double dt_step = lands ? remaining : cfg.dt;
    if (!(dt_step > 0.0))
      throw ConfigError("run: schedule produced a non-positive step; check switch times");

    bool floored = false;
    stepper.advance(s, models[mi], s.I, dt_step, &floored);
    if (floored) traj.floor_applied = true;
    if (lands) {
      s.t = t_event;  // kill accumulated roundoff at event times
      if (next_sw && t_event == next_sw->t) {
        mi = next_sw->model;  // switch instants belong to the new segment
        next_sw = schedule.next_switch_after(s.t, cfg.t_end);
      }
    }

    if (s.I > I_check)
      throw NumericalError("run: competition level exceeded the 2*I_M bound", s.t);

    ++step_index;
    record(s);
    if (cfg.snapshot_stride > 0 && step_index % cfg.snapshot_stride == 0)
      traj.snapshots.push_back({s.t, s.n});
  }
  return traj;
}

inline Trajectory run(const SolverConfig& cfg, const GrowthModel& model,
                      const ConsumptionWeight& psi, const InitialCondition& ic) {
  return run(cfg, std::vector<GrowthModel>{model}, EnvironmentSchedule::single(0), psi, ic);
}

}  // namespace diraclab
