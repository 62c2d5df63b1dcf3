#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "diraclab/errors.hpp"
#include "diraclab/polynomial.hpp"

namespace diraclab {

// Uniform 1-D discretization of the truncated trait domain [x_min, x_max].
struct TraitGrid {
  double x_min = -3.0;
  double x_max = 3.0;
  int n_points = 6001;
  double dx = 1e-3;

  static TraitGrid from_points(double x_min, double x_max, int n_points) {
    if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max))
      throw ConfigError("grid: x_min must be finite and < x_max");
    if (n_points < 3) throw ConfigError("grid: n_points must be >= 3");
    TraitGrid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n_points = n_points;
    g.dx = (x_max - x_min) / static_cast<double>(n_points - 1);
    return g;
  }

  // Picks the node count nearest to the requested step; the step must divide
  // the span to within 1e-9 relative.
  static TraitGrid from_step(double x_min, double x_max, double dx) {
    if (!(dx > 0.0)) throw ConfigError("grid: dx must be > 0");
    double span = x_max - x_min;
    auto intervals = static_cast<std::int64_t>(std::llround(span / dx));
    if (intervals < 2) throw ConfigError("grid: fewer than 3 nodes; shrink dx");
    if (std::abs(static_cast<double>(intervals) * dx - span) > 1e-9 * std::max(1.0, span))
      throw ConfigError("grid: dx does not divide the domain span");
    return from_points(x_min, x_max, static_cast<int>(intervals) + 1);
  }

  double x(int i) const { return x_min + i * dx; }
};

// Growth rate R(x, I) = a(x) - I with a polynomial trait dependence a(x).
// dR/dI = -1 for every supported form. Quadratic-concave models keep their
// (r, g, theta) parameters so that R = r - g (x - theta)^2 - I round-trips
// through the config format; general polynomials cover the separable-affine
// and custom forms.
class GrowthModel {
 public:
  enum class Form { Polynomial, Quadratic };

  static GrowthModel polynomial(Polynomial a) {
    GrowthModel m;
    m.form_ = Form::Polynomial;
    m.set_a(std::move(a));
    return m;
  }

  static GrowthModel quadratic(double r, double g, double theta) {
    if (!(g > 0.0)) throw ConfigError("model: quadratic form needs g > 0");
    GrowthModel m;
    m.form_ = Form::Quadratic;
    m.r_ = r;
    m.g_ = g;
    m.theta_ = theta;
    m.set_a(Polynomial({r - g * theta * theta, 2.0 * g * theta, -g}));
    return m;
  }

  double rate(double x, double I) const { return a_(x) - I; }
  double rate_dx(double x, double = 0.0) const { return da_(x); }
  double rate_dxx(double x, double = 0.0) const { return d2a_(x); }

  const Polynomial& a() const { return a_; }
  Form form() const { return form_; }
  double quad_r() const { return r_; }
  double quad_g() const { return g_; }
  double quad_theta() const { return theta_; }

 private:
  void set_a(Polynomial a) {
    da_ = a.derivative();
    d2a_ = da_.derivative();
    a_ = std::move(a);
  }

  Form form_ = Form::Polynomial;
  double r_ = 0.0, g_ = 0.0, theta_ = 0.0;
  Polynomial a_, da_, d2a_;
};

// Structural constants of the growth rate on the truncated domain:
//   R(x, I) <= K0                for 0 <= I <= 2 I_M,
//   R(x, I) >= -K2 - K3 |x|^2    for 0 <= I <= 2 I_M,
//   -K1 <= dR/dI <= -1/K1,       max_x R(x, I_M) = 0.
struct GrowthBounds {
  double K0 = 0.0;
  double K1 = 1.0;
  double K2 = 0.0;
  double K3 = 0.0;
  double I_M = 0.0;

  // Derives the constants analytically from the polynomial extrema on the
  // domain. When a(x) never turns positive there the zero-crossing I_M does
  // not exist and an operational cap must be supplied.
  static GrowthBounds derive(const GrowthModel& m, const TraitGrid& grid,
                             std::optional<double> cap = std::nullopt) {
    GrowthBounds b;
    auto amax = m.a().max_on(grid.x_min, grid.x_max);
    auto amin = m.a().min_on(grid.x_min, grid.x_max);
    b.K0 = amax.value;
    b.K1 = 1.0;
    if (cap) {
      if (!(*cap > 0.0)) throw ConfigError("bounds: I_M cap must be > 0");
      b.I_M = *cap;
    } else if (amax.value > 0.0) {
      b.I_M = amax.value;
    } else {
      throw ConfigError(
          "bounds: growth rate never positive on the domain; supply an I_M cap");
    }
    b.K2 = std::max(0.0, 2.0 * b.I_M - amin.value);
    b.K3 = 0.0;
    return b;
  }
};

// Concavity constants of the limit theory:
//   -2 K2_lower <= D^2 R <= -2 K2_upper < 0,
//   -2 L1_lower <= D^2 u0 <= -2 L1_upper < 0.
struct ConcavityConstants {
  double K2_lower = 0.0;
  double K2_upper = 0.0;
  double L1_lower = 0.0;
  double L1_upper = 0.0;

  void validate() const {
    if (!(K2_upper > 0.0) || !(L1_upper > 0.0))
      throw ConfigError("concavity: all constants must be > 0");
    if (K2_upper > K2_lower || L1_upper > L1_lower)
      throw ConfigError("concavity: upper constants cannot exceed lower ones");
  }
};

// Trait-dependent resource consumption rate psi, strictly positive on the
// domain. Every shipped preset uses the constant 1.
class ConsumptionWeight {
 public:
  static ConsumptionWeight constant(double value = 1.0) {
    if (!(value > 0.0)) throw ConfigError("psi: constant weight must be > 0");
    ConsumptionWeight w;
    w.constant_ = true;
    w.value_ = value;
    return w;
  }

  static ConsumptionWeight polynomial(Polynomial p) {
    ConsumptionWeight w;
    w.constant_ = false;
    w.p_ = std::move(p);
    return w;
  }

  double operator()(double x) const { return constant_ ? value_ : p_(x); }
  bool is_constant() const { return constant_; }
  double constant_value() const { return value_; }
  const Polynomial& poly() const { return p_; }

  struct Bounds {
    double psi_m, psi_M;
  };

  Bounds bounds_on(const TraitGrid& grid) const {
    if (constant_) return {value_, value_};
    double lo = p_.min_on(grid.x_min, grid.x_max).value;
    double hi = p_.max_on(grid.x_min, grid.x_max).value;
    if (!(lo > 0.0))
      throw ConfigError("psi: consumption weight must be strictly positive on the domain");
    return {lo, hi};
  }

 private:
  bool constant_ = true;
  double value_ = 1.0;
  Polynomial p_;
};

// Initial data n0, a nonnegative mixture of boxes and epsilon-width Gaussian
// spikes. Box components are sampled by cell averages, which makes their
// discrete trapezoid mass exact; Gaussian kinds are evaluated pointwise,
//   Gaussian:             mass/sqrt(2 pi eps) exp(-(x-center)^2 / (2 eps)),
//   GroundStateGaussian:  mass g^(1/4)/sqrt(2 pi eps) exp(-sqrt(g)(x-center)^2 / (2 eps)),
// then rescaled so each component's discrete mass equals the requested mass.
// A component whose mass is declared as "eps" carries mass eps at sampling
// time but still contributes its center to the zero set Gamma_0.
class InitialCondition {
 public:
  enum class Kind { Box, Gaussian, GroundStateGaussian };

  struct Component {
    Kind kind = Kind::Gaussian;
    double b = 0.0, c = 0.0;  // Box support
    double center = 0.0;      // Gaussian kinds
    double g = 1.0;           // GroundStateGaussian curvature
    double mass = 0.0;
    bool mass_is_epsilon = false;
  };

  static InitialCondition box(double b, double c, double mass) {
    Component comp;
    comp.kind = Kind::Box;
    comp.b = b;
    comp.c = c;
    comp.mass = mass;
    return mixture({comp});
  }

  static InitialCondition gaussian(double center, double mass, bool mass_is_epsilon = false) {
    Component comp;
    comp.kind = Kind::Gaussian;
    comp.center = center;
    comp.mass = mass;
    comp.mass_is_epsilon = mass_is_epsilon;
    return mixture({comp});
  }

  static InitialCondition ground_state_gaussian(double g, double center, double mass) {
    Component comp;
    comp.kind = Kind::GroundStateGaussian;
    comp.g = g;
    comp.center = center;
    comp.mass = mass;
    return mixture({comp});
  }

  static InitialCondition mixture(std::vector<Component> comps) {
    if (comps.empty()) throw ConfigError("ic: at least one component required");
    for (const Component& comp : comps) {
      if (!(comp.mass > 0.0)) throw ConfigError("ic: component mass must be > 0");
      if (comp.kind == Kind::Box && !(comp.b < comp.c))
        throw ConfigError("ic: box requires b < c");
      if (comp.kind == Kind::GroundStateGaussian && !(comp.g > 0.0))
        throw ConfigError("ic: ground-state curvature g must be > 0");
    }
    InitialCondition ic;
    ic.comps_ = std::move(comps);
    return ic;
  }

  const std::vector<Component>& components() const { return comps_; }

  std::vector<double> sample(const TraitGrid& grid, double eps) const;

  // Limit geometry used by the fate classifier. Point pieces have lo == hi.
  struct Piece {
    double lo, hi;
  };

  // epsilon-to-zero support: boxes and the centers of O(1)-mass spikes.
  std::vector<Piece> limit_support() const {
    std::vector<Piece> out;
    for (const Component& comp : comps_) {
      if (comp.mass_is_epsilon) continue;
      if (comp.kind == Kind::Box)
        out.push_back({comp.b, comp.c});
      else
        out.push_back({comp.center, comp.center});
    }
    return out;
  }

  // Zero set of u0: every component contributes, vanishing-mass spikes too.
  std::vector<Piece> gamma0() const {
    std::vector<Piece> out;
    for (const Component& comp : comps_) {
      if (comp.kind == Kind::Box)
        out.push_back({comp.b, comp.c});
      else
        out.push_back({comp.center, comp.center});
    }
    return out;
  }

 private:
  std::vector<Component> comps_;
};

inline std::vector<double> InitialCondition::sample(const TraitGrid& grid, double eps) const {
  if (!(eps > 0.0)) throw ConfigError("ic: sampling needs eps > 0");
  const int n = grid.n_points;
  std::vector<double> out(n, 0.0);
  std::vector<double> w(n);

  for (const Component& comp : comps_) {
    const double mass = comp.mass_is_epsilon ? comp.mass * eps : comp.mass;
    if (comp.kind == Kind::Box) {
      if (comp.c < grid.x_min || comp.b > grid.x_max)
        throw ConfigError("ic: box support lies outside the trait domain");
      const double height = mass / (comp.c - comp.b);
      for (int i = 0; i < n; ++i) {
        double lo = std::max(grid.x(i) - 0.5 * grid.dx, comp.b);
        double hi = std::min(grid.x(i) + 0.5 * grid.dx, comp.c);
        if (hi > lo) out[i] += height * (hi - lo) / grid.dx;
      }
    } else {
      if (comp.center < grid.x_min || comp.center > grid.x_max)
        throw ConfigError("ic: spike center lies outside the trait domain");
      const double curv = comp.kind == Kind::GroundStateGaussian ? std::sqrt(comp.g) : 1.0;
      double raw = 0.0;
      for (int i = 0; i < n; ++i) {
        double d = grid.x(i) - comp.center;
        w[i] = std::exp(-curv * d * d / (2.0 * eps));
        raw += (i == 0 || i == n - 1) ? 0.5 * w[i] : w[i];
      }
      raw *= grid.dx;
      if (!(raw > 0.0)) throw ConfigError("ic: spike mass vanished on the grid");
      const double scale = mass / raw;
      for (int i = 0; i < n; ++i) out[i] += scale * w[i];
    }
  }
  return out;
}

// Piecewise-constant environment: an ordered list of (t_start, model index)
// segments starting at t = 0, optionally repeated with period T. A switch
// instant belongs to the segment it opens (right-continuous).
class EnvironmentSchedule {
 public:
  struct Segment {
    double t_start;
    int model;  // 0-based index into the model table
  };

  static EnvironmentSchedule single(int model = 0) {
    return piecewise({Segment{0.0, model}}, std::nullopt);
  }

  static EnvironmentSchedule piecewise(std::vector<Segment> segments,
                                       std::optional<double> period) {
    if (segments.empty()) throw ConfigError("schedule: needs at least one segment");
    if (segments.front().t_start != 0.0)
      throw ConfigError("schedule: first segment must start at t = 0");
    for (std::size_t i = 0; i + 1 < segments.size(); ++i)
      if (!(segments[i].t_start < segments[i + 1].t_start))
        throw ConfigError("schedule: segment start times must be strictly increasing");
    for (const Segment& s : segments)
      if (s.model < 0) throw ConfigError("schedule: negative model index");
    if (period && !(*period > segments.back().t_start))
      throw ConfigError("schedule: period must exceed the last segment start");
    EnvironmentSchedule sched;
    sched.segments_ = std::move(segments);
    sched.period_ = period;
    return sched;
  }

  const std::vector<Segment>& segments() const { return segments_; }
  std::optional<double> period() const { return period_; }

  int max_model_index() const {
    int m = 0;
    for (const Segment& s : segments_) m = std::max(m, s.model);
    return m;
  }

  int model_at(double t) const {
    double tau = t;
    if (period_) {
      tau = std::fmod(t, *period_);
      if (tau < 0.0) tau += *period_;
    }
    int idx = 0;
    for (std::size_t i = 0; i < segments_.size(); ++i)
      if (segments_[i].t_start <= tau) idx = static_cast<int>(i);
    return segments_[idx].model;
  }

  // Earliest switch instant strictly after t and at most horizon, carrying
  // the identity of the segment it opens. Integrators land on the returned
  // time and take the model from here rather than re-deriving it from a
  // modulo of the (rounded) time, which is unreliable exactly at the switch.
  struct SwitchEvent {
    double t;
    int model;
  };

  std::optional<SwitchEvent> next_switch_after(double t, double horizon) const {
    SwitchEvent best{horizon + 1.0, 0};
    bool found = false;
    auto consider = [&](double cand, int model) {
      if (cand > t && cand <= horizon && cand < best.t) {
        best = {cand, model};
        found = true;
      }
    };
    if (!period_) {
      for (const Segment& s : segments_) consider(s.t_start, s.model);
    } else {
      double T = *period_;
      double k = std::floor(t / T);
      for (double kk : {k - 1.0, k, k + 1.0}) {
        if (kk < 0.0) continue;
        for (const Segment& s : segments_) consider(kk * T + s.t_start, s.model);
      }
    }
    if (!found) return std::nullopt;
    return best;
  }

 private:
  std::vector<Segment> segments_;
  std::optional<double> period_;
};

}  // namespace diraclab
