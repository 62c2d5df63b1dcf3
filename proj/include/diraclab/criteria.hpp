#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "diraclab/diagnostics.hpp"
#include "diraclab/model.hpp"
#include "diraclab/solver.hpp"

namespace diraclab {

// Initial-data classification of the asymptotic fate. The verdict depends
// only on where the limit support of n0 and the zero set Gamma_0 of u0 sit
// relative to the viability set {R(., 0) > 0}:
//   Persistence         supp n0 meets {R(., 0) > 0},
//   ExtinctionInterval  Gamma_0 inside {R(., 0) <= -C} for some C > 0,
//   ExtinctionPoint     Gamma_0 inside {R(., 0) <= 0}, touching 0 somewhere,
//   Critical            Gamma_0 inside {R(., 0) = 0} (fate not identifiable),
//   Unclassified        supp n0 nonviable but Gamma_0 meets {R(., 0) > 0}
//                       through a vanishing-mass spike (no verdict).
enum class FateTag { Persistence, ExtinctionInterval, ExtinctionPoint, Critical, Unclassified };

inline const char* to_string(FateTag t) {
  switch (t) {
    case FateTag::Persistence: return "Persistence";
    case FateTag::ExtinctionInterval: return "ExtinctionInterval";
    case FateTag::ExtinctionPoint: return "ExtinctionPoint";
    case FateTag::Critical: return "Critical";
    case FateTag::Unclassified: return "Unclassified";
  }
  return "?";
}

struct FateClass {
  FateTag tag = FateTag::Unclassified;
  std::string witness;  // interval or point supporting the verdict
  double margin = 0.0;  // C > 0 for ExtinctionInterval
};

struct ClassifierTolerances {
  // Separates strictly negative growth from values touching zero; roots are
  // located analytically so the margin stays sharp.
  double margin = 1e-6;
};

// Maximal open intervals of the viability set {x in domain : R(x, I) > 0}.
inline std::vector<Interval> omega_set(const GrowthModel& model, double I,
                                       const TraitGrid& grid) {
  Polynomial p = model.a().minus(I);
  std::vector<double> cuts = p.roots_in(grid.x_min, grid.x_max);
  std::vector<double> pts;
  pts.push_back(grid.x_min);
  for (double r : cuts)
    if (r > grid.x_min && r < grid.x_max) pts.push_back(r);
  pts.push_back(grid.x_max);

  std::vector<Interval> out;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if (p(0.5 * (pts[k] + pts[k + 1])) > 0.0) out.push_back({pts[k], pts[k + 1]});
  }
  return out;
}

namespace detail {

inline std::string format_piece(const InitialCondition::Piece& p) {
  auto num = [](double v) {
    std::string s = std::to_string(v);
    while (s.find('.') != std::string::npos && (s.back() == '0')) s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  if (p.lo == p.hi) return "x=" + num(p.lo);
  return "(" + num(p.lo) + ", " + num(p.hi) + ")";
}

}  // namespace detail

inline FateClass classify_initial(const InitialCondition& ic, const GrowthModel& model,
                                  double /*eps*/, const TraitGrid& grid,
                                  ClassifierTolerances tol = {}) {
  const Polynomial& a = model.a();

  auto range_on = [&](const InitialCondition::Piece& p) {
    double lo = std::max(p.lo, grid.x_min), hi = std::min(p.hi, grid.x_max);
    if (lo > hi) throw ConfigError("classify: initial support outside the trait domain");
    if (lo == hi) {
      double v = a(lo);
      return std::pair<double, double>{v, v};
    }
    return std::pair<double, double>{a.min_on(lo, hi).value, a.max_on(lo, hi).value};
  };

  // Persistence: some O(1)-mass piece reaches positive growth at I = 0.
  for (const auto& piece : ic.limit_support()) {
    auto [mn, mx] = range_on(piece);
    (void)mn;
    if (mx > 0.0) {
      std::string witness;
      if (piece.lo == piece.hi) {
        witness = detail::format_piece(piece);
      } else {
        for (const Interval& om : omega_set(model, 0.0, grid)) {
          double lo = std::max(piece.lo, om.lo), hi = std::min(piece.hi, om.hi);
          if (lo < hi) {
            witness = detail::format_piece({lo, hi});
            break;
          }
        }
      }
      return {FateTag::Persistence, witness, 0.0};
    }
  }

  // The support is nonviable from here on; look at all of Gamma_0.
  double gmax = -std::numeric_limits<double>::infinity();
  double gmin = std::numeric_limits<double>::infinity();
  InitialCondition::Piece best{0.0, 0.0};
  for (const auto& piece : ic.gamma0()) {
    auto [mn, mx] = range_on(piece);
    if (mx > gmax) {
      gmax = mx;
      best = piece;
    }
    gmin = std::min(gmin, mn);
  }

  if (gmax > 0.0) {
    // a vanishing-mass spike sits on viable traits: no verdict
    return {FateTag::Unclassified, detail::format_piece(best), 0.0};
  }
  if (gmax <= -tol.margin) {
    return {FateTag::ExtinctionInterval, detail::format_piece(best), -gmax};
  }
  if (gmin >= -tol.margin) {
    // all of Gamma_0 touches zero: the fate cannot be identified
    return {FateTag::Critical, detail::format_piece(best), 0.0};
  }
  return {FateTag::ExtinctionPoint, detail::format_piece(best), 0.0};
}

// Empirical lower bound of the competition level over [0, T].
inline double numeric_persistence_floor(const Trajectory& traj, double T) {
  if (traj.times.empty()) throw std::invalid_argument("persistence_floor: empty trajectory");
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] > T + 1e-12) break;
    m = std::min(m, traj.I[i]);
  }
  if (!std::isfinite(m)) throw std::invalid_argument("persistence_floor: trajectory starts after T");
  return m;
}

}  // namespace diraclab
