#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace diraclab {

// Dense univariate polynomial with coefficients in increasing degree order.
// Real roots on an interval are isolated by recursing on the derivative and
// bisecting each monotone piece, so touching (even-multiplicity) roots are
// picked up at the stationary points. Degrees in this project stay <= 5.
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  }

  static Polynomial constant(double v) { return Polynomial({v}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coeffs() const { return c_; }
  bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }

  double operator()(double x) const {
    double acc = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) acc = acc * x + c_[k];
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial({0.0});
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<double>(k);
    return Polynomial(std::move(d));
  }

  Polynomial minus(double v) const {
    std::vector<double> d = c_;
    d[0] -= v;
    return Polynomial(std::move(d));
  }

  // All real roots in [lo, hi], ascending, deduplicated.
  std::vector<double> roots_in(double lo, double hi) const;

  struct Extremum {
    double x;
    double value;
  };

  // Extrema over [lo, hi]: endpoints plus interior stationary points.
  // Ties resolve to the smaller x.
  Extremum max_on(double lo, double hi) const;
  Extremum min_on(double lo, double hi) const;

 private:
  // Magnitude scale of the polynomial on |x| <= X, used for zero tolerances.
  double value_scale(double X) const {
    double m = std::max(1.0, X);
    double s = 0.0, p = 1.0;
    for (double v : c_) {
      s += std::abs(v) * p;
      p *= m;
    }
    return std::max(s, 1.0);
  }

  std::vector<double> c_;
};

inline std::vector<double> Polynomial::roots_in(double lo, double hi) const {
  std::vector<double> out;
  if (!(lo <= hi)) return out;
  const int deg = degree();
  if (deg == 0) return out;
  if (deg == 1) {
    double r = -c_[0] / c_[1];
    if (r >= lo && r <= hi) out.push_back(r);
    return out;
  }

  std::vector<double> pts;
  pts.push_back(lo);
  for (double b : derivative().roots_in(lo, hi))
    if (b > lo && b < hi) pts.push_back(b);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());

  const double ftol = value_scale(std::max(std::abs(lo), std::abs(hi))) * 1e-13;
  auto push = [&](double r) {
    for (double e : out)
      if (std::abs(e - r) <= 1e-10 * std::max(1.0, std::abs(r))) return;
    out.push_back(r);
  };

  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double a = pts[k], b = pts[k + 1];
    double fa = (*this)(a), fb = (*this)(b);
    if (std::abs(fa) <= ftol) push(a);
    if (fa * fb < 0.0) {
      // monotone between consecutive stationary points
      for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        double fm = (*this)(m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fa < 0.0) == (fm < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      push(0.5 * (a + b));
    }
  }
  if (std::abs((*this)(pts.back())) <= ftol) push(pts.back());

  std::sort(out.begin(), out.end());
  return out;
}

inline Polynomial::Extremum Polynomial::max_on(double lo, double hi) const {
  std::vector<double> cand;
  cand.push_back(lo);
  if (hi > lo) {
    for (double b : derivative().roots_in(lo, hi))
      if (b > lo && b < hi) cand.push_back(b);
    cand.push_back(hi);
  }
  std::sort(cand.begin(), cand.end());
  Extremum best{cand.front(), (*this)(cand.front())};
  for (double x : cand) {
    double v = (*this)(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

inline Polynomial::Extremum Polynomial::min_on(double lo, double hi) const {
  std::vector<double> neg(c_);
  for (double& v : neg) v = -v;
  Extremum e = Polynomial(std::move(neg)).max_on(lo, hi);
  return {e.x, -e.value};
}

}  // namespace diraclab
