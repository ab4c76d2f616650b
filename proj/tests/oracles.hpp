#pragma once

// Brute-force reference implementations, written straight from the defining
// sums without any caching or algebraic rearrangement. Test code only.

#include "fracdrift/sde.hpp"
#include "fracdrift/types.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Path = std::vector<double>;
using Paths = std::vector<Path>;

inline double DN(const Paths& x, const fracdrift::DriftModel& m, double T) {
  const int nu = static_cast<int>(x[0].size()) - 1;
  const double dt = T / nu;
  double s = 0.0;
  for (const Path& p : x)
    for (int j = 0; j < nu; ++j) s += std::pow(m.b(p[j]), 2) * dt;
  return s / (x.size() * T);
}

inline double IN(const Paths& x, const fracdrift::DriftModel& m, double T, double dn) {
  double s = 0.0;
  for (const Path& p : x) s += m.antiderivative(p.back()) - m.antiderivative(p.front());
  return s / (x.size() * T * dn);
}

/// ∫_{t_l}^{t_j} b'(X_u) du as a left-point sum recomputed for each pair.
inline double inner_integral(const Path& p, const fracdrift::DriftModel& m, int l, int j, double dt) {
  double s = 0.0;
  for (int u = l; u < j; ++u) s += m.b_prime(p[u]) * dt;
  return s;
}

inline double phi(double r, const Paths& x, const fracdrift::DriftModel& m, double T, double H,
                  double sigma, double dn, double in) {
  const int nu = static_cast<int>(x[0].size()) - 1;
  const double dt = T / nu;
  const double alpha = H * (2 * H - 1);
  double s = 0.0;
  for (const Path& p : x)
    for (int j = 1; j <= nu; ++j)
      for (int l = 0; l < j; ++l) {
        const double tj = j * dt, tl = l * dt;
        s += m.b_prime(p[j]) * std::exp((r + in) * inner_integral(p, m, l, j, dt)) *
             std::pow(tj - tl, 2 * H - 2) * dt * dt;
      }
  return -alpha * sigma * sigma / (x.size() * T * dn) * s;
}

/// Ȳ_N with the quadruple sum enumerated term by term.
inline double ybar(const Paths& x, const fracdrift::DriftModel& m, double T, double H, double sigma) {
  const int nu = static_cast<int>(x[0].size()) - 1;
  const double dt = T / nu;
  const double alpha = H * (2 * H - 1);
  double total = 0.0;
  for (const Path& p : x) {
    double dbl = 0.0;
    for (int s = 0; s < nu; ++s)
      for (int t = 0; t < nu; ++t)
        if (s != t)
          dbl += std::abs(m.b(p[s])) * std::abs(m.b(p[t])) * std::pow(std::abs(t - s) * dt, 2 * H - 2) *
                 dt * dt;
    double quad = 0.0;
    for (int u = 1; u <= nu; ++u)
      for (int v = 1; v <= nu; ++v)
        for (int up = 0; up < u; ++up)
          for (int vp = 0; vp < v; ++vp)
            quad += std::pow((u - up) * dt, 2 * H - 2) * std::pow((v - vp) * dt, 2 * H - 2) *
                    m.b_prime(p[v]) * m.b_prime(p[u]) * std::pow(dt, 4);
    total += alpha * dbl + alpha * alpha * sigma * sigma * quad;
  }
  return sigma * sigma / (x.size() * T * T) * total;
}

struct Bm {
  double dn, vn, theta, ybar;
};

inline Bm bm(const Paths& x, const fracdrift::DriftModel& m, const std::function<double(double)>& vol,
             double T) {
  const int nu = static_cast<int>(x[0].size()) - 1;
  const double dt = T / nu;
  double d = 0.0, v = 0.0, y = 0.0;
  for (const Path& p : x)
    for (int j = 0; j < nu; ++j) {
      d += m.b(p[j]) * m.b(p[j]) * dt;
      v += m.b(p[j]) * (p[j + 1] - p[j]);
      y += m.b(p[j]) * m.b(p[j]) * vol(p[j]) * vol(p[j]) * dt;
    }
  const double n = x.size();
  return Bm{d / (n * T), v / (n * T), v / d, y / (n * T * T)};
}

/// Root of r - f(r) on [lo, hi] by bisection to machine resolution.
template <typename F>
double bisect_fixed_point(F&& f, double lo, double hi) {
  double glo = lo - f(lo);
  for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double g = mid - f(mid);
    if ((g < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = g;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline fracdrift::PathBundle to_bundle(const Paths& x, double T) {
  const int nu = static_cast<int>(x[0].size()) - 1;
  fracdrift::RowMatrix v(static_cast<Eigen::Index>(x.size()), nu + 1);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int j = 0; j <= nu; ++j) v(static_cast<Eigen::Index>(i), j) = x[i][j];
  return fracdrift::PathBundle(fracdrift::Grid(T, nu), v, fracdrift::BundleKind::solution);
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace oracle
