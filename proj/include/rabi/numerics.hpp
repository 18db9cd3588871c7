#pragma once

// Small one-dimensional numerical kernels shared by the modules: bounded
// minimization (Brent), root bisection and adaptive Gauss-Kronrod quadrature.

#include "rabi/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace rabi::numerics {

struct MinimizeResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

/// Brent's method (golden section + parabolic interpolation) on [lo, hi].
/// Converges when the bracket half-width drops below rel_tol*|x| + abs_tol.
template <typename F>
MinimizeResult minimize_bounded(F&& f, double lo, double hi, double rel_tol = 1e-10,
                                double abs_tol = 1e-14, int max_iter = 500) {
  constexpr double kGolden = 0.3819660112501051;
  double a = std::min(lo, hi), b = std::max(lo, hi);
  double x = a + kGolden * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const double mid = 0.5 * (a + b);
    const double tol1 = rel_tol * std::abs(x) + abs_tol;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) return {x, fx, it};

    bool golden = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (x < mid) ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x >= mid) ? a - x : b - x;
      d = kGolden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      (u >= x ? a : b) = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  throw NumericalError("minimize_bounded: no convergence after " + std::to_string(max_iter) +
                       " iterations");
}

/// Bisection for a sign change of f on [lo, hi].
template <typename F>
double bisect_root(F&& f, double lo, double hi, double abs_tol = 1e-13, int max_iter = 200) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    throw NumericalError("bisect_root: root not bracketed on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  for (int it = 0; it < max_iter && hi - lo > abs_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
std::pair<double, double> gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive G7-K15 quadrature: bisects the interval with the
/// largest error estimate until the total error is below
/// max(abs_tol, rel_tol*|I|). Throws NumericalError on non-convergence.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                                    double abs_tol = 0.0, int max_intervals = 2000) {
  struct Segment {
    double a, b, value, error;
  };
  if (a == b) return {};
  std::vector<Segment> segments;
  auto [v0, e0] = detail::gauss_kronrod_15(f, a, b);
  segments.push_back({a, b, v0, e0});
  double total = v0, error = e0;
  while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (static_cast<int>(segments.size()) >= max_intervals)
      throw NumericalError("integrate_adaptive: tolerance not reached with " +
                           std::to_string(max_intervals) + " intervals (achieved error " +
                           std::to_string(error) + ", value " + std::to_string(total) + ")");
    auto worst = std::max_element(segments.begin(), segments.end(),
                                  [](const Segment& x, const Segment& y) { return x.error < y.error; });
    const Segment s = *worst;
    const double mid = 0.5 * (s.a + s.b);
    auto [vl, el] = detail::gauss_kronrod_15(f, s.a, mid);
    auto [vr, er] = detail::gauss_kronrod_15(f, mid, s.b);
    *worst = {s.a, mid, vl, el};
    segments.push_back({mid, s.b, vr, er});
    total = 0.0;
    error = 0.0;
    for (const auto& seg : segments) {
      total += seg.value;
      error += seg.error;
    }
  }
  return {total, error, static_cast<int>(segments.size())};
}

}  // namespace rabi::numerics
