#pragma once

#include <cmath>
#include <utility>

namespace alloy1d::detail {

/// Root of f in [a, b] given f(a) f(b) <= 0, to bracket width tol.
template <class F>
double bisect(F&& f, double a, double b, double tol) {
  double fa = f(a);
  if (fa == 0.0) return a;
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

struct Extremum {
  double x;
  double value;
};

/// Golden-section minimisation of a unimodal f on [a, b] to width tol.
template <class F>
Extremum golden_min(F&& f, double a, double b, double tol) {
  constexpr double r = 0.6180339887498949;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 300 && b - a > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? Extremum{c, fc} : Extremum{d, fd};
}

template <class F>
Extremum golden_max(F&& f, double a, double b, double tol) {
  Extremum e = golden_min([&f](double x) { return -f(x); }, a, b, tol);
  return {e.x, -e.value};
}

}  // namespace alloy1d::detail
