#pragma once

// Independent reference computations shared by the unit tests and the acceptance run.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

using cplx = std::complex<double>;

// Holonomy of y' = (y (1 + mu x) + r x y^{d+1}) / (x^2 - s^2) along x = x_star e^{2 pi i u},
// through the linear equation for w = y^{-d}:
//   (w E)' = -d r E x / P,  E = exp(d (L(x) - L(x_star))),  L' = (1 + mu x) / P,
// with L = a log(x - s) + b log(x + s) continued along the circle.
inline cplx bernoulli_holonomy_k1(cplx s, cplx mu, cplx r, int d, double x_star, cplx y0) {
  const double pi = std::numbers::pi;
  const cplx I(0, 1);
  const cplx a = (1.0 + mu * s) / (2.0 * s), b = -(1.0 - mu * s) / (2.0 * s);
  auto L = [&](double u) {
    const cplx e = std::exp(-2.0 * pi * I * u);
    const cplx base = std::log(x_star) + 2.0 * pi * I * u;
    return a * (base + std::log(1.0 - s * e / x_star)) + b * (base + std::log(1.0 + s * e / x_star));
  };
  const cplx L0 = L(0.0);
  auto integrand = [&](double u) {
    const cplx x = x_star * std::exp(2.0 * pi * I * u);
    const cplx dx = 2.0 * pi * I * x;
    return std::exp(double(d) * (L(u) - L0)) * x / (x * x - s * s) * dx;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double re = GK::integrate([&](double u) { return integrand(u).real(); }, 0.0, 1.0, 12, 1e-15);
  const double im = GK::integrate([&](double u) { return integrand(u).imag(); }, 0.0, 1.0, 12, 1e-15);
  const cplx J(re, im);
  const cplx w0 = std::pow(y0, -d);
  const cplx w1 = std::exp(-2.0 * pi * I * double(d) * mu) * (w0 - double(d) * r * J);
  // the branch of w^{-1/d} continuing y0 e^{2 pi i mu}
  const cplx guess = y0 * std::exp(2.0 * pi * I * mu);
  cplx best = 0.0;
  double dist = INFINITY;
  for (int j = 0; j < d; ++j) {
    const cplx c = std::pow(w1, -1.0 / d) * std::polar(1.0, 2 * pi * j / d);
    if (std::abs(c - guess) < dist) {
      dist = std::abs(c - guess);
      best = c;
    }
  }
  return best;
}

// Model first integral hhat(x) = exp(-a log(x - s) - b log(x + s)) of P = x^2 - s^2, principal logs.
inline cplx model_first_integral_k1(cplx s, cplx mu, cplx x) {
  const cplx a = (1.0 + mu * s) / (2.0 * s), b = -(1.0 - mu * s) / (2.0 * s);
  return std::exp(-a * std::log(x - s) - b * std::log(x + s));
}

// F(x_star) = int hhat^{-d}(z) z / P(z) dz from the root -s to x_star: a logarithmic spiral
// z = -s + (z0 + s) e^{w t}, t <= 0, along which hhat^{-d} decays, then the segment z0 -> x_star.
// -s is the node-type root of the sector continued from arg s = pi. With F,
// H = hhat y (1 + d r F hhat^d y^d)^{-1/d} is the first integral of
// y' = (y (1 + mu x) + r x y^{d+1}) / P that stays bounded along the spiral.
inline cplx bernoulli_node_primitive_k1(cplx s, cplx mu, int d, double x_star) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const cplx a = (1.0 + mu * s) / (2.0 * s), b = -(1.0 - mu * s) / (2.0 * s);
  const cplx ea = double(d) * a, eb = double(d) * b;  // hhat^{-d} = (z - s)^{ea} (z + s)^{eb}
  // logs continued from their principal values at x_star; the segment subtends less than pi
  const cplx xs(x_star, 0.0);
  auto seg_log = [&](cplx z, cplx c) { return std::log(xs - c) + std::log((z - c) / (xs - c)); };
  auto integrate = [&](auto&& f, double lo, double hi) {
    const double re = GK::integrate([&](double t) { return f(t).real(); }, lo, hi, 15, 1e-15);
    const double im = GK::integrate([&](double t) { return f(t).imag(); }, lo, hi, 15, 1e-15);
    return cplx(re, im);
  };
  const cplx z0 = -s + 0.4 * std::abs(s) * (xs + s) / std::abs(xs + s);
  const cplx seg = integrate(
      [&](double t) {
        const cplx z = z0 + t * (xs - z0);
        return std::exp((ea - 1.0) * seg_log(z, s) + (eb - 1.0) * seg_log(z, -s)) * z * (xs - z0);
      },
      0.0, 1.0);
  // w = e^{i phi} with Re w > 0 and Re(eb w) > 0
  const cplx w = std::polar(1.0, -std::arg(eb) / 2.0);
  const double rate = (eb * w).real();
  const cplx l0p = seg_log(z0, -s), l0m = seg_log(z0, s);
  const cplx spiral = integrate(
      [&](double t) {
        const cplx zp = (z0 + s) * std::exp(w * t), z = -s + zp;
        const cplx lm = l0m + std::log(1.0 + (z - z0) / (z0 - s));
        return std::exp(eb * (l0p + w * t) + (ea - 1.0) * lm) * z * w;
      },
      -40.0 / rate, 0.0);
  return seg + spiral;
}

}  // namespace oracle
