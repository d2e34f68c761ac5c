#pragma once

#include <string>

#include "unfolding/germ.hpp"

namespace unfolding {

struct GammaResult {
  cplx value;
  bool pole = false;
};

// Lanczos approximation, reflection for Re z < 1/2.
GammaResult gamma_complex(cplx z);
// 1/Gamma(z), exactly zero at the poles.
cplx rgamma(cplx z);
// A logarithm of Gamma(z); branch unspecified, accurate for large |z|.
cplx lgamma_complex(cplx z);

// Period of x^n y^m for the model field with k = 1: coefficient times h^m.
struct PeriodTerm {
  int m = 1;
  cplx coefficient = 0.0;
  bool zero = false;  // Gamma(n + m mu) has a pole
  bool pole = false;  // a Gamma in the ratio hit a pole
  double error_estimate = 0.0;
  std::string route;
};

// s -> 0 limit: (-m)^{n+m mu} / Gamma(n + m mu).
PeriodTerm period_model_k1_limit(int n, int m, cplx mu0);

// Throws ArgumentError unless pi/4 < arg s < 7pi/4 and 2|s||mu| < 1.
void check_sector(cplx s, cplx mu);

PeriodTerm period_model_k1(int n, int m, cplx mu, cplx s);

struct QuadratureOptions {
  int M0 = 64;        // nodes per arc at the first pass
  int Mmax = 4096;    // give up beyond this
  double tol = 1e-9;  // relative change between successive doublings
};

// Contour-integral route in 50-digit arithmetic; independent of the Gamma formula.
PeriodTerm period_numeric_k1(int n, int m, cplx mu, cplx s, const QuadratureOptions& opt = {});

// Constant fixed once by matching the numeric route to the closed form at
// n = 0, m = 1, mu = 0.3 + 0.1i, s = 0.2i.
cplx period_normalization_constant();

// sum_n g_n period(n, m)
PeriodTerm period_poly(const CVec& g, int m, cplx mu, cplx s);

// -(1/d) log(1 + 2 pi i d t h^d) with t = period_poly(r, d) / d.
GermMap bernoulli_modulus(int d, const CVec& r, cplx mu, cplx s, int N);

// Coefficient r_d of x y^d whose Bernoulli modulus has dominant coefficient phi_d.
cplx invert_dominant(cplx phi_d, int d, cplx mu, cplx s);

}  // namespace unfolding
