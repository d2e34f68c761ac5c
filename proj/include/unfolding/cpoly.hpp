#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace unfolding {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// P(x) = x^{k+1} + sum_{j<k} eps_j x^j. coeffs[i] multiplies x^i.
struct CPoly {
  int k = 1;
  CVec eps;
  CVec coeffs;

  cplx operator()(cplx x) const;
  cplx deriv(cplx x) const;
  CVec derivative_coeffs() const;
};

CPoly build_P(int k, const CVec& eps);

// max_j |eps_j|^{1/(k+1-j)}
double eps_norm(const CVec& eps);

// All roots lie in the disk of this radius.
double root_bound(const CVec& eps);
// 2 sqrt(k) |eps|, the disk radius used for sectors.
double rho_eps(const CVec& eps);
double default_tol_disc(const CVec& eps);

// k+1 roots with multiplicity, ordered by argument, then modulus, then real part.
CVec roots(const CPoly& p);
double min_root_gap(const CVec& rts);

CVec theta_action(int theta, const CVec& eps);

struct Rescaled {
  CVec eps;
  cplx x;
  cplx t;
};
Rescaled rescale(double lambda, const CVec& eps, cplx x, cplx t);

// 1/P'(r) aligned with roots(p).
CVec residues(const CPoly& p);
CVec residues(const CPoly& p, const CVec& rts);

// tol < 0 selects default_tol_disc.
bool in_discriminant(const CVec& eps, double tol = -1.0);

// Dense polynomial helpers, ascending coefficients.
cplx poly_eval(const CVec& c, cplx x);
CVec poly_add(const CVec& a, const CVec& b);
CVec poly_mul(const CVec& a, const CVec& b);
CVec poly_scale(const CVec& a, cplx s);
CVec poly_deriv(const CVec& a);
CVec poly_pow(const CVec& a, int n);
// Quotient and remainder of a by a monic polynomial.
std::pair<CVec, CVec> poly_divmod(const CVec& a, const CVec& monic);
void poly_trim(CVec& a);

}  // namespace unfolding
