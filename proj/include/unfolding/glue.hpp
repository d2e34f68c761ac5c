#pragma once

#include <functional>
#include <string>
#include <vector>

#include "unfolding/dynamics.hpp"
#include "unfolding/germ.hpp"
#include "unfolding/series.hpp"

namespace unfolding {

// Charts |x| < rho0 and |u| < rho_inf glued by u = 1/x over the annulus 1/rho0 < |u| < rho_inf.
struct GlueConfig {
  double rho0 = 2.0;
  double rho_inf = 2.0;
  double r = 0.05;   // fiber radius of the solution charts
  double eta = 0.5;  // fiber radius where phi is known
  int M = 256;       // trapezoid nodes per circle
  int L = 32;        // nodes on the fiber circle |v| = r
  int ny = 12;       // kept v-degrees
  int max_iter = 40;
  double tol = 1e-8;

  double K() const;
  void validate() const;
};

enum class ContourRole { circle_rho0, circle_rhoinf, gamma_plus, gamma_minus, pochhammer };
std::string to_string(ContourRole r);

// Oriented quadrature nodes: integral of f dz ~ sum f(nodes[i]) weights[i].
struct Contour {
  ContourRole role = ContourRole::circle_rhoinf;
  CVec nodes;
  CVec weights;
};

// Counterclockwise trapezoid rule on |z| = radius.
Contour circle_contour(double radius, int M, ContourRole role);

// f(u, v) = sum_{n=1}^{ny} sum_{p >= 0} c[n][p] u^p v^n; c[0] is unused.
struct ChartFunction {
  std::vector<CVec> c;

  static ChartFunction zero(int ny, int P);
  int ny() const { return static_cast<int>(c.size()) - 1; }
  cplx operator()(cplx u, cplx v) const;
  // sup of |f| on |u| = radius_u, |v| = radius_v
  double sup(double radius_u, double radius_v, int nu = 64, int nv = 16) const;
};

double sup_diff(const ChartFunction& a, const ChartFunction& b, double radius_u, double radius_v);

using AnnulusFunction = std::function<cplx(cplx u, cplx v)>;

// +1 when the literal counterclockwise Cauchy-Heine pair satisfies F0(1/u) - Finf(u) = phi,
// -1 when both circles must be reversed; fixed once on the probe phi = v.
int cauchy_heine_orientation();

struct CousinPair {
  ChartFunction F0, Finf;
  double phi_norm = 0.0;  // sup |phi / v| on the annulus boundary, |v| = eta
  double psi_norm = 0.0;  // sup |psi| on |u| = rho_inf, |v| = r
  double F0_norm = 0.0, Finf_norm = 0.0;
  double bound = 0.0;     // r K |phi|' exp |psi|
};

double prime_norm(const AnnulusFunction& phi, const GlueConfig& cfg);

// Throws ArgumentError when v exp(psi) leaves the disk of radius eta.
CousinPair cauchy_heine_pair(const AnnulusFunction& phi, const ChartFunction& psi, const GlueConfig& cfg);

// max |F0(1/u, v) - Finf(u, v) - phi(u, v exp psi(u, v))| over annulus test points.
double cousin_residual(const AnnulusFunction& phi, const ChartFunction& psi, const CousinPair& pair,
                       const GlueConfig& cfg);

struct SavelevResult {
  ChartFunction psi0, psi_inf;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> changes;        // sup change per iteration
  std::vector<double> low_changes;    // change in v-degrees <= n at iteration n
  std::vector<double> norms;          // sup |psi_inf| per iteration
  double norm_bound = 0.0;            // eta K |phi|'
};

// Throws ArgumentError if r > eta exp(-eta K |phi|'), GluingError on divergence.
SavelevResult savelev_iterate(const AnnulusFunction& phi, const GlueConfig& cfg);

// ---- k = 1 realization ----

struct RealizeConfig {
  double rho = 0.5;          // disk of the squid sectors
  double nu = 0.0;           // spiral slope of the unbounded boundary parts
  int ny = 6;                // y-orders of N
  double tol = 1e-3;         // tol_realize
  double panel = 0.1;        // spiral panel width in log-radius (8-point Gauss per panel)
  double tail = 1e-14;       // spiral truncation: |Hhat| below tail times its scale
  double anchor_angle = 0.0; // Hhat(x_*, 1) uses principal logarithms at x_* = rho e^{i angle}
};

// Sectorial correction N = sum_n N_n(x) y^n of the model first integral, H = Hhat exp N, with
// the saddle part S between gamma_lo and gamma_hi. On S there are two determinations with
// N_hi - N_lo = phi(H_lo) and Hhat_hi = Hhat_lo e^{2 pi i mu}.
struct Realization {
  CPoly p;
  cplx mu = 0.0;
  GermMap phi;
  int ny = 0;
  Contour gamma_lo, gamma_hi;
  std::vector<CVec> g_lo, g_hi;  // g_n = [phi(H_lo)]_{y^n} at the nodes, n = 1..ny
  CVec lhat_lo, lhat_hi;         // log Hhat_lo(z, 1) at the nodes
  double omega = 1.0;
  cplx anchor = 0.0;
  Curve loop;                    // closed polygon around S
  double band_lo = 0.0, band_hi = 0.0;  // angular opening of S on the circle rho

  bool in_saddle_part(cplx x) const;
  // log Hhat(x, 1): along the circle rho from the anchor, then radially. On S, `hi` selects the sheet.
  cplx log_hhat(cplx x, bool hi = false) const;
  // y-coefficients 1..ny (index n-1) of N and dN/dx.
  CVec N(cplx x, bool hi = false) const;
  CVec dN(cplx x, bool hi = false) const;
  // H(x, y) through order ny in y: y-coefficients 1..ny.
  CVec H(cplx x, bool hi = false) const;
};

// Throws ContourError when Hhat does not decay along a spiral, ArgumentError for k != 1.
Realization realize_k1(const GermMap& phi, cplx mu, cplx s, const RealizeConfig& cfg = {});

// max |N_hi - N_lo - phi(H_lo)| (summed at |y| = y_abs) over sample points in S.
double realization_cousin_residual(const Realization& re, double y_abs);
// max |H_hi - H_lo exp(2 pi i mu + phi(H_lo))| / |H_lo| at sample points in S.
double realization_transition_residual(const Realization& re, double y_abs);

struct SynthesizedR {
  std::vector<CVec> coeffs;  // coeffs[n-1][i]: coefficient of x^i y^n, i <= k, as realized
  double fit_residual = 0.0;
  double overlap_defect = 0.0;
  double derivative_bound = 0.0;  // max of |y dN/dy|, |x dN/dx| at the samples, |y| = y_abs
  // k = 1: the fiber change Y = y e^{a(y)} removing the x^0 terms, and the resulting
  // R = x sum_n section[n-1] Y^n.
  GermMap fiber;
  CVec section;

  // Monomials of the section form (i >= 1), usable in UnfoldingField.
  std::vector<RMonomial> monomials(double drop_below = 0.0) const;
};

// R = -(P dN/dx + y (1 + mu x) dN/dy) / (1 + y dN/dy), fitted per y-degree by a polynomial of degree
// <= k. Throws ArgumentError when the derivative bound exceeds 1/3, GluingError when the two
// determinations on S disagree beyond tol.
SynthesizedR synthesize_R(const Realization& re, double tol = 1e-3, double y_abs = 0.05);

}  // namespace unfolding
