#include "unfolding/cpoly.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <sstream>

#include "unfolding/errors.hpp"

namespace unfolding {

namespace {

constexpr double kPi = std::numbers::pi;

double horner_abs(const CVec& c, double r) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

// Replace clusters that are numerically a multiple root by one repeated value.
void merge_multiple(const CPoly& p, CVec& z) {
  const int n = static_cast<int>(z.size());
  const CVec dp = p.derivative_coeffs();
  const double scale = std::max(1.0, root_bound(p.eps));
  std::vector<int> group(n);
  for (int i = 0; i < n; ++i) group[i] = i;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(z[i] - z[j]) < 1e-6 * scale) {
        int gi = group[i], gj = group[j];
        for (int& g : group)
          if (g == gj) g = gi;
      }
  for (int g = 0; g < n; ++g) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (group[i] == g) idx.push_back(i);
    if (idx.size() < 2) continue;
    cplx a = 0.0;
    for (int i : idx) a += z[i];
    a /= static_cast<double>(idx.size());
    // Newton on P' from the cluster mean.
    const CVec ddp = poly_deriv(dp);
    for (int it = 0; it < 20; ++it) {
      cplx d2 = poly_eval(ddp, a);
      if (d2 == 0.0) break;
      cplx step = poly_eval(dp, a) / d2;
      a -= step;
      if (std::abs(step) < 1e-16 * scale) break;
    }
    const double roundoff = 100.0 * DBL_EPSILON * horner_abs(p.coeffs, std::abs(a));
    if (std::abs(p(a)) <= roundoff)
      for (int i : idx) z[i] = a;
  }
}

}  // namespace

cplx CPoly::operator()(cplx x) const { return poly_eval(coeffs, x); }

cplx CPoly::deriv(cplx x) const {
  cplx acc = 0.0;
  for (int i = static_cast<int>(coeffs.size()) - 1; i >= 1; --i) acc = acc * x + coeffs[i] * double(i);
  return acc;
}

CVec CPoly::derivative_coeffs() const { return poly_deriv(coeffs); }

CPoly build_P(int k, const CVec& eps) {
  if (k < 1) throw ArgumentError("build_P: k must be >= 1");
  if (static_cast<int>(eps.size()) != k) {
    std::ostringstream os;
    os << "build_P: expected " << k << " parameters, got " << eps.size();
    throw ArgumentError(os.str());
  }
  CPoly p;
  p.k = k;
  p.eps = eps;
  p.coeffs.assign(k + 2, 0.0);
  for (int j = 0; j < k; ++j) p.coeffs[j] = eps[j];
  p.coeffs[k + 1] = 1.0;
  return p;
}

double eps_norm(const CVec& eps) {
  const int k = static_cast<int>(eps.size());
  double r = 0.0;
  for (int j = 0; j < k; ++j) r = std::max(r, std::pow(std::abs(eps[j]), 1.0 / (k + 1 - j)));
  return r;
}

double root_bound(const CVec& eps) { return std::sqrt(double(eps.size())) * eps_norm(eps); }

double rho_eps(const CVec& eps) { return 2.0 * root_bound(eps); }

double default_tol_disc(const CVec& eps) { return 1e-8 * std::max(1.0, eps_norm(eps)); }

CVec roots(const CPoly& p) {
  const int n = p.k + 1;
  const double nrm = eps_norm(p.eps);
  if (nrm == 0.0) return CVec(n, cplx(0.0, 0.0));

  const double bound = root_bound(p.eps);
  const double seed_r = 1.0 + bound;
  CVec z(n);
  for (int i = 0; i < n; ++i) z[i] = std::polar(seed_r, 2.0 * kPi * i / n + 0.4);

  const CVec dp = p.derivative_coeffs();
  bool converged = false;
  for (int iter = 0; iter < 200 && !converged; ++iter) {
    double max_step = 0.0;
    bool all_roundoff = true;
    for (int i = 0; i < n; ++i) {
      cplx pv = p(z[i]);
      if (std::abs(pv) > 8.0 * DBL_EPSILON * horner_abs(p.coeffs, std::abs(z[i]))) all_roundoff = false;
      if (pv == 0.0) continue;
      cplx ratio = pv / poly_eval(dp, z[i]);
      cplx sum = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) sum += 1.0 / (z[i] - z[j]);
      cplx w = ratio / (1.0 - ratio * sum);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) w = ratio;
      z[i] -= w;
      max_step = std::max(max_step, std::abs(w));
    }
    converged = max_step < 1e-14 * std::max(bound, DBL_MIN) || all_roundoff;
  }
  const double res_tol = 1e-10 * std::max(1.0, std::pow(nrm, p.k + 1));
  if (!converged) {
    double worst = 0.0;
    for (auto r : z) worst = std::max(worst, std::abs(p(r)));
    if (worst > res_tol) {
      std::ostringstream os;
      os << "roots: no convergence after 200 iterations, max residual " << worst;
      throw NumericError(os.str());
    }
  }

  merge_multiple(p, z);

  bool real_coeffs = std::all_of(p.coeffs.begin(), p.coeffs.end(), [](cplx c) { return c.imag() == 0.0; });
  for (auto& r : z) {
    if (real_coeffs && std::abs(r.imag()) <= 1e-13 * std::max(1.0, bound)) r = cplx(r.real(), 0.0);
    if (r.imag() == 0.0) r = cplx(r.real(), 0.0);
    if (r.real() == 0.0) r = cplx(0.0, r.imag());
  }
  std::sort(z.begin(), z.end(), [](cplx a, cplx b) {
    double aa = std::arg(a), ab = std::arg(b);
    if (aa != ab) return aa < ab;
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a.real() < b.real();
  });
  return z;
}

double min_root_gap(const CVec& rts) {
  double g = INFINITY;
  for (size_t i = 0; i < rts.size(); ++i)
    for (size_t j = i + 1; j < rts.size(); ++j) g = std::min(g, std::abs(rts[i] - rts[j]));
  return g;
}

CVec theta_action(int theta, const CVec& eps) {
  const int k = static_cast<int>(eps.size());
  const cplx alpha = std::polar(1.0, 2.0 * kPi * theta / k);
  CVec out(k);
  for (int j = 0; j < k; ++j) out[j] = eps[j] * std::pow(alpha, j - 1);
  return out;
}

Rescaled rescale(double lambda, const CVec& eps, cplx x, cplx t) {
  if (!(lambda > 0.0)) throw ArgumentError("rescale: lambda must be positive");
  const int k = static_cast<int>(eps.size());
  Rescaled r;
  r.eps.resize(k);
  for (int j = 0; j < k; ++j) r.eps[j] = std::pow(lambda, k + 1 - j) * eps[j];
  r.x = lambda * x;
  r.t = std::pow(lambda, -k) * t;
  return r;
}

CVec residues(const CPoly& p) { return residues(p, roots(p)); }

CVec residues(const CPoly& p, const CVec& rts) {
  if (min_root_gap(rts) < default_tol_disc(p.eps))
    throw DegenerateError("residues: multiple root within tol_disc");
  CVec out;
  out.reserve(rts.size());
  for (auto r : rts) out.push_back(1.0 / p.deriv(r));
  return out;
}

bool in_discriminant(const CVec& eps, double tol) {
  if (tol < 0.0) tol = default_tol_disc(eps);
  CPoly p = build_P(static_cast<int>(eps.size()), eps);
  return min_root_gap(roots(p)) < tol;
}

cplx poly_eval(const CVec& c, cplx x) {
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

CVec poly_add(const CVec& a, const CVec& b) {
  CVec out(std::max(a.size(), b.size()), 0.0);
  for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

CVec poly_mul(const CVec& a, const CVec& b) {
  if (a.empty() || b.empty()) return {};
  CVec out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

CVec poly_scale(const CVec& a, cplx s) {
  CVec out(a);
  for (auto& c : out) c *= s;
  return out;
}

CVec poly_deriv(const CVec& a) {
  if (a.size() <= 1) return {};
  CVec out(a.size() - 1);
  for (size_t i = 1; i < a.size(); ++i) out[i - 1] = a[i] * double(i);
  return out;
}

CVec poly_pow(const CVec& a, int n) {
  CVec out{1.0};
  for (int i = 0; i < n; ++i) out = poly_mul(out, a);
  return out;
}

std::pair<CVec, CVec> poly_divmod(const CVec& a, const CVec& monic) {
  const int d = static_cast<int>(monic.size()) - 1;
  if (d < 0 || monic.back() != 1.0) throw ArgumentError("poly_divmod: divisor must be monic");
  CVec rem(a);
  if (static_cast<int>(rem.size()) <= d) {
    rem.resize(d, 0.0);
    return {CVec{}, rem};
  }
  CVec quot(rem.size() - d, 0.0);
  for (int i = static_cast<int>(rem.size()) - 1; i >= d; --i) {
    cplx q = rem[i];
    quot[i - d] = q;
    for (int j = 0; j <= d; ++j) rem[i - d + j] -= q * monic[j];
  }
  rem.resize(d);
  return {quot, rem};
}

void poly_trim(CVec& a) {
  while (!a.empty() && a.back() == 0.0) a.pop_back();
}

}  // namespace unfolding
