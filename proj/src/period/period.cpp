#include "unfolding/period.hpp"

#include <cmath>
#include <numbers>

#include "unfolding/errors.hpp"

namespace unfolding {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

bool is_nonpositive_integer(cplx z) {
  if (std::abs(z.imag()) > 1e-13 * std::max(1.0, std::abs(z))) return false;
  const double r = std::round(z.real());
  return r <= 0.0 && std::abs(z.real() - r) <= 1e-13 * std::max(1.0, std::abs(r));
}

cplx lanczos(cplx z) {
  static const double g = 7.0;
  static const double c[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                             771.32342877765313,   -176.61502916214059,   12.507343278686905,
                             -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  z -= 1.0;
  cplx x = c[0];
  for (int i = 1; i < 9; ++i) x += c[i] / (z + double(i));
  const cplx t = z + g + 0.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

// log sin(w), stable for large |Im w|.
cplx log_sin(cplx w) {
  if (w.imag() > 20.0) return -I * w + std::log((std::exp(2.0 * I * w) - 1.0) / (2.0 * I));
  if (w.imag() < -20.0) return I * w + std::log((1.0 - std::exp(-2.0 * I * w)) / (2.0 * I));
  return std::log(std::sin(w));
}

// principal a^b
cplx ppow(cplx a, cplx b) { return std::exp(b * std::log(a)); }

}  // namespace

GammaResult gamma_complex(cplx z) {
  if (is_nonpositive_integer(z)) return {cplx(INFINITY, 0.0), true};
  if (std::abs(z) > 100.0) return {std::exp(lgamma_complex(z)), false};
  if (z.real() < 0.5) return {kPi / (std::sin(kPi * z) * lanczos(1.0 - z)), false};
  return {lanczos(z), false};
}

cplx rgamma(cplx z) {
  if (is_nonpositive_integer(z)) return 0.0;
  if (std::abs(z) > 100.0) return std::exp(-lgamma_complex(z));
  if (z.real() < 0.5) return std::sin(kPi * z) * lanczos(1.0 - z) / kPi;
  return 1.0 / lanczos(z);
}

cplx lgamma_complex(cplx z) {
  if (z.real() < 0.5) return std::log(kPi) - log_sin(kPi * z) - lgamma_complex(1.0 - z);
  cplx shift = 0.0;
  while (std::abs(z) < 15.0) {
    shift -= std::log(z);
    z += 1.0;
  }
  static const double B[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6, -3617.0 / 510};
  cplx s = (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi);
  cplx zp = z;
  const cplx z2 = z * z;
  for (int j = 1; j <= 8; ++j) {
    s += B[j - 1] / (double(2 * j) * double(2 * j - 1) * zp);
    zp *= z2;
  }
  return s + shift;
}

PeriodTerm period_model_k1_limit(int n, int m, cplx mu0) {
  if (n < 0 || m < 1) throw ArgumentError("period_model_k1_limit: need n >= 0, m >= 1");
  PeriodTerm t;
  t.m = m;
  t.route = "limit";
  const cplx e = double(n) + double(m) * mu0;
  if (is_nonpositive_integer(e)) {
    t.zero = true;
    return t;
  }
  t.coefficient = ppow(cplx(-double(m), 0.0), e) * rgamma(e);
  return t;
}

void check_sector(cplx s, cplx mu) {
  if (s == 0.0) throw ArgumentError("period: s must be nonzero");
  double a = std::arg(s);
  if (a < 0.0) a += 2.0 * kPi;
  if (!(a > kPi / 4 && a < 7 * kPi / 4)) throw ArgumentError("period: arg s outside (pi/4, 7pi/4)");
  if (2.0 * std::abs(s) * std::abs(mu) >= 1.0) throw ArgumentError("period: |s| must be below 1/(2|mu|)");
}

PeriodTerm period_model_k1(int n, int m, cplx mu, cplx s) {
  check_sector(s, mu);
  PeriodTerm t = period_model_k1_limit(n, m, mu);
  t.route = "closed";
  if (t.zero) return t;

  cplx tsum = 0.0;
  double binom = 1.0;
  for (int p = 0; p <= n; ++p) {
    const int q = n - p;
    cplx a = 1.0;
    for (int j = 0; j < p; ++j) a *= 1.0 - s * (mu + 2.0 * j / m);
    for (int j = 0; j < q; ++j) a *= 1.0 + s * (mu + 2.0 * j / m);
    tsum += binom * a;
    binom = binom * (n - p) / (p + 1);
  }
  tsum /= std::pow(2.0, n);

  const double md = m;
  const cplx ga = -md / (2.0 * s) + md * mu / 2.0;
  const cplx gb = -md / (2.0 * s) - md * mu / 2.0;
  cplx ratio;
  if (is_nonpositive_integer(ga)) {
    t.pole = true;
    t.coefficient = cplx(INFINITY, 0.0);
    return t;
  }
  if (is_nonpositive_integer(gb)) {
    ratio = 0.0;
  } else if (std::max(std::abs(ga), std::abs(gb)) < 25.0) {
    ratio = gamma_complex(ga).value * rgamma(gb);
  } else {
    ratio = std::exp(lgamma_complex(ga) - lgamma_complex(gb));
  }
  const cplx T = ppow(-2.0 * s / md, md * mu) / (1.0 + s * mu) * ratio;
  t.coefficient *= tsum * T;
  return t;
}

PeriodTerm period_poly(const CVec& g, int m, cplx mu, cplx s) {
  PeriodTerm out;
  out.m = m;
  out.route = "closed";
  check_sector(s, mu);
  for (int n = 0; n < static_cast<int>(g.size()); ++n) {
    if (g[n] == 0.0) continue;
    PeriodTerm t = period_model_k1(n, m, mu, s);
    if (t.pole) throw NumericError("period_poly: Gamma pole in the closed form");
    out.coefficient += g[n] * t.coefficient;
  }
  return out;
}

GermMap bernoulli_modulus(int d, const CVec& r, cplx mu, cplx s, int N) {
  if (d < 1) throw ArgumentError("bernoulli_modulus: d must be >= 1");
  const cplx t = period_poly(r, d, mu, s).coefficient / double(d);
  // -(1/d) log(1 + c w), w = h^d
  const cplx c = 2.0 * kPi * I * double(d) * t;
  GermMap g = GermMap::zero(N);
  cplx cp = c;
  for (int j = 1; j * d <= N; ++j) {
    g.coeffs[j * d - 1] = -(1.0 / d) * ((j % 2 == 1) ? 1.0 : -1.0) * cp / double(j);
    cp *= c;
  }
  return g;
}

cplx invert_dominant(cplx phi_d, int d, cplx mu, cplx s) {
  if (d < 1) throw ArgumentError("invert_dominant: d must be >= 1");
  PeriodTerm t = period_model_k1(1, d, mu, s);
  if (t.zero || std::abs(t.coefficient) == 0.0)
    throw ResonanceError("invert_dominant: 1 + d mu is a nonpositive integer, the period vanishes");
  if (t.pole) throw NumericError("invert_dominant: Gamma pole in the closed form");
  return -double(d) * phi_d / (2.0 * kPi * I * t.coefficient);
}

}  // namespace unfolding
