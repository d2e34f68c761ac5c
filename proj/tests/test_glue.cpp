#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "unfolding/errors.hpp"
#include "unfolding/glue.hpp"
#include "unfolding/necklace.hpp"
#include "unfolding/period.hpp"

using namespace unfolding;

namespace {
const double kPi = std::numbers::pi;
const cplx I(0, 1);

cplx rnd(std::mt19937& rng, double r = 1.0) {
  std::uniform_real_distribution<double> u(-r, r);
  return {u(rng), u(rng)};
}

GermMap bernoulli_phi(int d, cplx mu, cplx alpha, int N) {
  return log_germ(ber_to_germ({d, std::exp(2.0 * kPi * I * mu), alpha}, N), N);
}

// H o Delta = psi o H at the anchor, with H read in the fiber coordinate of the section form.
double round_trip_defect(const Realization& re, const SynthesizedR& R, int order) {
  UnfoldingField f;
  f.p = re.p;
  f.mu = re.mu;
  f.r = R.monomials(1e-15);
  const GermMap D = holonomy_germ(f, std::abs(re.anchor), 1, 0.02, order);
  const GermMap HY = compose(GermMap(re.H(re.anchor)), inverse(R.fiber)).truncated(order);
  const GermMap psi = exp_germ(2.0 * kPi * I * re.mu, re.phi, order);
  const GermMap lhs = compose(HY, D), rhs = compose(psi, HY);
  double scale = 1.0;
  for (auto c : rhs.coeffs) scale = std::max(scale, std::abs(c));
  return max_abs_diff(lhs, rhs) / scale;
}
}  // namespace

TEST_CASE("Cauchy-Heine orientation is fixed by the probe") {
  // the literal counterclockwise pair produces -phi, so both circles are reversed
  CHECK(cauchy_heine_orientation() == -1);
  CHECK(cauchy_heine_orientation() == -1);
}

TEST_CASE("Cousin identity on monomial probes") {
  GlueConfig cfg;
  const auto zero = ChartFunction::zero(cfg.ny, cfg.M / 2);
  std::vector<AnnulusFunction> probes;
  for (int p = 0; p <= 3; ++p) {
    probes.push_back([p](cplx u, cplx v) { return v * std::pow(u, p); });
    probes.push_back([p](cplx u, cplx v) { return v * std::pow(u, -p); });
  }
  probes.push_back([](cplx u, cplx v) { return v * (u + 1.0 / u) / 2.0; });
  for (const auto& phi : probes) {
    const auto pr = cauchy_heine_pair(phi, zero, cfg);
    CHECK(cousin_residual(phi, zero, pr, cfg) <= 1e-12);
    CHECK(pr.F0_norm <= pr.bound * (1 + 1e-12));
    CHECK(pr.Finf_norm <= pr.bound * (1 + 1e-12));
  }
  // v u^p lands at infinity as -v u^p, v u^{-p} at zero as v x^p
  const cplx u = std::polar(1.3, 0.4), v = 0.3 * cfg.r;
  for (int p = 1; p <= 3; ++p) {
    const auto pos = cauchy_heine_pair([p](cplx a, cplx b) { return b * std::pow(a, p); }, zero, cfg);
    CHECK(pos.F0.sup(cfg.rho0, cfg.r) < 1e-14);
    CHECK(std::abs(pos.Finf(u, v) + v * std::pow(u, p)) < 1e-14);
    const auto neg = cauchy_heine_pair([p](cplx a, cplx b) { return b * std::pow(a, -p); }, zero, cfg);
    CHECK(neg.Finf.sup(cfg.rho_inf, cfg.r) < 1e-14);
    CHECK(std::abs(neg.F0(1.0 / u, v) - v * std::pow(u, -p)) < 1e-14);
  }
  const auto z = cauchy_heine_pair([](cplx, cplx) { return cplx(0.0); }, zero, cfg);
  CHECK(z.F0.sup(cfg.rho0, cfg.r) == 0.0);
  CHECK(z.Finf.sup(cfg.rho_inf, cfg.r) == 0.0);
}

TEST_CASE("Cauchy-Heine bound with nonzero psi") {
  std::mt19937 rng(7);
  GlueConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    const cplx a = rnd(rng, 0.3), b = rnd(rng, 0.3), c = rnd(rng, 0.3);
    const AnnulusFunction phi = [=](cplx u, cplx v) { return v * (a * u + b / u) + c * v * v; };
    ChartFunction psi = ChartFunction::zero(cfg.ny, cfg.M / 2);
    psi.c[1][0] = rnd(rng, 2.0);
    psi.c[1][1] = rnd(rng, 2.0);
    psi.c[2][0] = rnd(rng, 10.0);
    const auto pr = cauchy_heine_pair(phi, psi, cfg);
    CHECK(pr.F0_norm <= pr.bound);
    CHECK(pr.Finf_norm <= pr.bound);
    CHECK(cousin_residual(phi, psi, pr, cfg) <= 1e-10);
  }
}

TEST_CASE("Savelev iteration") {
  GlueConfig cfg;
  const AnnulusFunction phi = [](cplx u, cplx v) { return 0.3 * v * v * (u + 1.0 / u) + 0.2 * v * u * u + 0.1 * v / u; };
  const auto res = savelev_iterate(phi, cfg);
  CHECK(res.residual <= 1e-7);
  CHECK(res.iterations <= cfg.ny + 2);
  for (double n : res.norms) CHECK(n <= res.norm_bound);
  // degree-by-degree stabilization
  for (double lc : res.low_changes) CHECK(lc <= 1e-13);
  for (size_t i = 1; i < res.changes.size(); ++i) CHECK(res.changes[i] < res.changes[i - 1]);

  SUBCASE("zero cocycle") {
    const auto z = savelev_iterate([](cplx, cplx) { return cplx(0.0); }, cfg);
    CHECK(z.psi_inf.sup(cfg.rho_inf, cfg.r) == 0.0);
    CHECK(z.psi0.sup(cfg.rho0, cfg.r) == 0.0);
  }

  SUBCASE("other radii give the same solution up to a function of v") {
    GlueConfig other = cfg;
    other.rho0 = 3.0;
    other.rho_inf = 1.5;
    const auto r2 = savelev_iterate(phi, other);
    const cplx v = 0.4 * cfg.r * std::exp(0.3 * I);
    const cplx d0 = res.psi_inf(1.0, v) - r2.psi_inf(1.0, v);
    for (int j = 0; j < 12; ++j) {
      const cplx u = std::polar(1.2, 2 * kPi * j / 12);
      CHECK(std::abs(res.psi_inf(u, v) - r2.psi_inf(u, v) - d0) <= 1e-8);
    }
  }

  SUBCASE("fiber radius too large") {
    GlueConfig big = cfg;
    big.r = 0.45;
    big.eta = 0.5;
    CHECK_THROWS_AS(savelev_iterate([](cplx u, cplx v) { return 2.0 * v * u; }, big), ArgumentError);
  }

  SUBCASE("bad configuration") {
    GlueConfig bad = cfg;
    bad.rho0 = 0.4;
    CHECK_THROWS_AS(savelev_iterate(phi, bad), ArgumentError);
  }
}

TEST_CASE("realization of the trivial modulus") {
  const auto re = realize_k1(GermMap::zero(6), 0.5, -0.1);
  CHECK(std::abs(re.omega) == 1.0);
  CHECK(re.in_saddle_part(-0.3));
  CHECK_FALSE(re.in_saddle_part(0.3));
  const auto R = synthesize_R(re);
  for (const auto& c : R.coeffs)
    for (auto v : c) CHECK(std::abs(v) == 0.0);
  CHECK(R.monomials(0.0).empty());
}

TEST_CASE("realization of Bernoulli moduli") {
  const cplx mu = 0.5, s = -0.1;
  for (int d : {1, 2})
    for (cplx alpha : {cplx(0.1), cplx(0.03, -0.07)}) {
      CAPTURE(d);
      CAPTURE(alpha);
      const GermMap phi = bernoulli_phi(d, mu, alpha, 8);
      const auto re = realize_k1(phi, mu, s);
      CHECK(realization_cousin_residual(re, 0.05) <= 1e-10);
      CHECK(realization_transition_residual(re, 0.05) <= 1e-10);
      const auto R = synthesize_R(re);
      CHECK(R.fit_residual <= 1e-10);
      CHECK(R.overlap_defect <= 1e-10);
      const cplx expect = invert_dominant(phi.coeff(d), d, mu, s);
      CHECK(std::abs(R.section[d - 1] - expect) <= 1e-6 * std::abs(expect));
      for (int n = 1; n <= re.ny; ++n)
        if (n != d) CHECK(std::abs(R.section[n - 1]) <= 1e-12);
      CHECK(round_trip_defect(re, R, 4) <= 1e-6);
    }
}

TEST_CASE("realization of a generic modulus") {
  const cplx mu = 0.5, s = -0.1;
  GermMap phi(CVec{0.04, cplx(0.02, 0.01), -0.01, 0.005, 0.0, 0.0});
  const auto re = realize_k1(phi, mu, s);
  CHECK(realization_cousin_residual(re, 0.05) <= 1e-10);
  CHECK(realization_transition_residual(re, 0.05) <= 1e-8);
  const auto R = synthesize_R(re);
  CHECK(R.fit_residual <= 1e-8);
  CHECK(R.derivative_bound < 0.1);
  // the dominant term is linear in the modulus
  CHECK(std::abs(R.section[0] - invert_dominant(phi.coeff(1), 1, mu, s)) <= 1e-6);
  CHECK(round_trip_defect(re, R, 4) <= 1e-5);
}

TEST_CASE("realization is linear in small moduli") {
  const cplx mu = 0.5, s = -0.1;
  const GermMap phi(CVec{0.04, cplx(0.02, 0.01), -0.01, 0.005, 0.0, 0.0});
  auto scaled = [&](double f) {
    GermMap g = phi;
    for (auto& c : g.coeffs) c *= f;
    return realize_k1(g, mu, s);
  };
  const auto milli = scaled(1e-3), micro = scaled(1e-6);
  for (cplx x : {cplx(0.25, 0.1), cplx(-0.3, 0.0), cplx(0.1, -0.3)}) {
    // sup over the y-coefficients at |y| = 1
    const CVec a = milli.N(x), b = micro.N(x);
    double dev = 0.0, lin = 0.0;
    for (int n = 1; n <= milli.ny; ++n) {
      dev = std::max(dev, std::abs(1e3 * a[n - 1] - 1e6 * b[n - 1]));
      lin = std::max(lin, std::abs(1e6 * b[n - 1]));
    }
    CHECK(lin > 0.0);
    CHECK(dev <= 1e-2 * lin);
  }
}

TEST_CASE("realization errors") {
  const GermMap phi = bernoulli_phi(1, 0.5, 0.05, 6);
  CHECK_THROWS_AS(realize_k1(phi, -0.5, -0.1), ContourError);
  RealizeConfig cfg;
  cfg.anchor_angle = kPi;
  CHECK_THROWS_AS(realize_k1(phi, 0.5, -0.1, cfg), ArgumentError);
}
