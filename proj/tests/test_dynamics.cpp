#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <numeric>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "unfolding/dynamics.hpp"
#include "unfolding/errors.hpp"

using namespace unfolding;

namespace {

const double kPi = std::numbers::pi;
const cplx I(0, 1);

CVec random_eps(std::mt19937& rng, int k, double scale) {
  std::uniform_real_distribution<double> u(-1, 1);
  CVec e(k);
  for (auto& v : e) v = scale * cplx(u(rng), u(rng));
  return e;
}

int index_of(const CVec& rts, cplx z) {
  for (size_t i = 0; i < rts.size(); ++i)
    if (std::abs(rts[i] - z) < 1e-9) return static_cast<int>(i);
  return -1;
}

// Distance of eps from the homoclinic hypersurfaces, relative to the residue scale.
double homoclinic_margin(const CPoly& p) {
  const CVec nu = residues(p);
  double scale = 0.0;
  for (auto v : nu) scale += std::abs(v);
  const int n = static_cast<int>(nu.size());
  double m = INFINITY;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    cplx s = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) s += nu[i];
    m = std::min(m, std::abs(s.real()) / scale);
  }
  return m;
}

}  // namespace

TEST_CASE("trajectory examples on the real phase line") {
  auto p = build_P(1, {-1.0});
  auto rts = roots(p);
  auto t = integrate_trajectory(p, 0.0, 0.5, 2.0);
  REQUIRE(t.terminal == Terminal::Landed);
  CHECK(t.root == index_of(rts, -1.0));
  CHECK(std::abs(t.points.back() + 1.0) < landing_radius(p, rts, 2.0));
  CHECK(t.elapsed > 0);

  t = integrate_trajectory(p, 0.0, -1.5, 2.0);
  REQUIRE(t.terminal == Terminal::Landed);
  CHECK(t.root == index_of(rts, -1.0));

  TrajectoryControls back;
  back.direction = -1;
  t = integrate_trajectory(p, 0.0, 0.5, 2.0, back);
  REQUIRE(t.terminal == Terminal::Landed);
  CHECK(t.root == index_of(rts, 1.0));
  CHECK(t.elapsed < 0);

  CHECK_THROWS_AS(integrate_trajectory(p, 2.0, 0.5, 2.0), ArgumentError);
  CHECK_THROWS_AS(integrate_trajectory(p, 0.0, 3.0, 2.0), ArgumentError);
}

TEST_CASE("trajectory of x^2 follows the explicit solution") {
  // x(t) = x0 / (1 - x0 t): Im(1/x) is constant and 1/x0 - 1/x = t
  auto p = build_P(1, {0.0});
  const double rho = 1.0;
  const cplx x0 = rho * I;
  auto t = integrate_trajectory(p, 0.0, x0, rho);
  REQUIRE(t.terminal == Terminal::Landed);
  CHECK(t.root == 0);
  for (auto x : t.points) CHECK(std::abs((1.0 / x).imag() - (1.0 / x0).imag()) < 1e-8 * std::abs(1.0 / x));
  const cplx xe = t.points.back();
  CHECK(std::abs((1.0 / x0 - 1.0 / xe).real() - t.elapsed) < 1e-6 * std::abs(t.elapsed));
}

TEST_CASE("separatrices of infinity") {
  auto p0 = build_P(1, {0.0});
  auto s0 = separatrices_infinity(p0, {}, 1.0);
  REQUIRE(s0.size() == 2);
  for (auto& s : s0) {
    CHECK(s.terminal == Terminal::Landed);
    CHECK(s.root == 0);
  }

  auto p = build_P(1, {-1.0});
  auto rts = roots(p);
  auto s = separatrices_infinity(p, {}, rho_eps(p.eps));
  CHECK(s[0].root == index_of(rts, 1.0));   // from +1 out along the positive axis
  CHECK(s[1].root == index_of(rts, -1.0));  // in from -infinity to -1
  for (auto x : s[0].points) CHECK(std::abs(x.imag()) < 1e-9);

  CHECK_THROWS_AS(separatrices_infinity(p, {}, 0.5), ArgumentError);

  // roots -1, 0, 1; landing pattern is stable under a small perturbation
  auto q = build_P(2, {0.0, -1.0});
  auto a = ds_invariant(q, {}, rho_eps(q.eps));
  auto q2 = build_P(2, {cplx(1e-3, 2e-3), cplx(-1.0, 1e-3)});
  auto b = ds_invariant(q2, {}, rho_eps(q2.eps));
  CHECK(a.sigma == b.sigma);
  auto rq = roots(q);
  CHECK(a.landing[1] == index_of(rq, 0.0));
  CHECK(a.landing[3] == index_of(rq, 0.0));
}

TEST_CASE("root classification") {
  auto p = build_P(1, {-1.0});
  CHECK(classify_root(p, 1.0, 0.0) == RootType::node);
  CHECK(classify_root(p, -1.0, 0.0) == RootType::saddle);
  auto q = build_P(1, {1.0});
  CHECK(classify_root(q, I, 0.0) == RootType::center);
  CHECK(classify_root(q, -I, 0.0) == RootType::center);
  auto a = classify_root(q, I, kPi / 6), b = classify_root(q, -I, kPi / 6);
  CHECK(a != b);
  CHECK(a != RootType::center);
  CHECK(b != RootType::center);
  CHECK(b == RootType::node);  // Re(e^{i pi/6} (-2i)) = 1
}

TEST_CASE("ds_tau examples and loop integrals") {
  auto p = build_P(1, {-1.0});
  auto rts = roots(p);
  CHECK(std::abs(ds_tau(p, {index_of(rts, 1.0)}) - kPi * I) < 1e-14);
  const cplx s(0.3, 0.2);
  auto ps = build_P(1, {-s * s});
  CHECK(std::abs(ds_tau(ps, {index_of(roots(ps), s)}) - kPi * I / s) < 1e-12);

  std::mt19937 rng(17);
  for (int t = 0; t < 100; ++t) {
    const int k = 1 + t % 4;
    auto q = build_P(k, random_eps(rng, k, 0.8));
    auto r = roots(q);
    if (k >= 2) {
      std::vector<int> all(r.size());
      std::iota(all.begin(), all.end(), 0);
      CHECK(std::abs(ds_tau(q, all)) < 1e-9);
    }
    std::vector<int> I1;
    for (int i = 0; i < static_cast<int>(r.size()); ++i)
      if (rng() % 2) I1.push_back(i);
    // trapezoid rule on a small circle around each root in I
    const double rad = 0.3 * min_root_gap(r);
    const int M = 512;
    cplx loop = 0.0;
    for (int i : I1)
      for (int j = 0; j < M; ++j) {
        const cplx e = std::polar(1.0, 2 * kPi * j / M);
        loop += rad * e * I * (2 * kPi / M) / q(r[i] + rad * e);
      }
    CHECK(std::abs(ds_tau(q, I1) - loop) < 1e-9 * std::max(1.0, std::abs(loop)));
  }
}

TEST_CASE("catalan numbers and non-crossing permutations") {
  const std::uint64_t want[] = {1, 2, 5, 14, 42, 132};
  for (int k = 1; k <= 6; ++k) CHECK(catalan(k) == want[k - 1]);
  CHECK_THROWS_AS(catalan(0), ArgumentError);
  CHECK(is_noncrossing({0}));
  CHECK(is_noncrossing({1, 0}));
  CHECK(is_noncrossing({1, 2, 0}));
  CHECK_FALSE(is_noncrossing({2, 0, 1}));
  CHECK_FALSE(is_noncrossing({2, 3, 0, 1}));  // (0 2)(1 3) cross
  // brute-force count over S_k
  for (int k = 1; k <= 5; ++k) {
    std::vector<int> s(k);
    std::iota(s.begin(), s.end(), 0);
    std::uint64_t n = 0;
    do n += is_noncrossing(s);
    while (std::next_permutation(s.begin(), s.end()));
    CHECK(n == catalan(k));
  }
}

TEST_CASE("Douady-Sentenac invariant") {
  auto p = build_P(1, {-1.0});
  auto d = ds_invariant(p, {}, rho_eps(p.eps));
  CHECK(d.sigma == std::vector<int>{0});
  CHECK(std::abs(d.taus[0] - kPi * I) < 1e-12);
  CHECK(d.root_types[index_of(d.roots, 1.0)] == RootType::node);

  // centers lie on the bifurcation locus
  try {
    ds_invariant(build_P(1, {1.0}), {}, 2.0);
    FAIL("expected a bifurcation error");
  } catch (const BifurcationError& e) {
    CHECK(!e.partitions.empty());
  }
  CHECK_THROWS_AS(ds_invariant(build_P(1, {0.0}), {}, 1.0), DegenerateError);

  std::mt19937 rng(5);
  for (int k = 2; k <= 3; ++k) {
    std::set<std::vector<int>> seen;
    for (int t = 0; t < 200; ++t) {
      auto q = build_P(k, random_eps(rng, k, 1.0));
      if (homoclinic_margin(q) < 1e-4) continue;
      auto inv = ds_invariant(q, {}, rho_eps(q.eps));
      CHECK(is_noncrossing(inv.sigma));
      seen.insert(inv.sigma);
      // each tau is 2 pi i nu(I) up to sign for a proper subset, with Im > 0
      auto nu = residues(q);
      for (auto tau : inv.taus) {
        CHECK(tau.imag() > 0);
        bool found = false;
        const int n = static_cast<int>(nu.size());
        for (unsigned mask = 1; mask + 1 < (1u << n) && !found; ++mask) {
          cplx s = 0.0;
          for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) s += nu[i];
          found = std::abs(2.0 * kPi * I * s - tau) < 1e-9 * std::abs(tau);
        }
        CHECK(found);
      }
    }
    CHECK(seen.size() == catalan(k));
  }
}

TEST_CASE("invariant under rescaling and small perturbations") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  for (int t = 0; t < 200 && checked < 50; ++t) {
    const int k = 2 + t % 2;
    CVec e = random_eps(rng, k, 1.0);
    auto q = build_P(k, e);
    if (homoclinic_margin(q) < 1e-2) continue;
    ++checked;
    auto a = ds_invariant(q, {}, rho_eps(e));
    CVec e2 = e;
    for (auto& v : e2) v += 1e-5 * cplx(u(rng), u(rng));
    auto q2 = build_P(k, e2);
    CHECK(ds_invariant(q2, {}, rho_eps(e2)).sigma == a.sigma);

    const double lam = 0.2 + 2 * std::abs(u(rng));
    auto r = rescale(lam, e, 0.0, 0.0);
    auto b = ds_invariant(build_P(k, r.eps), {}, rho_eps(r.eps));
    CHECK(b.sigma == a.sigma);
    for (int j = 0; j < k; ++j) {
      CHECK(std::abs(b.taus[j] - std::pow(lam, -k) * a.taus[j]) < 1e-8 * std::abs(a.taus[j]));
      // |tau| |eps|^k is constant along the rescaling orbit
      const double c1 = std::abs(a.taus[j]) * std::pow(eps_norm(e), k);
      const double c2 = std::abs(b.taus[j]) * std::pow(eps_norm(r.eps), k);
      CHECK(c2 == doctest::Approx(c1).epsilon(1e-8));
      CHECK(c1 > 0);
    }
  }
  CHECK(checked == 50);
}

TEST_CASE("homoclinic crossing along a parameter path") {
  std::mt19937 rng(31);
  int found = 0;
  for (int t = 0; t < 200 && found < 3; ++t) {
    const int k = 2;
    CVec e0 = random_eps(rng, k, 1.0), e1 = random_eps(rng, k, 1.0);
    auto at = [&](double s) {
      CVec e(k);
      for (int j = 0; j < k; ++j) e[j] = (1 - s) * e0[j] + s * e1[j];
      return build_P(k, e);
    };
    auto sig = [&](double s) -> std::vector<int> {
      try {
        return ds_invariant(at(s), {}, rho_eps(at(s).eps)).sigma;
      } catch (const DegenerateError&) {
        return {};
      } catch (const NumericError&) {
        return {};  // a separatrix spirals too slowly near a center
      }
    };
    auto sa = sig(0.0), sb = sig(1.0);
    if (sa.empty() || sb.empty() || sa == sb) continue;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      auto sm = sig(mid);
      if (sm == sa)
        lo = mid;
      else if (sm == sb)
        hi = mid;
      else {
        // undecided band around the locus: squeeze from both sides
        const double q1 = 0.5 * (lo + mid), q3 = 0.5 * (mid + hi);
        const bool left = sig(q1) == sa, right = sig(q3) == sb;
        if (left) lo = q1;
        if (right) hi = q3;
        if (!left && !right) break;
      }
    }
    // the sigma change is bracketed tightly; separatrices stop landing very close to the locus
    CHECK(hi - lo < 1e-3);
    // some Re nu(I) changes sign inside the bracket (roots matched by continuity)
    auto nl = residues(at(lo)), nh = residues(at(hi));
    auto rl = roots(at(lo)), rh = roots(at(hi));
    bool flips = false;
    const int n = static_cast<int>(nl.size());
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      cplx a = 0.0, b = 0.0;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) {
          a += nl[i];
          int best = 0;
          for (int j = 1; j < n; ++j)
            if (std::abs(rh[j] - rl[i]) < std::abs(rh[best] - rl[i])) best = j;
          b += nh[best];
        }
      if (a.real() * b.real() < 0) flips = true;
    }
    CHECK(flips);
    ++found;
  }
  CHECK(found == 3);
}

TEST_CASE("weak holonomy of the model field is exact") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 20; ++t) {
    const int k = 1 + t % 2;
    UnfoldingField f;
    f.p = build_P(k, random_eps(rng, k, 0.3));
    f.mu = cplx(u(rng), 0.3 * u(rng));
    const double xs = 2 * root_bound(f.p.eps) + 0.5;
    const cplx y0 = 1e-3 * std::polar(1.0, kPi * u(rng));
    const cplx h = weak_holonomy(f, xs, y0);
    CHECK(std::abs(h / y0 - std::exp(2.0 * kPi * I * f.mu)) <= 1e-9);
    const cplx hb = weak_holonomy(f, xs, h, -1);
    CHECK(std::abs(hb - y0) <= 1e-9 * std::abs(y0));
  }
  UnfoldingField id;
  id.p = build_P(2, {cplx(0.1, 0.1), cplx(-0.2, 0.0)});
  CHECK(std::abs(weak_holonomy(id, 1.5, 1e-3) - 1e-3) < 1e-15);
  CHECK_THROWS_AS(weak_holonomy(id, 0.1, 1e-3), ArgumentError);

  // |y| grows by about e^{5 pi} along the loop when s = 0.2i
  UnfoldingField big;
  big.p = build_P(1, {0.04});
  CHECK_THROWS_AS(weak_holonomy(big, 0.6, 0.05, 1, 1.0), EscapeError);
}

TEST_CASE("Bernoulli holonomy against the linearized oracle") {
  for (int d : {1, 2})
    for (cplx s : {cplx(-0.2), 0.25 * std::polar(1.0, 0.8 * kPi), cplx(0.1, 0.15)})
      for (cplx mu : {cplx(0.0), cplx(0.3, 0.1)}) {
        UnfoldingField f;
        f.p = build_P(1, {-s * s});
        f.mu = mu;
        const cplx r(0.2, -0.1);
        f.r = {{1, d, r}};
        for (cplx y0 : {cplx(1e-2), cplx(0.0, 3e-2), cplx(-2e-2, 1e-2)}) {
          const cplx h = weak_holonomy(f, 0.6, y0);
          const cplx o = oracle::bernoulli_holonomy_k1(s, mu, r, d, 0.6, y0);
          CHECK(std::abs(h - o) <= 1e-8 * std::abs(o));
        }
      }
}

TEST_CASE("holonomy germ") {
  UnfoldingField f;
  f.p = build_P(1, {cplx(0.02, 0.01)});
  f.mu = cplx(0.2, 0.05);
  auto g = holonomy_germ(f, 0.8, 1, 0.05, 4);
  CHECK(std::abs(g.coeff(1) - std::exp(2.0 * kPi * I * f.mu)) < 1e-9);
  for (int q = 2; q <= 4; ++q) CHECK(std::abs(g.coeff(q)) < 1e-8);
  CHECK_THROWS_AS(holonomy_germ(f, 0.8, 1, 0.05, 0), ArgumentError);
}

TEST_CASE("squid sector boundaries") {
  auto p = build_P(1, {-1.0});
  auto rts = roots(p);
  const double rho = 2.0;
  auto sq = squid_boundaries(p, {}, rho, 0.1);
  REQUIRE(sq.size() == 1);
  CHECK(sq[0].saddle_minus == index_of(rts, -1.0));
  CHECK(sq[0].saddle_plus == index_of(rts, -1.0));
  CHECK(sq[0].node == index_of(rts, 1.0));
  REQUIRE(!sq[0].gate.empty());
  CHECK(std::abs(sq[0].gate.front() - 1.0) < 1e-12);
  CHECK(std::abs(sq[0].gate.back() + 1.0) < 1e-12);
  for (auto x : sq[0].gate) CHECK(std::abs(x) <= rho_eps(p.eps) + 1e-9);
  auto spaced = [&](const Curve& c) {
    for (size_t i = 1; i < c.size(); ++i)
      if (std::abs(c[i] - c[i - 1]) >= rho / 200) return false;
    return true;
  };
  CHECK(spaced(sq[0].arc));
  CHECK(spaced(sq[0].boundary_minus));
  CHECK(spaced(sq[0].spiral_plus));

  auto p0 = build_P(1, {0.0});
  auto s0 = squid_boundaries(p0, {}, 1.0, 0.0);
  CHECK(s0[0].saddle_minus == 0);
  CHECK(s0[0].saddle_plus == 0);
  CHECK(s0[0].gate.empty());

  CHECK_THROWS_AS(squid_boundaries(p, {}, rho, 1.0, cplx(0.5, 1.0)), ArgumentError);

  std::mt19937 rng(3);
  for (int t = 0; t < 5; ++t) {
    auto q = build_P(2, random_eps(rng, 2, 1.0));
    if (homoclinic_margin(q) < 1e-2) continue;
    auto s = squid_boundaries(q, {}, 1.5 * rho_eps(q.eps), 0.0);
    CHECK(s.size() == 2);
    auto r = roots(q);
    for (auto& x : s) {
      CHECK(classify_root(q, r[x.saddle_minus], 0.0) == RootType::saddle);
      CHECK(classify_root(q, r[x.saddle_plus], 0.0) == RootType::saddle);
      CHECK(classify_root(q, r[x.node], 0.0) == RootType::node);
    }
  }
}
