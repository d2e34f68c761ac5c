#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "unfolding/cpoly.hpp"
#include "unfolding/errors.hpp"

using namespace unfolding;

namespace {

const double kPi = std::numbers::pi;

bool same_set(CVec a, CVec b, double tol) {
  if (a.size() != b.size()) return false;
  for (auto z : a) {
    auto it = std::find_if(b.begin(), b.end(), [&](cplx w) { return std::abs(w - z) <= tol; });
    if (it == b.end()) return false;
    b.erase(it);
  }
  return true;
}

CVec random_eps(std::mt19937& rng, int k, double target_norm) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CVec e(k);
  for (auto& v : e) v = cplx(u(rng), u(rng));
  const double n = eps_norm(e);
  // Scaling eps_j by lambda^{k+1-j} scales the norm by lambda.
  return rescale(target_norm / n, e, 0.0, 0.0).eps;
}

}  // namespace

TEST_CASE("build_P coefficients") {
  auto p = build_P(1, {0.0});
  CHECK(p.coeffs == CVec{0.0, 0.0, 1.0});
  p = build_P(1, {-1.0});
  CHECK(p.coeffs == CVec{-1.0, 0.0, 1.0});
  p = build_P(2, {-1.0, 0.0});
  CHECK(p.coeffs == CVec{-1.0, 0.0, 0.0, 1.0});
  CHECK(p.coeffs[2] == 0.0);
  CHECK_THROWS_AS(build_P(2, {1.0}), ArgumentError);
}

TEST_CASE("roots of small examples") {
  CHECK(same_set(roots(build_P(1, {-1.0})), {-1.0, 1.0}, 1e-14));
  CHECK(same_set(roots(build_P(1, {1.0})), {cplx(0, -1), cplx(0, 1)}, 1e-14));
  CHECK(same_set(roots(build_P(2, {0.0, -1.0})), {-1.0, 0.0, 1.0}, 1e-14));
  CHECK(roots(build_P(3, {0.0, 0.0, 0.0})) == CVec(4, 0.0));
}

TEST_CASE("root ordering is by argument then modulus") {
  auto r = roots(build_P(2, {0.3, -1.1}));
  for (size_t i = 1; i < r.size(); ++i) CHECK(std::arg(r[i - 1]) <= std::arg(r[i]));
  auto r2 = roots(build_P(2, {0.3, -1.1}));
  CHECK(r == r2);
}

TEST_CASE("root bound and residual over random parameters") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> un(0.0, 1.0);
  for (int k = 1; k <= 3; ++k)
    for (int t = 0; t < 1000; ++t) {
      CVec e = random_eps(rng, k, un(rng));
      auto p = build_P(k, e);
      const double nrm = eps_norm(e);
      for (auto r : roots(p)) {
        CHECK(std::abs(r) <= std::sqrt(double(k)) * nrm + 1e-9);
        CHECK(std::abs(p(r)) <= 1e-10 * std::max(1.0, std::pow(nrm, k + 1)));
      }
    }
}

TEST_CASE("eps_norm") {
  CHECK(eps_norm({0.0, 0.0}) == 0.0);
  CHECK(eps_norm({4.0}) == doctest::Approx(2.0));
  CHECK(eps_norm({0.008, 0.04}) == doctest::Approx(0.2));
}

TEST_CASE("theta action") {
  CVec e{cplx(0.3, 0.1), cplx(-0.2, 0.5)};
  CHECK(theta_action(0, e) == e);
  auto t = theta_action(1, e);
  CHECK(std::abs(t[0] + e[0]) < 1e-15);
  CHECK(std::abs(t[1] - e[1]) < 1e-15);
  CHECK(theta_action(0, CVec{cplx(2, 1)}) == CVec{cplx(2, 1)});

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 1; k <= 4; ++k)
    for (int theta = 0; theta < k; ++theta) {
      CVec eps(k);
      for (auto& v : eps) v = cplx(u(rng), u(rng));
      CVec it = eps;
      for (int i = 0; i < k; ++i) it = theta_action(theta, it);
      for (int j = 0; j < k; ++j) CHECK(std::abs(it[j] - eps[j]) < 1e-12);
      // (1/alpha) P_eps(alpha x) = alpha^k P_{theta*eps}(x)
      const cplx alpha = std::polar(1.0, 2 * kPi * theta / k);
      auto p = build_P(k, eps), q = build_P(k, theta_action(theta, eps));
      for (int s = 0; s < 5; ++s) {
        cplx x(u(rng), u(rng));
        CHECK(std::abs(p(alpha * x) / alpha - std::pow(alpha, k) * q(x)) < 1e-12);
      }
    }
}

TEST_CASE("rescale") {
  auto r = rescale(1.0, {cplx(1, 2)}, cplx(0.5, 0), cplx(3, 0));
  CHECK(r.eps[0] == cplx(1, 2));
  CHECK(r.x == cplx(0.5, 0));
  r = rescale(2.0, {1.0}, 0.0, 0.0);
  CHECK(std::abs(r.eps[0] - 4.0) < 1e-15);
  CHECK_THROWS_AS(rescale(0.0, {1.0}, 0.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(rescale(-1.0, {1.0}, 0.0, 0.0), ArgumentError);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 1; k <= 3; ++k)
    for (int t = 0; t < 20; ++t) {
      CVec eps(k);
      for (auto& v : eps) v = cplx(u(rng), u(rng));
      const double lam = 0.5 + 2 * std::abs(u(rng));
      cplx x(u(rng), u(rng)), tt(u(rng), u(rng));
      auto a = rescale(lam, eps, x, tt);
      auto b = rescale(1.0 / lam, a.eps, a.x, a.t);
      for (int j = 0; j < k; ++j) CHECK(std::abs(b.eps[j] - eps[j]) < 1e-12);
      CHECK(std::abs(b.x - x) < 1e-12);
      CHECK(std::abs(b.t - tt) < 1e-12);
      CHECK(std::abs(build_P(k, a.eps)(lam * x) - std::pow(lam, k + 1) * build_P(k, eps)(x)) < 1e-12);
    }
}

TEST_CASE("residues") {
  auto p = build_P(1, {-1.0});
  auto rts = roots(p);
  auto res = residues(p, rts);
  for (size_t i = 0; i < rts.size(); ++i) CHECK(std::abs(res[i] - 1.0 / (2.0 * rts[i])) < 1e-14);

  p = build_P(2, {0.0, -1.0});
  rts = roots(p);
  res = residues(p, rts);
  cplx sum = 0.0;
  for (size_t i = 0; i < rts.size(); ++i) {
    const cplx want = rts[i] == 0.0 ? cplx(-1.0) : cplx(0.5);
    CHECK(std::abs(res[i] - want) < 1e-14);
    sum += res[i];
  }
  CHECK(std::abs(sum) < 1e-14);

  p = build_P(1, {1.0});
  rts = roots(p);
  res = residues(p, rts);
  for (size_t i = 0; i < rts.size(); ++i) CHECK(std::abs(res[i] - 1.0 / (2.0 * rts[i])) < 1e-14);

  CHECK_THROWS_AS(residues(build_P(1, {0.0})), DegenerateError);
}

TEST_CASE("residue sum against a loop integral") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> un(0.05, 1.0);
  for (int k = 1; k <= 3; ++k)
    for (int t = 0; t < 30; ++t) {
      CVec e = random_eps(rng, k, un(rng));
      auto p = build_P(k, e);
      cplx sum = 0.0;
      for (auto r : residues(p)) sum += r;
      // trapezoid rule on a circle is spectrally accurate
      const double R = 2 * std::sqrt(double(k)) * eps_norm(e) + 1.0;
      const int M = 512;
      cplx loop = 0.0;
      for (int j = 0; j < M; ++j) {
        const cplx x = std::polar(R, 2 * kPi * j / M);
        loop += x / p(x);
      }
      loop /= double(M);
      CHECK(std::abs(loop - sum) < 1e-9);
      if (k >= 2) CHECK(std::abs(sum) < 1e-9);
    }
}

TEST_CASE("discriminant membership") {
  CHECK(in_discriminant({0.0}));
  CHECK_FALSE(in_discriminant({-1.0}));
  // (x - a)^2 (x + 2a) = x^3 - 3a^2 x + 2a^3
  const cplx a(0.4, 0.3);
  CHECK(in_discriminant({2.0 * a * a * a, -3.0 * a * a}));
  CHECK_FALSE(in_discriminant({2.0 * a * a * a + 0.01, -3.0 * a * a}));
}

TEST_CASE("polynomial division") {
  auto [q, r] = poly_divmod({1.0, 1.0, 0.0, 1.0}, {-1.0, 0.0, 1.0});
  // x^3 + x + 1 = x (x^2 - 1) + 2x + 1
  CHECK(q.size() == 2);
  CHECK(std::abs(q[1] - 1.0) < 1e-15);
  CHECK(std::abs(r[0] - 1.0) < 1e-15);
  CHECK(std::abs(r[1] - 2.0) < 1e-15);
}
