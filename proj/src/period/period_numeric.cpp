// Contour-integral route for the k = 1 model period.
//
// With x = s (2z - 1) the integrand x^n Hhat(x,1)^{-m} dx / P becomes, up to an
// elementary factor, s^n (2z-1)^n z^{beta-1} (1-z)^{alpha-1} dz with
//   alpha = m (1 + s mu) / (2s),  beta = -m (1 - s mu) / (2s).
// The Pochhammer loop around z = 0 and z = 1 gives the regularized Beta-type
// integral; when one exponent has real part >= 2 a single loop based at the
// corresponding endpoint avoids the cancellation of the double commutator.
// Arithmetic is carried out with 50 significant digits: for |s| small and
// arg s near 3pi/2 the Pochhammer integral cancels by more than 20 orders.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <functional>
#include <sstream>
#include <vector>

#include "unfolding/errors.hpp"
#include "unfolding/period.hpp"

namespace unfolding {

namespace {

using mpf = boost::multiprecision::cpp_bin_float_50;
using mpc = boost::multiprecision::cpp_complex_50;
using GL = boost::math::quadrature::gauss<mpf, 20>;

const mpf& mp_pi() {
  static const mpf v = boost::math::constants::pi<mpf>();
  return v;
}

mpc to_mp(cplx z) { return mpc(mpf(z.real()), mpf(z.imag())); }
cplx to_d(const mpc& z) { return cplx(static_cast<double>(z.real()), static_cast<double>(z.imag())); }

const mpc& mp_i() {
  static const mpc v(mpf(0), mpf(1));
  return v;
}

// 20-point Gauss-Legendre on each of `panels` equal pieces of [0, 1].
template <class F>
mpc composite(F&& f, int panels) {
  const auto& a = GL::abscissa();
  const auto& w = GL::weights();
  mpc total = 0;
  const mpf h = mpf(1) / panels;
  for (int p = 0; p < panels; ++p) {
    const mpf mid = h * (mpf(p) + mpf(0.5));
    const mpf half = h / 2;
    for (size_t i = 0; i < a.size(); ++i) {
      total += w[i] * half * (f(mid + half * a[i]) + f(mid - half * a[i]));
    }
  }
  return total;
}

struct Setup {
  int n;
  mpc s, alpha, beta;
  mpf r;  // circle radius in the z-plane
  bool magnitude = false;  // integrate |f dz| instead of f dz

  mpc out(const mpc& v) const { return magnitude ? mpc(abs(v)) : v; }
};

// s^n (2z-1)^n exp((beta-1) lz + (alpha-1) l1)
mpc integrand(const Setup& S, const mpc& z, const mpc& lz, const mpc& l1) {
  mpc x = S.s * (mpf(2) * z - mpf(1));
  mpc v = exp((S.beta - mpf(1)) * lz + (S.alpha - mpf(1)) * l1);
  for (int i = 0; i < S.n; ++i) v *= x;
  return v;
}

// Pochhammer loop based at z = 1/2: around 1 (+), 0 (+), 1 (-), 0 (-).
mpc pochhammer(const Setup& S, int panels) {
  const mpf zb(0.5);
  const mpc twopii = mpf(2) * mp_pi() * mp_i();
  int kz = 0, k1 = 0;
  mpc total = 0;
  const std::pair<int, int> order[] = {{1, 1}, {0, 1}, {1, -1}, {0, -1}};
  for (auto [c, sg] : order) {
    const mpf e = c == 1 ? mpf(1) - S.r : S.r;
    auto seg = [&](const mpf& z0, const mpf& z1) {
      return composite(
          [&](const mpf& t) {
            mpf z = z0 + (z1 - z0) * t;
            mpc lz = mpc(log(z)) + twopii * mpf(kz);
            mpc l1 = mpc(log(mpf(1) - z)) + twopii * mpf(k1);
            return S.out(integrand(S, mpc(z), lz, l1) * mpc(z1 - z0));
          },
          panels);
    };
    total += seg(zb, e);
    const mpf th0 = c == 1 ? mp_pi() : mpf(0);
    total += composite(
        [&](const mpf& t) {
          const mpf th = th0 + mpf(sg) * 2 * mp_pi() * t;
          const mpc ei = exp(mp_i() * th);
          const mpc z = mpf(c) + S.r * ei;
          const mpc dz = mp_i() * mpf(sg) * 2 * mp_pi() * S.r * ei;
          mpc lz, l1;
          if (c == 0) {
            lz = mpc(log(S.r)) + mp_i() * th + twopii * mpf(kz);
            l1 = log(mpf(1) - z) + twopii * mpf(k1);
          } else {
            lz = log(z) + twopii * mpf(kz);
            l1 = mpc(log(S.r)) + mp_i() * (th - mp_pi()) + twopii * mpf(k1);
          }
          return S.out(integrand(S, z, lz, l1) * dz);
        },
        panels);
    if (c == 0)
      kz += sg;
    else
      k1 += sg;
    total += seg(e, zb);
  }
  return total;
}

// Loop based at z = 0 around z = 1 counterclockwise (base = 0), or based at
// z = 1 around z = 0 counterclockwise (base = 1).  The straight legs use the
// substitution z = end * u^4 toward the base point.
mpc endpoint_loop(const Setup& S, int base, int panels) {
  const mpc twopii = mpf(2) * mp_pi() * mp_i();
  const mpf len = mpf(1) - S.r;
  auto leg = [&](int k_after) {
    // integral from the base point to the circle, with branch offset k_after on the
    // base-point factor's complement
    return composite(
        [&](const mpf& u) {
          const mpf u3 = u * u * u;
          const mpf d = len * u3 * u;  // distance from base
          const mpf z = base == 0 ? d : mpf(1) - d;
          const mpf dzdu = (base == 0 ? 1 : -1) * 4 * len * u3;
          if (d == 0) return mpc(0);
          mpc lz = mpc(log(z));
          mpc l1 = mpc(log(mpf(1) - z));
          if (base == 0)
            l1 += twopii * mpf(k_after);
          else
            lz += twopii * mpf(k_after);
          return S.out(integrand(S, mpc(z), lz, l1) * mpc(dzdu));
        },
        panels);
  };
  mpc total = leg(0);
  const int c = base == 0 ? 1 : 0;
  const mpf th0 = c == 1 ? mp_pi() : mpf(0);
  total += composite(
      [&](const mpf& t) {
        const mpf th = th0 + 2 * mp_pi() * t;
        const mpc ei = exp(mp_i() * th);
        const mpc z = mpf(c) + S.r * ei;
        const mpc dz = mp_i() * 2 * mp_pi() * S.r * ei;
        mpc lz, l1;
        if (c == 0) {
          lz = mpc(log(S.r)) + mp_i() * th;
          l1 = log(mpf(1) - z);
        } else {
          lz = log(z);
          l1 = mpc(log(S.r)) + mp_i() * (th - mp_pi());
        }
        return S.out(integrand(S, z, lz, l1) * dz);
      },
      panels);
  total += S.magnitude ? leg(1) : mpc(-leg(1));
  return total;
}

struct Raw {
  mpc value;
  double err;
  std::string route;
};

Raw raw_numeric(int n, int m, cplx mu_d, cplx s_d, const QuadratureOptions& opt) {
  Setup S;
  S.n = n;
  S.s = to_mp(s_d);
  const mpc mu = to_mp(mu_d);
  const mpf md(m);
  S.alpha = md * (mpf(1) + S.s * mu) / (mpf(2) * S.s);
  S.beta = -md * (mpf(1) - S.s * mu) / (mpf(2) * S.s);
  S.r = mpf(0.2);

  const mpc twopii = mpf(2) * mp_pi() * mp_i();
  // (-m)^{m mu} (-2s/m)^{m mu} (m / 2s) / (2 pi i e^{i pi alpha})
  const mpc common = exp(md * mu * (mpc(log(md)) + mp_pi() * mp_i())) * exp(md * mu * log(-mpf(2) * S.s / md)) *
                     (md / (mpf(2) * S.s)) / (twopii * exp(mp_i() * mp_pi() * S.alpha));
  const mpc eb = mpf(1) - exp(twopii * S.beta);
  const mpc ea = mpf(1) - exp(twopii * S.alpha);

  std::string route;
  std::function<mpc(int)> integral;
  mpc factor;
  if (S.beta.real() >= 2) {
    route = "loop0";
    integral = [&](int panels) { return endpoint_loop(S, 0, panels); };
    factor = common;
  } else if (S.alpha.real() >= 2) {
    route = "loop1";
    integral = [&](int panels) { return endpoint_loop(S, 1, panels); };
    factor = -ea * common / eb;
  } else {
    route = "pochhammer";
    integral = [&](int panels) { return pochhammer(S, panels); };
    factor = common / eb;
  }
  if (abs(eb) < mpf(1e-30) && route != "loop0")
    throw NumericError("period_numeric_k1: exp(2 pi i beta) = 1 and no loop route applies");

  auto panels_for = [](int M) { return std::max(1, (M + 19) / 20); };
  int M = opt.M0;
  // Absolute floor for integrals that vanish by cancellation.
  S.magnitude = true;
  const mpf l1norm = abs(integral(panels_for(M)));
  S.magnitude = false;
  mpc prev = integral(panels_for(M));
  while (true) {
    M *= 2;
    if (M > opt.Mmax) {
      std::ostringstream os;
      os << "period_numeric_k1: quadrature did not converge by " << opt.Mmax << " nodes per arc";
      throw NumericError(os.str());
    }
    mpc cur = integral(panels_for(M));
    const mpf diff = abs(cur - prev);
    const mpf size = std::max<mpf>(mpf(abs(cur)), mpf(1e-30) * l1norm);
    prev = cur;
    if (diff <= mpf(opt.tol) * size) {
      return {cur * factor, size == 0 ? 0.0 : static_cast<double>(diff / size), route};
    }
  }
}

}  // namespace

cplx period_normalization_constant() {
  static const cplx kappa = [] {
    const cplx mu(0.3, 0.1), s(0.0, 0.2);
    const Raw raw = raw_numeric(0, 1, mu, s, QuadratureOptions{});
    return period_model_k1(0, 1, mu, s).coefficient / to_d(raw.value);
  }();
  return kappa;
}

PeriodTerm period_numeric_k1(int n, int m, cplx mu, cplx s, const QuadratureOptions& opt) {
  if (n < 0 || m < 1) throw ArgumentError("period_numeric_k1: need n >= 0, m >= 1");
  check_sector(s, mu);
  const Raw raw = raw_numeric(n, m, mu, s, opt);
  PeriodTerm t;
  t.m = m;
  t.route = raw.route;
  t.error_estimate = raw.err;
  t.coefficient = period_normalization_constant() * to_d(raw.value);
  return t;
}

}  // namespace unfolding
