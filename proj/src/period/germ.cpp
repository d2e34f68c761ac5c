#include "unfolding/germ.hpp"

#include <algorithm>
#include <cmath>

#include "unfolding/errors.hpp"

namespace unfolding {

cplx GermMap::operator()(cplx h) const {
  cplx acc = 0.0;
  for (int p = order(); p >= 1; --p) acc = (acc + coeffs[p - 1]) * h;
  return acc;
}

GermMap GermMap::truncated(int N) const {
  GermMap g(coeffs);
  g.coeffs.resize(N, 0.0);
  if (monomial_tag && monomial_tag->second <= N) g.monomial_tag = monomial_tag;
  return g;
}

GermMap GermMap::zero(int N) { return GermMap(CVec(N, 0.0)); }

GermMap GermMap::identity(int N) { return linear(1.0, N); }

GermMap GermMap::linear(cplx a, int N) { return monomial(a, 1, N); }

GermMap GermMap::monomial(cplx t, int m, int N) {
  GermMap g(CVec(N, 0.0));
  if (m >= 1 && m <= N) g.coeffs[m - 1] = t;
  g.monomial_tag = std::make_pair(t, m);
  return g;
}

namespace series1 {

CVec mul(const CVec& a, const CVec& b, int N) {
  CVec out(N + 1, 0.0);
  for (int i = 0; i < static_cast<int>(a.size()) && i <= N; ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; j < static_cast<int>(b.size()) && i + j <= N; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

CVec exp(const CVec& a, int N) {
  if (!a.empty() && std::abs(a[0]) > 1e-14) throw ArgumentError("series exp: constant term must vanish");
  // e' = a' e
  CVec e(N + 1, 0.0);
  e[0] = 1.0;
  for (int n = 1; n <= N; ++n) {
    cplx acc = 0.0;
    for (int j = 1; j <= n && j < static_cast<int>(a.size()); ++j) acc += double(j) * a[j] * e[n - j];
    e[n] = acc / double(n);
  }
  return e;
}

CVec log(const CVec& a, int N) {
  if (a.empty() || std::abs(a[0] - 1.0) > 1e-14) throw ArgumentError("series log: constant term must be 1");
  // l' a = a'
  CVec l(N + 1, 0.0);
  auto at = [&](int i) { return i < static_cast<int>(a.size()) ? a[i] : cplx(0.0); };
  for (int n = 1; n <= N; ++n) {
    cplx acc = double(n) * at(n);
    for (int j = 1; j < n; ++j) acc -= double(j) * l[j] * at(n - j);
    l[n] = acc / double(n);
  }
  return l;
}

CVec pow(const CVec& a, cplx e, int N) {
  CVec l = log(a, N);
  for (auto& v : l) v *= e;
  return exp(l, N);
}

}  // namespace series1

GermMap compose(const GermMap& f, const GermMap& g) {
  const int N = std::min(f.order(), g.order());
  CVec gs(N + 1, 0.0);
  for (int p = 1; p <= N; ++p) gs[p] = g.coeff(p);
  // Horner: f(g) = g (c1 + g (c2 + ...))
  CVec acc(N + 1, 0.0);
  for (int p = N; p >= 1; --p) {
    acc[0] += f.coeff(p);
    acc = series1::mul(acc, gs, N);
  }
  GermMap out(CVec(acc.begin() + 1, acc.end()));
  if (f.monomial_tag && g.monomial_tag && g.monomial_tag->second == 1) {
    auto [t, m] = *f.monomial_tag;
    out.monomial_tag = std::make_pair(t * std::pow(g.monomial_tag->first, m), m);
  }
  return out;
}

GermMap inverse(const GermMap& f) {
  const int N = f.order();
  const cplx c1 = f.coeff(1);
  if (std::abs(c1) < 1e-300) throw ArgumentError("inverse: germ is not a diffeomorphism (c_1 = 0)");
  // Solve f(g(h)) = h order by order.
  GermMap g = GermMap::zero(N);
  g.coeffs[0] = 1.0 / c1;
  for (int p = 2; p <= N; ++p) {
    GermMap trial = g.truncated(p);
    cplx err = compose(f.truncated(p), trial).coeff(p);
    g.coeffs[p - 1] = -err / c1;
  }
  return g;
}

GermMap operator+(const GermMap& a, const GermMap& b) {
  const int N = std::max(a.order(), b.order());
  GermMap out(CVec(N, 0.0));
  for (int p = 1; p <= N; ++p) out.coeffs[p - 1] = a.coeff(p) + b.coeff(p);
  return out;
}

GermMap operator-(const GermMap& a, const GermMap& b) {
  const int N = std::max(a.order(), b.order());
  GermMap out(CVec(N, 0.0));
  for (int p = 1; p <= N; ++p) out.coeffs[p - 1] = a.coeff(p) - b.coeff(p);
  return out;
}

double max_abs_diff(const GermMap& a, const GermMap& b, int upto) {
  const int N = upto > 0 ? upto : std::max(a.order(), b.order());
  double m = 0.0;
  for (int p = 1; p <= N; ++p) m = std::max(m, std::abs(a.coeff(p) - b.coeff(p)));
  return m;
}

GermMap exp_germ(cplx c, const GermMap& phi, int N) {
  CVec a(N, 0.0);
  for (int p = 1; p < N; ++p) a[p] = phi.coeff(p);
  CVec e = series1::exp(a, N - 1);
  const cplx ec = std::exp(c);
  GermMap out(CVec(N, 0.0));
  for (int p = 1; p <= N; ++p) out.coeffs[p - 1] = ec * e[p - 1];
  return out;
}

GermMap log_germ(const GermMap& psi, int N) {
  const cplx c1 = psi.coeff(1);
  if (c1 == 0.0) throw ArgumentError("log_germ: c_1 = 0");
  CVec a(N, 0.0);
  for (int p = 0; p < N; ++p) a[p] = psi.coeff(p + 1) / c1;
  CVec l = series1::log(a, N - 1);
  GermMap out(CVec(N, 0.0));
  for (int p = 1; p < N; ++p) out.coeffs[p - 1] = l[p];
  return out;
}

}  // namespace unfolding
