#pragma once

#include <optional>

#include "unfolding/cpoly.hpp"

namespace unfolding {

// h -> sum_{p>=1} c_p h^p; coeffs[p-1] holds c_p.
struct GermMap {
  CVec coeffs;
  // Set when the map is exactly t h^m.
  std::optional<std::pair<cplx, int>> monomial_tag;

  GermMap() = default;
  explicit GermMap(CVec c) : coeffs(std::move(c)) {}

  int order() const { return static_cast<int>(coeffs.size()); }
  cplx coeff(int p) const { return p >= 1 && p <= order() ? coeffs[p - 1] : cplx(0.0); }
  cplx operator()(cplx h) const;
  GermMap truncated(int N) const;

  static GermMap zero(int N);
  static GermMap identity(int N);
  static GermMap linear(cplx a, int N);
  static GermMap monomial(cplx t, int m, int N);
};

// f o g through min order.
GermMap compose(const GermMap& f, const GermMap& g);
GermMap inverse(const GermMap& f);
GermMap operator+(const GermMap& a, const GermMap& b);
GermMap operator-(const GermMap& a, const GermMap& b);
double max_abs_diff(const GermMap& a, const GermMap& b, int upto = -1);

// Plain truncated power series in one variable, index = degree.
namespace series1 {
CVec mul(const CVec& a, const CVec& b, int N);
CVec exp(const CVec& a, int N);  // a[0] must vanish
CVec log(const CVec& a, int N);  // a[0] must be 1
CVec pow(const CVec& a, cplx e, int N);  // a[0] must be 1
}  // namespace series1

// h exp(c + phi(h)); phi is an additive germ (zero constant term).
GermMap exp_germ(cplx c, const GermMap& phi, int N);
// Additive germ log(psi(h)/h) - log psi'(0).
GermMap log_germ(const GermMap& psi, int N);

}  // namespace unfolding
