#pragma once

#include <vector>

#include "unfolding/cpoly.hpp"

namespace unfolding {

// Truncated power series in (x, y): coefficients of x^i y^j for i <= nx, j <= ny.
// ex/ey record the box of exact coefficients: (i, j) is trustworthy when
// i <= ex and j <= ey.  Operations propagate these bounds.
class TSeries {
 public:
  explicit TSeries(int nx = 24, int ny = 12);

  static TSeries constant(cplx c, int nx = 24, int ny = 12);
  static TSeries x(int nx = 24, int ny = 12);
  static TSeries y(int nx = 24, int ny = 12);
  static TSeries monomial(int i, int j, cplx c, int nx = 24, int ny = 12);
  // Polynomial in x only.
  static TSeries from_poly(const CVec& coeffs, int nx = 24, int ny = 12);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int ex() const { return ex_; }
  int ey() const { return ey_; }
  void set_effective(int ex, int ey);

  cplx& operator()(int i, int j) { return c_[i * (ny_ + 1) + j]; }
  cplx operator()(int i, int j) const { return c_[i * (ny_ + 1) + j]; }
  cplx coeff(int i, int j) const;

  // First index carrying a nonzero exact coefficient, capped at ex+1 / ey+1.
  int valuation_x() const;
  int valuation_y() const;

  TSeries resized(int nx, int ny) const;
  // Coefficient of y^j as a polynomial in x.
  CVec y_slice(int j) const;
  void set_y_slice(int j, const CVec& poly);
  bool is_zero(double tol = 0.0) const;
  double max_abs() const;

  cplx eval(cplx x, cplx y) const;

  TSeries operator-() const;
  TSeries& operator+=(const TSeries& o);
  TSeries& operator-=(const TSeries& o);
  TSeries& operator*=(cplx s);

 private:
  int nx_, ny_;
  int ex_, ey_;
  std::vector<cplx> c_;
};

TSeries operator+(const TSeries& a, const TSeries& b);
TSeries operator-(const TSeries& a, const TSeries& b);
TSeries operator*(const TSeries& a, const TSeries& b);
TSeries operator*(cplx s, const TSeries& a);

enum class ArithOp { add, sub, mul };
TSeries arith(const TSeries& a, const TSeries& b, ArithOp op);

TSeries exp_series(const TSeries& a);
TSeries log_series(const TSeries& a);
TSeries inverse_series(const TSeries& a);
TSeries d_dx(const TSeries& a);
TSeries d_dy(const TSeries& a);
// f(x, g(x, y)); g must vanish on y = 0.
TSeries compose_y(const TSeries& f, const TSeries& g);

// A pair of series: x-dot and y-dot components.
struct VField {
  TSeries A;
  TSeries B;
};

TSeries lie_derivative(const VField& field, const TSeries& f);

struct LieExpResult {
  TSeries value;
  int terms = 0;
  bool stabilized = true;
};
LieExpResult lie_exp(const VField& field, const TSeries& f, cplx t);

struct RMonomial {
  int i = 1;
  int n = 1;
  cplx c = 0.0;
};

// X = P d/dx + y (1 + mu x^k + tau P' + R(x, P^tau y)) d/dy with
// R = sum c x^i (P^tau y)^n, and Z = u/(1 + u Q) X.  Q uses the same monomial encoding.
struct UnfoldingField {
  CPoly p;
  cplx mu = 0.0;
  int tau = 0;
  std::vector<RMonomial> r;
  CVec u_poly{1.0};
  std::vector<RMonomial> q;

  void validate() const;
  VField orbital(int nx = 24, int ny = 12) const;
  VField temporal(int nx = 24, int ny = 12) const;
  TSeries time_factor(int nx = 24, int ny = 12) const;
  // Pointwise ydot / y of the orbital field.
  cplx ydot_over_y(cplx x, cplx y) const;
  cplx r_value(cplx x, cplx y) const;
};

TSeries tau_twist(const TSeries& f, const CPoly& p, int tau);
UnfoldingField tau_twist(const UnfoldingField& f, int tau);

}  // namespace unfolding
