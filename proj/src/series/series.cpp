#include "unfolding/series.hpp"

#include <algorithm>
#include <cmath>

#include "unfolding/errors.hpp"

namespace unfolding {

TSeries::TSeries(int nx, int ny) : nx_(nx), ny_(ny), ex_(nx), ey_(ny), c_((nx + 1) * (ny + 1), 0.0) {
  if (nx < 0 || ny < 0) throw ArgumentError("TSeries: negative truncation order");
}

TSeries TSeries::constant(cplx c, int nx, int ny) {
  TSeries s(nx, ny);
  s(0, 0) = c;
  return s;
}

TSeries TSeries::x(int nx, int ny) { return monomial(1, 0, 1.0, nx, ny); }
TSeries TSeries::y(int nx, int ny) { return monomial(0, 1, 1.0, nx, ny); }

TSeries TSeries::monomial(int i, int j, cplx c, int nx, int ny) {
  TSeries s(nx, ny);
  if (i <= nx && j <= ny) s(i, j) = c;
  return s;
}

TSeries TSeries::from_poly(const CVec& coeffs, int nx, int ny) {
  TSeries s(nx, ny);
  for (int i = 0; i < static_cast<int>(coeffs.size()) && i <= nx; ++i) s(i, 0) = coeffs[i];
  return s;
}

void TSeries::set_effective(int ex, int ey) {
  ex_ = std::clamp(ex, -1, nx_);
  ey_ = std::clamp(ey, -1, ny_);
}

cplx TSeries::coeff(int i, int j) const {
  if (i < 0 || j < 0 || i > nx_ || j > ny_) return 0.0;
  return (*this)(i, j);
}

int TSeries::valuation_x() const {
  for (int i = 0; i <= ex_; ++i)
    for (int j = 0; j <= std::max(ey_, -1); ++j)
      if ((*this)(i, j) != 0.0) return i;
  return ex_ + 1;
}

int TSeries::valuation_y() const {
  for (int j = 0; j <= ey_; ++j)
    for (int i = 0; i <= std::max(ex_, -1); ++i)
      if ((*this)(i, j) != 0.0) return j;
  return ey_ + 1;
}

TSeries TSeries::resized(int nx, int ny) const {
  TSeries s(nx, ny);
  for (int i = 0; i <= std::min(nx, nx_); ++i)
    for (int j = 0; j <= std::min(ny, ny_); ++j) s(i, j) = (*this)(i, j);
  s.set_effective(std::min(ex_, nx), std::min(ey_, ny));
  return s;
}

CVec TSeries::y_slice(int j) const {
  CVec out(nx_ + 1, 0.0);
  if (j < 0 || j > ny_) return out;
  for (int i = 0; i <= nx_; ++i) out[i] = (*this)(i, j);
  return out;
}

void TSeries::set_y_slice(int j, const CVec& poly) {
  for (int i = 0; i <= nx_; ++i) (*this)(i, j) = i < static_cast<int>(poly.size()) ? poly[i] : cplx(0.0);
}

bool TSeries::is_zero(double tol) const {
  for (int i = 0; i <= ex_; ++i)
    for (int j = 0; j <= ey_; ++j)
      if (std::abs((*this)(i, j)) > tol) return false;
  return true;
}

double TSeries::max_abs() const {
  double m = 0.0;
  for (int i = 0; i <= ex_; ++i)
    for (int j = 0; j <= ey_; ++j) m = std::max(m, std::abs((*this)(i, j)));
  return m;
}

cplx TSeries::eval(cplx x, cplx y) const {
  cplx acc = 0.0;
  for (int i = nx_; i >= 0; --i) {
    cplx row = 0.0;
    for (int j = ny_; j >= 0; --j) row = row * y + (*this)(i, j);
    acc = acc * x + row;
  }
  return acc;
}

TSeries TSeries::operator-() const {
  TSeries s(*this);
  for (auto& v : s.c_) v = -v;
  return s;
}

TSeries& TSeries::operator+=(const TSeries& o) {
  *this = *this + o;
  return *this;
}

TSeries& TSeries::operator-=(const TSeries& o) {
  *this = *this - o;
  return *this;
}

TSeries& TSeries::operator*=(cplx s) {
  for (auto& v : c_) v *= s;
  return *this;
}

TSeries arith(const TSeries& a, const TSeries& b, ArithOp op) {
  const int nx = std::min(a.nx(), b.nx());
  const int ny = std::min(a.ny(), b.ny());
  TSeries r(nx, ny);
  if (op == ArithOp::mul) {
    for (int i1 = 0; i1 <= nx; ++i1)
      for (int j1 = 0; j1 <= ny; ++j1) {
        cplx av = a(i1, j1);
        if (av == 0.0) continue;
        for (int i2 = 0; i1 + i2 <= nx; ++i2)
          for (int j2 = 0; j1 + j2 <= ny; ++j2) r(i1 + i2, j1 + j2) += av * b(i2, j2);
      }
    r.set_effective(std::min(a.ex() + b.valuation_x(), b.ex() + a.valuation_x()),
                    std::min(a.ey() + b.valuation_y(), b.ey() + a.valuation_y()));
    return r;
  }
  const double sign = op == ArithOp::add ? 1.0 : -1.0;
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) r(i, j) = a(i, j) + sign * b(i, j);
  r.set_effective(std::min(a.ex(), b.ex()), std::min(a.ey(), b.ey()));
  return r;
}

TSeries operator+(const TSeries& a, const TSeries& b) { return arith(a, b, ArithOp::add); }
TSeries operator-(const TSeries& a, const TSeries& b) { return arith(a, b, ArithOp::sub); }
TSeries operator*(const TSeries& a, const TSeries& b) { return arith(a, b, ArithOp::mul); }

TSeries operator*(cplx s, const TSeries& a) {
  TSeries r(a);
  r *= s;
  return r;
}

TSeries exp_series(const TSeries& a) {
  if (std::abs(a(0, 0)) > 1e-14) throw ArgumentError("exp_series: constant term must vanish");
  TSeries b(a);
  b(0, 0) = 0.0;
  TSeries sum = TSeries::constant(1.0, a.nx(), a.ny());
  sum.set_effective(a.ex(), a.ey());
  TSeries term = sum;
  for (int n = 1; n <= a.nx() + a.ny(); ++n) {
    term = (1.0 / n) * (term * b);
    if (term.is_zero()) break;
    sum += term;
  }
  return sum;
}

TSeries log_series(const TSeries& a) {
  if (std::abs(a(0, 0) - 1.0) > 1e-14) throw ArgumentError("log_series: constant term must be 1");
  TSeries b(a);
  b(0, 0) = 0.0;
  TSeries sum(a.nx(), a.ny());
  sum.set_effective(a.ex(), a.ey());
  TSeries power = TSeries::constant(1.0, a.nx(), a.ny());
  for (int n = 1; n <= a.nx() + a.ny(); ++n) {
    power = power * b;
    if (power.is_zero()) break;
    sum += ((n % 2 == 1 ? 1.0 : -1.0) / n) * power;
  }
  return sum;
}

TSeries inverse_series(const TSeries& a) {
  const cplx a0 = a(0, 0);
  if (a0 == 0.0) throw ArgumentError("inverse_series: constant term vanishes");
  TSeries b = (-1.0 / a0) * a;
  b(0, 0) = 0.0;
  TSeries sum = TSeries::constant(1.0, a.nx(), a.ny());
  sum.set_effective(a.ex(), a.ey());
  TSeries power = sum;
  for (int n = 1; n <= a.nx() + a.ny(); ++n) {
    power = power * b;
    if (power.is_zero()) break;
    sum += power;
  }
  return (1.0 / a0) * sum;
}

TSeries d_dx(const TSeries& a) {
  TSeries r(a.nx(), a.ny());
  for (int i = 1; i <= a.nx(); ++i)
    for (int j = 0; j <= a.ny(); ++j) r(i - 1, j) = double(i) * a(i, j);
  r.set_effective(a.ex() - 1, a.ey());
  return r;
}

TSeries d_dy(const TSeries& a) {
  TSeries r(a.nx(), a.ny());
  for (int i = 0; i <= a.nx(); ++i)
    for (int j = 1; j <= a.ny(); ++j) r(i, j - 1) = double(j) * a(i, j);
  r.set_effective(a.ex(), a.ey() - 1);
  return r;
}

TSeries compose_y(const TSeries& f, const TSeries& g) {
  for (int i = 0; i <= g.nx(); ++i)
    if (std::abs(g(i, 0)) > 1e-14) throw ArgumentError("compose_y: inner series must vanish on y = 0");
  const int nx = std::min(f.nx(), g.nx());
  const int ny = std::min(f.ny(), g.ny());
  const int top = std::min(f.ey(), ny);
  auto slice = [&](int j) {
    TSeries s = TSeries::from_poly(f.y_slice(j), nx, ny);
    s.set_effective(f.ex(), ny);
    return s;
  };
  TSeries acc = top >= 0 ? slice(top) : TSeries(nx, ny);
  for (int j = top - 1; j >= 0; --j) acc = acc * g + slice(j);
  const int vy = std::max(1, g.valuation_y());
  acc.set_effective(acc.ex(), std::min(acc.ey(), (top + 1) * vy - 1));
  return acc;
}

TSeries lie_derivative(const VField& field, const TSeries& f) {
  return field.A * d_dx(f) + field.B * d_dy(f);
}

LieExpResult lie_exp(const VField& field, const TSeries& f, cplx t) {
  for (const TSeries* c : {&field.A, &field.B})
    if (std::abs((*c)(0, 0)) > 1e-14) throw ArgumentError("lie_exp: field must vanish at the origin");
  LieExpResult res{f, 1, true};
  if (t == 0.0) return res;
  const int max_terms = 4 * (f.nx() + f.ny());
  TSeries term = f;
  for (int n = 1;; ++n) {
    if (n > max_terms) {
      res.stabilized = false;
      break;
    }
    term = (t / double(n)) * lie_derivative(field, term);
    const double tm = term.max_abs();
    if (tm == 0.0) break;
    res.value += term;
    res.terms = n + 1;
    if (tm <= 1e-17 * res.value.max_abs()) break;
  }
  return res;
}

void UnfoldingField::validate() const {
  const int k = p.k;
  if (tau < 0) throw ArgumentError("UnfoldingField: tau must be >= 0");
  for (const auto& m : r)
    if (m.i < 1 || m.i > k || m.n < 1) throw ArgumentError("UnfoldingField: R monomial outside the section (1 <= i <= k, n >= 1)");
  for (const auto& m : q)
    if (m.i < 1 || m.i > k || m.n < 1) throw ArgumentError("UnfoldingField: Q monomial outside the section (1 <= i <= k, n >= 1)");
  if (u_poly.empty() || static_cast<int>(u_poly.size()) > k + 1)
    throw ArgumentError("UnfoldingField: u must have degree <= k");
  if (u_poly[0] == 0.0) throw ArgumentError("UnfoldingField: u(0) must be nonzero");
}

VField UnfoldingField::orbital(int nx, int ny) const {
  const int k = p.k;
  VField f{TSeries::from_poly(p.coeffs, nx, ny), TSeries(nx, ny)};
  CVec lin{1.0};
  lin.resize(k + 1, 0.0);
  lin[k] += mu;
  if (tau > 0) lin = poly_add(lin, poly_scale(p.derivative_coeffs(), double(tau)));
  for (int i = 0; i < static_cast<int>(lin.size()) && i <= nx; ++i)
    if (ny >= 1) f.B(i, 1) += lin[i];
  const CVec ptau = poly_pow(p.coeffs, tau);
  for (const auto& m : r) {
    if (m.n + 1 > ny) continue;
    const CVec w = poly_pow(ptau, m.n);
    for (int i = 0; i < static_cast<int>(w.size()) && m.i + i <= nx; ++i) f.B(m.i + i, m.n + 1) += m.c * w[i];
  }
  return f;
}

TSeries UnfoldingField::time_factor(int nx, int ny) const {
  TSeries u = TSeries::from_poly(u_poly, nx, ny);
  if (q.empty()) return u;
  TSeries qs(nx, ny);
  for (const auto& m : q)
    if (m.i <= nx && m.n <= ny) qs(m.i, m.n) += m.c;
  return u * inverse_series(TSeries::constant(1.0, nx, ny) + u * qs);
}

VField UnfoldingField::temporal(int nx, int ny) const {
  VField x = orbital(nx, ny);
  TSeries u = time_factor(nx, ny);
  return {u * x.A, u * x.B};
}

cplx UnfoldingField::r_value(cplx x, cplx y) const {
  const cplx yy = tau > 0 ? std::pow(p(x), tau) * y : y;
  cplx acc = 0.0;
  for (const auto& m : r) acc += m.c * std::pow(x, m.i) * std::pow(yy, m.n);
  return acc;
}

cplx UnfoldingField::ydot_over_y(cplx x, cplx y) const {
  cplx v = 1.0 + mu * std::pow(x, p.k) + r_value(x, y);
  if (tau > 0) v += double(tau) * p.deriv(x);
  return v;
}

TSeries tau_twist(const TSeries& f, const CPoly& p, int tau) {
  if (tau < 0) throw ArgumentError("tau_twist: tau must be >= 0");
  if (tau == 0) return f;
  TSeries r(f.nx(), f.ny());
  const CVec pt = poly_pow(p.coeffs, tau);
  CVec w{1.0};
  for (int j = 0; j <= f.ny(); ++j) {
    CVec s = poly_mul(f.y_slice(j), w);
    s.resize(f.nx() + 1);
    r.set_y_slice(j, s);
    w = poly_mul(w, pt);
    if (static_cast<int>(w.size()) > f.nx() + 1) w.resize(f.nx() + 1);
  }
  r.set_effective(f.ex(), f.ey());
  return r;
}

UnfoldingField tau_twist(const UnfoldingField& f, int tau) {
  if (tau < 0) throw ArgumentError("tau_twist: tau must be >= 0");
  UnfoldingField g = f;
  g.tau += tau;
  return g;
}

}  // namespace unfolding
