#include "unfolding/normalform.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "unfolding/errors.hpp"

namespace unfolding {

namespace {

using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

CVec truncated(const CVec& a, int N) {
  CVec out(N + 1, 0.0);
  for (int i = 0; i < static_cast<int>(a.size()) && i <= N; ++i) out[i] = a[i];
  return out;
}

CVec mul_trunc(const CVec& a, const CVec& b, int N) {
  CVec out(N + 1, 0.0);
  for (int i = 0; i < static_cast<int>(a.size()) && i <= N; ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; j < static_cast<int>(b.size()) && i + j <= N; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// Matrix of f -> a f' + c f on polynomials of degree <= N, with f_{N+1} = 0.
Mat first_order_operator(const CVec& a, const CVec& c, int N) {
  Mat M = Mat::Zero(N + 1, N + 1);
  for (int col = 0; col <= N; ++col) {
    for (int i = 0; i < static_cast<int>(a.size()); ++i) {
      int row = col - 1 + i;
      if (col >= 1 && row <= N) M(row, col) += a[i] * double(col);
    }
    for (int i = 0; i < static_cast<int>(c.size()); ++i) {
      int row = col + i;
      if (row <= N) M(row, col) += c[i];
    }
  }
  return M;
}

CVec solve_dense(const Mat& M, const CVec& rhs) {
  const int n = static_cast<int>(rhs.size());
  Vec b(n);
  for (int i = 0; i < n; ++i) b(i) = rhs[i];
  Eigen::PartialPivLU<Mat> lu(M);
  Vec x = lu.solve(b);
  // Gevrey growth makes |x| large, so measure the residual against |M| |x|.
  const double scale = std::max({1.0, b.cwiseAbs().maxCoeff(), M.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff()});
  if (!x.allFinite() || (M * x - b).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw NumericError("linear slice equation is singular at this parameter");
  return CVec(x.data(), x.data() + n);
}

// sum_j S_j(x) s(x)^j truncated at degree N, S given by y-slices.
CVec substitute_y(const TSeries& S, const CVec& s, int N) {
  CVec acc(N + 1, 0.0);
  for (int j = S.ny(); j >= 0; --j) {
    acc = mul_trunc(acc, s, N);
    CVec sl = S.y_slice(j);
    for (int i = 0; i <= N && i < static_cast<int>(sl.size()); ++i) acc[i] += sl[i];
  }
  return acc;
}

CVec deriv_trunc(const CVec& a, int N) {
  CVec out(N + 1, 0.0);
  for (int i = 1; i < static_cast<int>(a.size()) && i - 1 <= N; ++i) out[i - 1] = a[i] * double(i);
  return out;
}

}  // namespace

CVec solve_center_manifold(const TSeries& Ax, const TSeries& Ay, int k, int N) {
  if (N < 0) throw ArgumentError("solve_center_manifold: N must be >= 0");
  if (k < 1) throw ArgumentError("solve_center_manifold: k must be >= 1");
  const CVec a0 = truncated(Ax.y_slice(0), N);
  const CVec g = truncated(Ay.y_slice(0), N);
  const CVec h = truncated(Ay.y_slice(1), N);
  if (std::abs(h[0]) < 1e-14) throw DegenerateError("solve_center_manifold: singular point is not elementary (h(0) = 0)");

  CVec minus_h(h);
  for (auto& v : minus_h) v = -v;
  Eigen::PartialPivLU<Mat> lu(first_order_operator(a0, minus_h, N));

  CVec s(N + 1, 0.0);
  const int max_iter = 4 * (N + 2) + 50;
  for (int it = 0; it < max_iter; ++it) {
    // L s = g - NL(s), NL(s) = s' (Ax(x,s) - a0) - (Ay(x,s) - g - h s)
    const CVec ds = deriv_trunc(s, N);
    CVec ax = substitute_y(Ax, s, N), ay = substitute_y(Ay, s, N);
    const CVec hs = mul_trunc(h, s, N);
    Vec rhs(N + 1);
    for (int i = 0; i <= N; ++i) {
      ax[i] -= a0[i];
      ay[i] -= g[i] + hs[i];
    }
    const CVec t = mul_trunc(ds, ax, N);
    for (int i = 0; i <= N; ++i) rhs(i) = g[i] - (t[i] - ay[i]);
    Vec sn = lu.solve(rhs);
    if (!sn.allFinite()) throw NumericError("solve_center_manifold: non-finite iterate");
    double change = 0.0, size = 1.0;
    for (int i = 0; i <= N; ++i) {
      change = std::max(change, std::abs(sn(i) - s[i]));
      size = std::max(size, std::abs(sn(i)));
      s[i] = sn(i);
    }
    if (change <= 1e-14 * size) return s;
  }
  throw NumericError("solve_center_manifold: fixed-point iteration did not settle");
}

CohomologicalSolution solve_cohomological(const UnfoldingField& field, const TSeries& G) {
  field.validate();
  const CPoly& p = field.p;
  const int k = p.k;
  const int N = G.nx();
  const int ny = G.ny();
  const VField X = field.orbital(N, ny);

  CohomologicalSolution out{TSeries(N, ny), {}};
  auto [quot, rem] = poly_divmod(G.y_slice(0), p.coeffs);
  rem.resize(k + 1, 0.0);
  out.obstruction = rem;
  for (int i = 1; i <= N; ++i) out.F(i, 0) = (i - 1 < static_cast<int>(quot.size())) ? quot[i - 1] / double(i) : cplx(0.0);

  const CVec h = X.B.y_slice(1);
  const CVec P = truncated(p.coeffs, N);
  for (int n = 1; n <= ny; ++n) {
    CVec rhs = G.y_slice(n);
    for (int l = 1; l < n; ++l) {
      const CVec Rl = X.B.y_slice(l + 1);
      const CVec term = mul_trunc(out.F.y_slice(n - l), Rl, N);
      for (int i = 0; i <= N; ++i) rhs[i] -= double(n - l) * term[i];
    }
    CVec nh(h);
    for (auto& v : nh) v *= double(n);
    out.F.set_y_slice(n, solve_dense(first_order_operator(P, nh, N), rhs));
  }
  out.F.set_effective(G.ex() - k, G.ey());
  return out;
}

FormalInvariants formal_invariants(const VField& X, const TSeries& U, const CPoly& p) {
  const int k = p.k;
  FormalInvariants fi;
  auto ur = poly_divmod(U.y_slice(0), p.coeffs).second;
  ur.resize(k + 1, 0.0);
  if (std::abs(ur[0]) < 1e-13) throw DegenerateError("formal_invariants: u(0) = 0, degenerate time");
  fi.u = ur;
  auto br = poly_divmod(X.B.y_slice(1), p.coeffs).second;
  br.resize(k + 1, 0.0);
  fi.mu = br[k];
  return fi;
}

FormalInvariants formal_invariants(const UnfoldingField& field, int nx, int ny) {
  field.validate();
  return formal_invariants(field.orbital(nx, ny), field.time_factor(nx, ny), field.p);
}

VField flow_conjugate(const VField& W, const VField& Y, const TSeries& F) {
  if (std::abs(F(0, 0)) > 1e-14) throw ArgumentError("flow_conjugate: F(0,0) must vanish");
  TSeries den = lie_derivative(Y, F);
  den(0, 0) += 1.0;
  if (std::abs(den(0, 0)) < 1e-14) throw ArgumentError("flow_conjugate: 1 + Y.F is not invertible");
  const TSeries c = lie_derivative(W, F) * inverse_series(den);
  return {W.A - c * Y.A, W.B - c * Y.B};
}

}  // namespace unfolding
