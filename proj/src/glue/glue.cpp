#include "unfolding/glue.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "unfolding/cpoly.hpp"
#include "unfolding/errors.hpp"

namespace unfolding {

namespace {

const double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

double ccw_angle(double from, double to) {
  double t = std::fmod(to - from, 2 * kPi);
  if (t < 0) t += 2 * kPi;
  return t;
}

}  // namespace

// ---- Cousin problem on the annulus ----

double GlueConfig::K() const { return 1.0 + 2.0 * rho0 / (rho_inf * rho0 - 1.0); }

void GlueConfig::validate() const {
  if (!(rho0 > 0 && rho_inf > 0) || rho0 * rho_inf <= 1.0)
    throw ArgumentError("GlueConfig: need rho0 rho_inf > 1 for a nonempty annulus");
  if (!(r > 0) || !(eta > r)) throw ArgumentError("GlueConfig: need 0 < r < eta");
  if (M < 8 || M % 2 != 0) throw ArgumentError("GlueConfig: M must be even and >= 8");
  if (ny < 1) throw ArgumentError("GlueConfig: ny must be >= 1");
  if (L < ny + 2) throw ArgumentError("GlueConfig: need L >= ny + 2 fiber nodes");
  if (max_iter < 1 || !(tol > 0)) throw ArgumentError("GlueConfig: need max_iter >= 1 and tol > 0");
}

std::string to_string(ContourRole r) {
  switch (r) {
    case ContourRole::circle_rho0: return "circle_rho0";
    case ContourRole::circle_rhoinf: return "circle_rhoinf";
    case ContourRole::gamma_plus: return "gamma_plus";
    case ContourRole::gamma_minus: return "gamma_minus";
    case ContourRole::pochhammer: return "pochhammer";
  }
  return "unknown";
}

Contour circle_contour(double radius, int M, ContourRole role) {
  if (!(radius > 0) || M < 1) throw ArgumentError("circle_contour: need radius > 0 and M >= 1");
  Contour c;
  c.role = role;
  c.nodes.resize(M);
  c.weights.resize(M);
  for (int m = 0; m < M; ++m) {
    c.nodes[m] = std::polar(radius, 2 * kPi * m / M);
    c.weights[m] = kI * c.nodes[m] * (2 * kPi / M);
  }
  return c;
}

ChartFunction ChartFunction::zero(int ny, int P) {
  ChartFunction f;
  f.c.assign(ny + 1, CVec(P, 0.0));
  return f;
}

cplx ChartFunction::operator()(cplx u, cplx v) const {
  cplx out = 0.0, vn = 1.0;
  for (int n = 1; n <= ny(); ++n) {
    vn *= v;
    cplx acc = 0.0;
    for (auto it = c[n].rbegin(); it != c[n].rend(); ++it) acc = acc * u + *it;
    out += acc * vn;
  }
  return out;
}

double ChartFunction::sup(double radius_u, double radius_v, int nu, int nv) const {
  double s = 0.0;
  for (int a = 0; a < nu; ++a)
    for (int b = 0; b < nv; ++b)
      s = std::max(s, std::abs((*this)(std::polar(radius_u, 2 * kPi * a / nu),
                                       std::polar(radius_v, 2 * kPi * (b + 0.5) / nv))));
  return s;
}

double sup_diff(const ChartFunction& a, const ChartFunction& b, double radius_u, double radius_v) {
  const int ny = std::max(a.ny(), b.ny());
  size_t P = 0;
  for (const auto& row : a.c) P = std::max(P, row.size());
  for (const auto& row : b.c) P = std::max(P, row.size());
  ChartFunction d = ChartFunction::zero(ny, static_cast<int>(P));
  for (int n = 1; n <= ny; ++n) {
    if (n <= a.ny())
      for (size_t p = 0; p < a.c[n].size(); ++p) d.c[n][p] += a.c[n][p];
    if (n <= b.ny())
      for (size_t p = 0; p < b.c[n].size(); ++p) d.c[n][p] -= b.c[n][p];
  }
  return d.sup(radius_u, radius_v);
}

namespace {

// v-Taylor coefficients 1..ny of phi(z, v e^{psi(z, v)}) at each node of a circle.
std::vector<CVec> fiber_coefficients(const AnnulusFunction& phi, const ChartFunction& psi, const Contour& c,
                                     const GlueConfig& cfg) {
  std::vector<CVec> out(c.nodes.size(), CVec(cfg.ny + 1, 0.0));
  CVec vs(cfg.L);
  for (int l = 0; l < cfg.L; ++l) vs[l] = std::polar(cfg.r, 2 * kPi * l / cfg.L);
  for (size_t m = 0; m < c.nodes.size(); ++m) {
    const cplx z = c.nodes[m];
    for (int l = 0; l < cfg.L; ++l) {
      const cplx w = vs[l] * std::exp(psi(z, vs[l]));
      if (std::abs(w) > cfg.eta) throw ArgumentError("cauchy_heine_pair: v exp(psi) leaves the disk |v| < eta");
      const cplx g = phi(z, w);
      cplx vinv = 1.0 / vs[l], vp = 1.0;
      for (int n = 1; n <= cfg.ny; ++n) {
        vp *= vinv;
        out[m][n] += g * vp / double(cfg.L);
      }
    }
  }
  return out;
}

CousinPair raw_pair(const AnnulusFunction& phi, const ChartFunction& psi, const GlueConfig& cfg, int sigma) {
  const int P = cfg.M / 2;
  const Contour outer = circle_contour(cfg.rho_inf, cfg.M, ContourRole::circle_rhoinf);
  const Contour inner = circle_contour(1.0 / cfg.rho0, cfg.M, ContourRole::circle_rho0);
  const auto go = fiber_coefficients(phi, psi, outer, cfg);
  const auto gi = fiber_coefficients(phi, psi, inner, cfg);
  CousinPair pr;
  pr.F0 = ChartFunction::zero(cfg.ny, P);
  pr.Finf = ChartFunction::zero(cfg.ny, P);
  const cplx pref = double(sigma) / (2 * kPi * kI);
  for (int m = 0; m < cfg.M; ++m) {
    // z^{-p-1} on the outer circle, z^q on the inner one
    const cplx zo_inv = 1.0 / outer.nodes[m];
    const cplx zi = inner.nodes[m];
    cplx po = zo_inv, pi = 1.0;
    for (int p = 0; p < P; ++p) {
      for (int n = 1; n <= cfg.ny; ++n) {
        pr.Finf.c[n][p] += pref * go[m][n] * outer.weights[m] * po;
        if (p + 1 < P) pr.F0.c[n][p + 1] -= pref * gi[m][n] * inner.weights[m] * pi;
      }
      po *= zo_inv;
      pi *= zi;
    }
  }
  return pr;
}

}  // namespace

int cauchy_heine_orientation() {
  static const int sigma = [] {
    GlueConfig cfg;
    cfg.M = 32;
    cfg.L = 8;
    cfg.ny = 2;
    const AnnulusFunction probe = [](cplx, cplx v) { return v; };
    const auto pr = raw_pair(probe, ChartFunction::zero(cfg.ny, cfg.M / 2), cfg, 1);
    const cplx u = 1.0, v = 0.5 * cfg.r;
    const cplx lhs = pr.F0(1.0 / u, v) - pr.Finf(u, v);
    if (std::abs(lhs - v) < 1e-10 * std::abs(v)) return 1;
    if (std::abs(lhs + v) < 1e-10 * std::abs(v)) return -1;
    throw NumericError("cauchy_heine_orientation: probe matches neither orientation");
  }();
  return sigma;
}

double prime_norm(const AnnulusFunction& phi, const GlueConfig& cfg) {
  double s = 0.0;
  const int nu = 128, nv = 16;
  for (double radius : {1.0 / cfg.rho0, cfg.rho_inf})
    for (int a = 0; a < nu; ++a)
      for (int b = 0; b < nv; ++b) {
        const cplx u = std::polar(radius, 2 * kPi * a / nu);
        const cplx v = std::polar(cfg.eta, 2 * kPi * (b + 0.5) / nv);
        s = std::max(s, std::abs(phi(u, v) / v));
      }
  return s;
}

CousinPair cauchy_heine_pair(const AnnulusFunction& phi, const ChartFunction& psi, const GlueConfig& cfg) {
  cfg.validate();
  CousinPair pr = raw_pair(phi, psi, cfg, cauchy_heine_orientation());
  pr.phi_norm = prime_norm(phi, cfg);
  pr.psi_norm = psi.sup(cfg.rho_inf, cfg.r);
  pr.F0_norm = pr.F0.sup(cfg.rho0, cfg.r);
  pr.Finf_norm = pr.Finf.sup(cfg.rho_inf, cfg.r);
  pr.bound = cfg.r * cfg.K() * pr.phi_norm * std::exp(pr.psi_norm);
  return pr;
}

namespace {

// Test points inside the annulus: geometric middle and 10% in from each edge in log-radius.
std::vector<cplx> annulus_points(const GlueConfig& cfg) {
  const double a = std::log(1.0 / cfg.rho0), b = std::log(cfg.rho_inf);
  std::vector<cplx> pts;
  for (double f : {0.1, 0.5, 0.9})
    for (int j = 0; j < 16; ++j) pts.push_back(std::polar(std::exp(a + f * (b - a)), 2 * kPi * (j + 0.25) / 16));
  return pts;
}

}  // namespace

double cousin_residual(const AnnulusFunction& phi, const ChartFunction& psi, const CousinPair& pair,
                       const GlueConfig& cfg) {
  double res = 0.0;
  for (cplx u : annulus_points(cfg))
    for (int b = 0; b < 8; ++b) {
      const cplx v = std::polar(0.5 * cfg.r, 2 * kPi * (b + 0.5) / 8);
      const cplx lhs = pair.F0(1.0 / u, v) - pair.Finf(u, v);
      res = std::max(res, std::abs(lhs - phi(u, v * std::exp(psi(u, v)))));
    }
  return res;
}

SavelevResult savelev_iterate(const AnnulusFunction& phi, const GlueConfig& cfg) {
  cfg.validate();
  const double pn = prime_norm(phi, cfg);
  const double K = cfg.K();
  if (cfg.r > cfg.eta * std::exp(-cfg.eta * K * pn))
    throw ArgumentError("savelev_iterate: need r <= eta exp(-eta K |phi|')");
  SavelevResult out;
  out.norm_bound = cfg.eta * K * pn;
  const double limit = 10 * cfg.r * K * pn * std::exp(out.norm_bound) + 1e-300;
  ChartFunction psi = ChartFunction::zero(cfg.ny, cfg.M / 2);
  CousinPair pr;
  for (int it = 0; it < cfg.max_iter; ++it) {
    pr = cauchy_heine_pair(phi, psi, cfg);
    ChartFunction next = pr.Finf;
    const double change = sup_diff(next, psi, cfg.rho_inf, cfg.r);
    // degrees <= it are exact after it + 1 steps
    ChartFunction lo_next = next, lo_psi = psi;
    for (int n = it + 1; n <= cfg.ny; ++n) {
      std::fill(lo_next.c[n].begin(), lo_next.c[n].end(), 0.0);
      std::fill(lo_psi.c[n].begin(), lo_psi.c[n].end(), 0.0);
    }
    out.low_changes.push_back(it == 0 ? 0.0 : sup_diff(lo_next, lo_psi, cfg.rho_inf, cfg.r));
    out.changes.push_back(change);
    psi = std::move(next);
    out.norms.push_back(psi.sup(cfg.rho_inf, cfg.r));
    out.iterations = it + 1;
    if (!std::isfinite(out.norms.back()) || out.norms.back() > limit)
      throw GluingError("savelev_iterate: iteration diverges");
    if (change < cfg.tol * std::max(1.0, out.norms.back()) || it > cfg.ny) break;
  }
  out.psi_inf = psi;
  out.psi0 = pr.F0;
  // fixed point check with the final psi inside phi
  const CousinPair last = cauchy_heine_pair(phi, psi, cfg);
  out.psi0 = last.F0;
  out.psi_inf = last.Finf;
  out.residual = cousin_residual(phi, psi, last, cfg);
  out.residual = std::max(out.residual, sup_diff(last.Finf, psi, cfg.rho_inf, cfg.r));
  return out;
}

// ---- k = 1 realization ----

namespace {

struct GaussRule {
  std::vector<double> x, w;
};

const GaussRule& gauss8() {
  static const GaussRule rule = [] {
    using Q = boost::math::quadrature::gauss<double, 8>;
    const auto& a = Q::abscissa();
    const auto& w = Q::weights();
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < a.size(); ++i) {
      pts.emplace_back(a[i], w[i]);
      if (a[i] != 0.0) pts.emplace_back(-a[i], w[i]);
    }
    std::sort(pts.begin(), pts.end());
    GaussRule r;
    for (auto [x, wt] : pts) {
      r.x.push_back(x);
      r.w.push_back(wt);
    }
    return r;
  }();
  return rule;
}

// Continuous logarithms log(x - r_i) along a straight segment.
void track(CVec& logs, const CVec& rts, cplx a, cplx b) {
  cplx cur = a;
  for (int guard = 0; guard < 1000000; ++guard) {
    const double rem = std::abs(b - cur);
    if (rem == 0.0) return;
    double dist = 1e300;
    for (cplx r : rts) dist = std::min(dist, std::abs(cur - r));
    if (dist < 1e-13) throw ArgumentError("log_hhat: path runs into a root");
    const double h = std::min(rem, 0.25 * dist);
    const cplx next = h == rem ? b : cur + (b - cur) * (h / rem);
    for (size_t i = 0; i < rts.size(); ++i) logs[i] += std::log((next - rts[i]) / (cur - rts[i]));
    cur = next;
  }
  throw NumericError("log_hhat: path tracking did not finish");
}

void track_arc(CVec& logs, const CVec& rts, double radius, double from, double delta) {
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(delta) / 0.02)));
  for (int s = 0; s < steps; ++s)
    track(logs, rts, std::polar(radius, from + delta * s / steps), std::polar(radius, from + delta * (s + 1) / steps));
}

int winding(const Curve& loop, cplx x) {
  double total = 0.0;
  for (size_t i = 0; i < loop.size(); ++i) {
    const cplx a = loop[i] - x, b = loop[(i + 1) % loop.size()] - x;
    if (a == 0.0 || b == 0.0) return 0;
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / (2 * kPi)));
}

// (1 / 2 pi i) sum g w / (z - x)^power
cplx cauchy(const Contour& c, const CVec& g, cplx x, int power) {
  cplx acc = 0.0;
  for (size_t i = 0; i < c.nodes.size(); ++i) {
    const cplx d = c.nodes[i] - x;
    acc += g[i] * c.weights[i] / (power == 1 ? d : d * d);
  }
  return acc / (2 * kPi * kI);
}

// coefficient n of phi(sum_m H_m y^m), H given with index = degree
cplx phi_coefficient(const GermMap& phi, const CVec& H, int n) {
  cplx out = 0.0;
  CVec pw = H;
  for (int p = 1; p <= std::min(n, phi.order()); ++p) {
    if (p > 1) pw = series1::mul(pw, H, n);
    if (static_cast<int>(pw.size()) > n) out += phi.coeff(p) * pw[n];
  }
  return out;
}

// H = e^{lhat} y exp(sum_{m} N_m y^m) with N given as N[m-1]; index = degree up to ny.
CVec h_series(cplx lhat, const CVec& N, int ny) {
  CVec a(ny, 0.0);
  for (int m = 1; m < ny && m <= static_cast<int>(N.size()); ++m) a[m] = N[m - 1];
  const CVec e = series1::exp(a, ny - 1);
  CVec H(ny + 1, 0.0);
  const cplx h = std::exp(lhat);
  for (int n = 1; n <= ny; ++n) H[n] = h * e[n - 1];
  return H;
}

}  // namespace

bool Realization::in_saddle_part(cplx x) const { return winding(loop, x) != 0; }

cplx Realization::log_hhat(cplx x, bool hi) const {
  const CVec rts = roots(p);
  const CVec res = residues(p, rts);
  const double rho = std::abs(anchor);
  const double a0 = std::arg(anchor);
  CVec logs(rts.size());
  for (size_t i = 0; i < rts.size(); ++i) logs[i] = std::log(anchor - rts[i]);
  double t = ccw_angle(a0, std::arg(x));
  if (std::abs(x) == 0.0) t = 0.0;
  const double tl = ccw_angle(a0, band_lo), th = tl + ccw_angle(band_lo, band_hi);
  bool cw;
  if (in_saddle_part(x))
    cw = hi;
  else
    cw = t > th;
  const double delta = cw ? -(2 * kPi - t) : t;
  track_arc(logs, rts, rho, a0, delta);
  track(logs, rts, std::polar(rho, a0 + delta), x);
  cplx out = 0.0;
  for (size_t i = 0; i < rts.size(); ++i) out -= (1.0 + mu * rts[i]) * res[i] * logs[i];
  return out;
}

CVec Realization::N(cplx x, bool hi) const {
  const bool use_lo = in_saddle_part(x) && hi;
  const Contour& c = use_lo ? gamma_lo : gamma_hi;
  const auto& g = use_lo ? g_lo : g_hi;
  CVec out(ny);
  for (int n = 1; n <= ny; ++n) out[n - 1] = omega * cauchy(c, g[n - 1], x, 1);
  return out;
}

CVec Realization::dN(cplx x, bool hi) const {
  const bool use_lo = in_saddle_part(x) && hi;
  const Contour& c = use_lo ? gamma_lo : gamma_hi;
  const auto& g = use_lo ? g_lo : g_hi;
  CVec out(ny);
  for (int n = 1; n <= ny; ++n) out[n - 1] = omega * cauchy(c, g[n - 1], x, 2);
  return out;
}

CVec Realization::H(cplx x, bool hi) const {
  const CVec h = h_series(log_hhat(x, hi), N(x, hi), ny);
  return CVec(h.begin() + 1, h.end());
}

Realization realize_k1(const GermMap& phi, cplx mu, cplx s, const RealizeConfig& cfg) {
  if (cfg.ny < 1 || !(cfg.rho > 0) || !(cfg.panel > 0) || !(cfg.tail > 0))
    throw ArgumentError("realize_k1: need ny >= 1, rho > 0, panel > 0, tail > 0");
  const double decay = mu.real() - cfg.nu * mu.imag();
  if (!(decay > 0)) throw ContourError("realize_k1: Hhat does not decay along the spirals (need Re mu > nu Im mu)");

  Realization re;
  re.p = build_P(1, {-s * s});
  re.mu = mu;
  re.phi = phi;
  re.ny = cfg.ny;
  const CVec rts = roots(re.p);
  const CVec res = residues(re.p, rts);
  if (rts.size() != 2 || std::abs(rts[0] - rts[1]) < 1e-12)
    throw DegenerateError("realize_k1: the roots must be distinct");

  const auto squids = squid_boundaries(re.p, ThetaProfile{}, cfg.rho, cfg.nu, mu);
  const Curve& bl = squids[0].boundary_minus;
  const Curve& bh = squids[0].boundary_plus;
  re.band_lo = std::arg(bl.front());
  re.band_hi = std::arg(bh.front());
  re.anchor = std::polar(cfg.rho, cfg.anchor_angle);
  const double tl = ccw_angle(cfg.anchor_angle, re.band_lo);
  const double width = ccw_angle(re.band_lo, re.band_hi);
  if (tl + width >= 2 * kPi || tl == 0.0) throw ArgumentError("realize_k1: the anchor lies in the saddle part");

  auto log_h = [&](const CVec& logs) {
    cplx out = 0.0;
    for (size_t i = 0; i < rts.size(); ++i) out -= (1.0 + mu * rts[i]) * res[i] * logs[i];
    return out;
  };

  // logs at the bases of the two boundaries, continued from the anchor in O
  CVec anchor_logs(rts.size());
  for (size_t i = 0; i < rts.size(); ++i) anchor_logs[i] = std::log(re.anchor - rts[i]);
  CVec base_lo = anchor_logs, base_hi = anchor_logs;
  track_arc(base_lo, rts, cfg.rho, cfg.anchor_angle, tl);
  track_arc(base_hi, rts, cfg.rho, cfg.anchor_angle, -(2 * kPi - tl - width));

  const GaussRule& gr = gauss8();
  struct Part {
    CVec nodes, weights, lhat;
  };

  // polyline from the base to the root
  auto polyline = [&](const Curve& c, CVec logs) {
    Part out;
    cplx prev = c.front();
    for (size_t s = 0; s + 1 < c.size(); ++s) {
      const cplx a = c[s], b = c[s + 1];
      if (a == b) continue;
      for (size_t q = 0; q < gr.x.size(); ++q) {
        const cplx z = a + (b - a) * (0.5 * (1 + gr.x[q]));
        track(logs, rts, prev, z);
        prev = z;
        out.nodes.push_back(z);
        out.weights.push_back((b - a) * (0.5 * gr.w[q]));
        out.lhat.push_back(log_h(logs));
      }
    }
    return out;
  };
  const Part poly_lo = polyline(bl, base_lo);
  const Part poly_hi = polyline(bh, base_hi);
  double scale = 0.0;
  for (const Part* pp : {&poly_lo, &poly_hi})
    for (cplx l : pp->lhat) scale = std::max(scale, std::exp(l.real()));

  // exact spirals z_b e^{(1 + i nu) r}, r >= 0; truncation radius shared by both
  const cplx slope(1.0, cfg.nu);
  auto spiral_rmax = [&](cplx zb, CVec logs) {
    const double cap = 400.0;
    cplx prev = zb;
    for (double r0 = 0.0; r0 < cap; r0 += cfg.panel) {
      double panel_max = 0.0;
      for (double x : gr.x) {
        const cplx z = zb * std::exp(slope * (r0 + 0.5 * cfg.panel * (1 + x)));
        track(logs, rts, prev, z);
        prev = z;
        panel_max = std::max(panel_max, std::exp(log_h(logs).real()));
      }
      scale = std::max(scale, panel_max);
      if (panel_max < cfg.tail * scale) return r0 + cfg.panel;
    }
    throw ContourError("realize_k1: Hhat does not decay along the spiral");
  };
  const double rmax = std::max(spiral_rmax(bl.front(), base_lo), spiral_rmax(bh.front(), base_hi));

  // oriented from infinity: descending r, then the polyline
  auto assemble = [&](cplx zb, CVec logs, const Part& poly, ContourRole role, CVec& lhat, Curve& verts) {
    Part sp;
    cplx prev = zb;
    const int panels = static_cast<int>(std::lround(rmax / cfg.panel));
    for (int k = 0; k < panels; ++k) {
      const double r0 = k * cfg.panel;
      for (size_t q = 0; q < gr.x.size(); ++q) {
        const cplx z = zb * std::exp(slope * (r0 + 0.5 * cfg.panel * (1 + gr.x[q])));
        track(logs, rts, prev, z);
        prev = z;
        sp.nodes.push_back(z);
        sp.weights.push_back(-slope * z * (0.5 * cfg.panel * gr.w[q]));
        sp.lhat.push_back(log_h(logs));
      }
    }
    Contour c;
    c.role = role;
    for (size_t i = sp.nodes.size(); i-- > 0;) {
      c.nodes.push_back(sp.nodes[i]);
      c.weights.push_back(sp.weights[i]);
      lhat.push_back(sp.lhat[i]);
    }
    c.nodes.insert(c.nodes.end(), poly.nodes.begin(), poly.nodes.end());
    c.weights.insert(c.weights.end(), poly.weights.begin(), poly.weights.end());
    lhat.insert(lhat.end(), poly.lhat.begin(), poly.lhat.end());
    verts.clear();
    for (int k = panels; k > 0; --k) verts.push_back(zb * std::exp(slope * (k * cfg.panel)));
    return c;
  };
  Curve vl, vh;
  re.gamma_lo = assemble(bl.front(), base_lo, poly_lo, ContourRole::gamma_minus, re.lhat_lo, vl);
  re.gamma_hi = assemble(bh.front(), base_hi, poly_hi, ContourRole::gamma_plus, re.lhat_hi, vh);
  // lo sheet on gamma_hi: one more counterclockwise turn around both roots
  for (auto& l : re.lhat_hi) l -= 2 * kPi * kI * mu;

  vl.insert(vl.end(), bl.begin(), bl.end());
  vh.insert(vh.end(), bh.begin(), bh.end());
  re.loop = vl;
  re.loop.insert(re.loop.end(), vh.rbegin(), vh.rend());
  const int w = winding(re.loop, std::polar(cfg.rho, re.band_lo + 0.5 * width));
  if (std::abs(w) != 1) throw ContourError("realize_k1: the saddle part is not bounded by a simple loop");
  re.omega = w;

  // triangular recursion in the y-degree
  const size_t nl = re.gamma_lo.nodes.size(), nh = re.gamma_hi.nodes.size();
  std::vector<CVec> N_lo_l(nl), N_lo_h(nh);  // lo-sheet N at the nodes
  re.g_lo.assign(cfg.ny, CVec(nl));
  re.g_hi.assign(cfg.ny, CVec(nh));
  for (int n = 1; n <= cfg.ny; ++n) {
    for (size_t i = 0; i < nl; ++i)
      re.g_lo[n - 1][i] = phi_coefficient(phi, h_series(re.lhat_lo[i], N_lo_l[i], n), n);
    for (size_t i = 0; i < nh; ++i)
      re.g_hi[n - 1][i] = phi_coefficient(phi, h_series(re.lhat_hi[i], N_lo_h[i], n), n);
    for (size_t i = 0; i < nl; ++i)
      N_lo_l[i].push_back(re.omega * cauchy(re.gamma_hi, re.g_hi[n - 1], re.gamma_lo.nodes[i], 1));
    for (size_t i = 0; i < nh; ++i)
      N_lo_h[i].push_back(re.omega * cauchy(re.gamma_lo, re.g_lo[n - 1], re.gamma_hi.nodes[i], 1) -
                          re.g_hi[n - 1][i]);
  }
  return re;
}

namespace {

std::vector<cplx> saddle_samples(const Realization& re) {
  const double mid = re.band_lo + 0.5 * ccw_angle(re.band_lo, re.band_hi);
  const double rho = std::abs(re.anchor);
  std::vector<cplx> pts;
  for (double f : {0.3, 0.4, 0.5, 0.6, 0.7, 0.8}) {
    const cplx x = std::polar(f * rho, mid);
    if (re.in_saddle_part(x)) pts.push_back(x);
  }
  if (pts.empty()) throw NumericError("realization: no sample points in the saddle part");
  return pts;
}

cplx sum_series(const CVec& c, cplx y) {
  cplx out = 0.0, yn = 1.0;
  for (cplx v : c) {
    yn *= y;
    out += v * yn;
  }
  return out;
}

}  // namespace

double realization_cousin_residual(const Realization& re, double y_abs) {
  double res = 0.0;
  for (cplx x : saddle_samples(re)) {
    const CVec nl = re.N(x, false), nh = re.N(x, true);
    CVec H(re.ny + 1, 0.0);
    const CVec h = re.H(x, false);
    std::copy(h.begin(), h.end(), H.begin() + 1);
    CVec jump(re.ny);
    for (int n = 1; n <= re.ny; ++n) jump[n - 1] = nh[n - 1] - nl[n - 1] - phi_coefficient(re.phi, H, n);
    for (int b = 0; b < 8; ++b) res = std::max(res, std::abs(sum_series(jump, std::polar(y_abs, 2 * kPi * b / 8))));
  }
  return res;
}

double realization_transition_residual(const Realization& re, double y_abs) {
  double res = 0.0;
  for (cplx x : saddle_samples(re)) {
    const CVec hl = re.H(x, false), hh = re.H(x, true);
    for (int b = 0; b < 8; ++b) {
      const cplx y = std::polar(y_abs, 2 * kPi * b / 8);
      const cplx lo = sum_series(hl, y), hi = sum_series(hh, y);
      const cplx pred = lo * std::exp(2 * kPi * kI * re.mu + re.phi(lo));
      res = std::max(res, std::abs(hi - pred) / std::abs(lo));
    }
  }
  return res;
}

std::vector<RMonomial> SynthesizedR::monomials(double drop_below) const {
  std::vector<RMonomial> out;
  for (size_t n = 0; n < section.size(); ++n)
    if (std::abs(section[n]) > drop_below) out.push_back({1, static_cast<int>(n + 1), section[n]});
  return out;
}

namespace {

// y-coefficients of R at x from N and dN/dx.
CVec r_series(const Realization& re, cplx x, bool hi) {
  const CVec n = re.N(x, hi), dn = re.dN(x, hi);
  const cplx px = re.p(x);
  const cplx a1 = 1.0 + re.mu * x;
  CVec R(re.ny);
  for (int m = 1; m <= re.ny; ++m) {
    cplx v = -(px * dn[m - 1] + a1 * double(m) * n[m - 1]);
    for (int j = 1; j < m; ++j) v -= double(j) * n[j - 1] * R[m - j - 1];
    R[m - 1] = v;
  }
  return R;
}

}  // namespace

SynthesizedR synthesize_R(const Realization& re, double tol, double y_abs) {
  const int k = re.p.k;
  const double rho = std::abs(re.anchor);
  const double a0 = std::arg(re.anchor);
  const double tl = ccw_angle(a0, re.band_lo), th = tl + ccw_angle(re.band_lo, re.band_hi);
  const double margin = 0.3;
  std::vector<cplx> pts;
  for (double f : {0.5, 0.7})
    for (int j = 0; j < 8; ++j) {
      // angles in O, away from the band on both sides
      const double t = th + margin + (2 * kPi - (th - tl) - 2 * margin) * j / 7.0;
      const cplx x = std::polar(f * rho, a0 + t);
      if (!re.in_saddle_part(x)) pts.push_back(x);
    }
  if (pts.size() < static_cast<size_t>(k + 2)) throw NumericError("synthesize_R: too few sample points");

  SynthesizedR out;
  std::vector<CVec> vals;
  for (cplx x : pts) {
    vals.push_back(r_series(re, x, false));
    const CVec n = re.N(x), dn = re.dN(x);
    for (int b = 0; b < 8; ++b) {
      const cplx y = std::polar(y_abs, 2 * kPi * b / 8);
      cplx yny = 0.0, xnx = 0.0, yn = 1.0;
      for (int m = 1; m <= re.ny; ++m) {
        yn *= y;
        yny += double(m) * n[m - 1] * yn;
        xnx += x * dn[m - 1] * yn;
      }
      out.derivative_bound = std::max({out.derivative_bound, std::abs(yny), std::abs(xnx)});
    }
  }

  if (out.derivative_bound > 1.0 / 3.0)
    throw ArgumentError("synthesize_R: |y dN/dy| or |x dN/dx| exceeds 1/3; the correction is too large");

  // least squares fit by a polynomial of degree <= k, per y-degree (normal equations)
  const int nc = k + 1;
  out.coeffs.assign(re.ny, CVec(nc, 0.0));
  for (int m = 0; m < re.ny; ++m) {
    std::vector<CVec> A(nc, CVec(nc + 1, 0.0));
    for (size_t s = 0; s < pts.size(); ++s) {
      CVec basis(nc);
      for (int i = 0; i < nc; ++i) basis[i] = std::pow(pts[s], i);
      for (int a = 0; a < nc; ++a) {
        for (int b = 0; b < nc; ++b) A[a][b] += std::conj(basis[a]) * basis[b];
        A[a][nc] += std::conj(basis[a]) * vals[s][m];
      }
    }
    for (int c = 0; c < nc; ++c) {
      int piv = c;
      for (int r = c + 1; r < nc; ++r)
        if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
      std::swap(A[c], A[piv]);
      for (int r = 0; r < nc; ++r) {
        if (r == c) continue;
        const cplx f = A[r][c] / A[c][c];
        for (int q = c; q <= nc; ++q) A[r][q] -= f * A[c][q];
      }
    }
    for (int i = 0; i < nc; ++i) out.coeffs[m][i] = A[i][nc] / A[i][i];
    for (size_t s = 0; s < pts.size(); ++s)
      out.fit_residual = std::max(out.fit_residual, std::abs(vals[s][m] - poly_eval(out.coeffs[m], pts[s])));
  }

  // (1 + mu x + R)(1 + y a') = 1 + x (S1 / S0 - mu) once 1 + y a' = 1 / S0
  const int ny = re.ny;
  CVec S0(ny + 1, 0.0), S1(ny + 1, 0.0);
  S0[0] = 1.0;
  S1[0] = re.mu;
  for (int m = 1; m <= ny; ++m) {
    S0[m] = out.coeffs[m - 1][0];
    S1[m] = out.coeffs[m - 1][1];
  }
  const CVec T = series1::pow(S0, -1.0, ny);
  GermMap a = GermMap::zero(ny);
  for (int m = 1; m <= ny; ++m) a.coeffs[m - 1] = T[m] / double(m);
  out.fiber = exp_germ(0.0, a, ny);
  const CVec F = series1::mul(S1, T, ny);
  GermMap Fg = GermMap::zero(ny);
  for (int m = 1; m <= ny; ++m) Fg.coeffs[m - 1] = F[m];
  out.section = compose(Fg, inverse(out.fiber)).coeffs;

  for (cplx x : saddle_samples(re)) {
    const CVec lo = r_series(re, x, false), hi = r_series(re, x, true);
    for (int m = 0; m < re.ny; ++m) out.overlap_defect = std::max(out.overlap_defect, std::abs(lo[m] - hi[m]));
  }
  if (out.overlap_defect > tol) throw GluingError("synthesize_R: the two determinations on the saddle part disagree");
  return out;
}

}  // namespace unfolding
