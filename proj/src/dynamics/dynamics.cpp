#include "unfolding/dynamics.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "unfolding/errors.hpp"

namespace unfolding {

namespace odeint = boost::numeric::odeint;

namespace {

const double kPi = std::numbers::pi;

double wrap_angle(double a) { return std::remainder(a, 2 * kPi); }

// Linearizing coordinate at a simple root r: zeta = (x - r) exp(-int_r^x Q1/Q), where
// P = (x - r) Q and Q - Q(r) = (x - r) Q1. Along the flow of P d/dx, zeta moves by
// exp(P'(r) t) exactly.
struct RootChart {
  cplx r;
  CVec q, q1;

  RootChart(const CPoly& p, cplx root) : r(root) {
    q = poly_divmod(p.coeffs, {-root, 1.0}).first;
    q1 = poly_divmod(q, {-root, 1.0}).first;
  }

  cplx log_factor(cplx x) const {
    using GL = boost::math::quadrature::gauss<double, 20>;
    const auto& a = GL::abscissa();
    const auto& w = GL::weights();
    const cplx h = 0.5 * (x - r), mid = r + h;
    cplx acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
      for (double sg : {1.0, -1.0}) {
        const cplx xi = mid + sg * a[i] * h;
        acc += w[i] * poly_eval(q1, xi) / poly_eval(q, xi);
      }
    return -acc * h;
  }
  cplx zeta(cplx x) const { return (x - r) * std::exp(log_factor(x)); }
  cplx inverse(cplx z) const {
    cplx x = r + z;
    for (int it = 0; it < 30; ++it) {
      const cplx nx = r + z * std::exp(-log_factor(x));
      if (std::abs(nx - x) <= 1e-15 * std::abs(z)) return nx;
      x = nx;
    }
    return x;
  }
};

}  // namespace

double ThetaProfile::at(cplx x, const CVec& rts) const {
  if (by_root.empty()) return far;
  const double near = 0.25 * min_root_gap(rts);
  for (auto [i, th] : by_root)
    if (i >= 0 && i < static_cast<int>(rts.size()) && std::abs(x - rts[i]) < near) return th;
  return far;
}

double ThetaProfile::at_root(int index) const {
  auto it = by_root.find(index);
  return it == by_root.end() ? far : it->second;
}

std::string to_string(Terminal t) {
  switch (t) {
    case Terminal::Landed: return "landed";
    case Terminal::ExitedDisk: return "exited_disk";
    case Terminal::Homoclinic: return "homoclinic";
    case Terminal::Budget: return "budget";
  }
  return "?";
}

std::string to_string(RootType t) {
  switch (t) {
    case RootType::node: return "node";
    case RootType::saddle: return "saddle";
    case RootType::center: return "center";
  }
  return "?";
}

double landing_radius(const CPoly& p, const CVec& rts, double rho) {
  const double re = rho_eps(p.eps);
  if (re == 0.0) return 1e-3 * rho;
  const double gap = min_root_gap(rts);
  double r = 1e-3 * std::max(re, gap);
  if (gap > 0) r = std::min(r, 0.25 * gap);
  return r;
}

Trajectory integrate_trajectory(const CPoly& p, double theta, cplx x0, double rho, const TrajectoryControls& c) {
  ThetaProfile th;
  th.far = theta;
  return integrate_trajectory(p, th, x0, rho, c);
}

Trajectory integrate_trajectory(const CPoly& p, const ThetaProfile& th, cplx x0, double rho,
                                const TrajectoryControls& c) {
  if (!(rho > 0)) throw ArgumentError("integrate_trajectory: disk radius must be positive");
  if (std::abs(th.far) >= kPi / 2) throw ArgumentError("integrate_trajectory: need |theta| < pi/2");
  const CVec rts = roots(p);
  const double rl = c.landing_radius > 0 ? c.landing_radius : landing_radius(p, rts, rho);
  const double exit_r = c.exit_radius > 0 ? c.exit_radius : rho;
  if (std::abs(x0) > exit_r * (1 + 1e-12)) throw ArgumentError("integrate_trajectory: start point outside the disk");
  const double dir = c.direction >= 0 ? 1.0 : -1.0;

  using State = std::array<double, 3>;
  auto velocity = [&](cplx x) { return dir * std::polar(1.0, th.at(x, rts)) * p(x); };
  // arc-length parametrization, real time carried as the third component
  auto rhs = [&](const State& s, State& ds, double) {
    const cplx v = velocity(cplx(s[0], s[1]));
    const double a = std::abs(v);
    if (a == 0.0) {
      ds = {0.0, 0.0, 0.0};
      return;
    }
    ds = {v.real() / a, v.imag() / a, dir / a};
  };
  auto stepper = odeint::make_controlled(c.atol, c.rtol, odeint::runge_kutta_dopri5<State>());

  Trajectory tr;
  tr.theta = th.far;
  tr.points.push_back(x0);
  State st{x0.real(), x0.imag(), 0.0};
  double s = 0.0;
  double ds = 1e-3 * std::max(rho, std::abs(x0));
  const cplx v0 = velocity(x0);

  // capture disks where the linearizing chart is used instead of integrating the spiral
  const double gap = min_root_gap(rts);
  std::vector<RootChart> charts;
  if (gap > 0)
    for (auto r : rts) charts.emplace_back(p, r);
  const double capture = 0.1 * gap;

  auto land = [&](int i, cplx x) {
    tr.terminal = Terminal::Landed;
    tr.root = i;
    const cplx lam = dir * std::polar(1.0, th.at(rts[i], rts)) * p.deriv(rts[i]);
    if (charts.empty() || lam.real() == 0.0) {
      tr.arrival_phase = wrap_angle(std::arg(x - rts[i]));
      tr.elapsed = st[2];
      return;
    }
    const cplx z0 = charts[i].zeta(x);
    // run the linear flow to |zeta| = rl / 2 and map back
    const double t = std::log(0.5 * rl / std::abs(z0)) / lam.real();
    const cplx z1 = z0 * std::exp(lam * t);
    tr.arrival_phase = wrap_angle(std::arg(z0) - lam.imag() / lam.real() * std::log(std::abs(z0) / rl));
    tr.elapsed = st[2] + dir * t;
    if (t <= 0) return;
    if (c.max_step > 0) {
      // densely sampled curve requested: follow the linear flow in the chart
      cplx z = z0;
      const double lim = 0.5 * c.max_step;
      for (int n = 0; std::abs(z) > std::abs(z1) && n < c.max_steps; ++n) {
        z *= std::exp(lam * (lim / (std::abs(lam) * std::abs(z))));
        tr.points.push_back(charts[i].inverse(z));
      }
    }
    tr.points.push_back(charts[i].inverse(z1));
  };

  for (int n = 0; n < c.max_steps; ++n) {
    const cplx x(st[0], st[1]);
    double nearest = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < rts.size(); ++i) {
      const cplx d = x - rts[i];
      const double dist = std::abs(d);
      nearest = std::min(nearest, dist);
      const bool attracting =
          std::real(dir * std::polar(1.0, th.at(rts[i], rts)) * p.deriv(rts[i])) < 0;
      if ((!charts.empty() && dist < capture && attracting) ||
          (dist < rl && std::real(std::conj(d) * velocity(x)) < 0)) {
        land(static_cast<int>(i), x);
        return tr;
      }
    }
    if (std::abs(x) > exit_r) {
      tr.terminal = Terminal::ExitedDisk;
      tr.elapsed = st[2];
      return tr;
    }
    if (s > 10 * rl && std::abs(x - x0) < rl && std::real(std::conj(velocity(x)) * v0) > 0) {
      tr.terminal = Terminal::Homoclinic;
      tr.elapsed = st[2];
      return tr;
    }
    double hmax = c.max_step > 0 ? c.max_step : std::max(rho, std::abs(x)) / 50;
    // do not step across a root
    hmax = std::min(hmax, std::max(0.5 * nearest, 0.25 * rl));
    ds = std::min(ds, hmax);
    const double scale = std::max(rho, std::abs(x));
    int tries = 0;
    while (stepper.try_step(rhs, st, s, ds) == odeint::fail) {
      if (ds < 1e-15 * scale) throw DegenerateError("integrate_trajectory: step underflow near a multiple root");
      if (++tries > 200) throw NumericError("integrate_trajectory: step control failed");
    }
    tr.points.emplace_back(st[0], st[1]);
  }
  tr.terminal = Terminal::Budget;
  tr.elapsed = st[2];
  return tr;
}

std::vector<double> separatrix_angles(int k, double theta) {
  std::vector<double> a(2 * k);
  for (int l = 0; l < k; ++l) {
    a[2 * l] = (-theta + 2 * kPi * l) / k;
    a[2 * l + 1] = (kPi - theta + 2 * kPi * l) / k;
  }
  return a;
}

std::vector<Trajectory> separatrices_infinity(const CPoly& p, const ThetaProfile& th, double rho) {
  if (!(rho > 0) || rho < rho_eps(p.eps) * (1 - 1e-12))
    throw ArgumentError("separatrices_infinity: seed disk does not contain the roots (need rho >= 2 sqrt(k) |eps|)");
  const int k = p.k;
  const double seed = 10 * rho;
  TrajectoryControls c;
  c.exit_radius = 100 * seed;
  const CVec rts = roots(p);
  c.landing_radius = landing_radius(p, rts, rho);
  std::vector<Trajectory> out;
  const auto ang = separatrix_angles(k, th.far);
  for (int a = 0; a < 2 * k; ++a) {
    c.direction = a % 2 == 0 ? -1 : 1;
    out.push_back(integrate_trajectory(p, th, std::polar(seed, ang[a]), rho, c));
  }
  return out;
}

RootType classify_root(const CPoly& p, cplx root, double theta) {
  const cplx d = p.deriv(root);
  const double v = std::real(std::polar(1.0, theta) * d);
  const double tol = 1e-10 * std::max(1.0, std::abs(d));
  if (v > tol) return RootType::node;
  if (v < -tol) return RootType::saddle;
  return RootType::center;
}

cplx ds_tau(const CPoly& p, const std::vector<int>& subset) {
  const CVec rts = roots(p);
  const CVec res = residues(p, rts);
  cplx sum = 0.0;
  for (int i : subset) {
    if (i < 0 || i >= static_cast<int>(rts.size())) throw ArgumentError("ds_tau: root index out of range");
    sum += res[i];
  }
  return 2.0 * kPi * cplx(0, 1) * sum;
}

std::vector<std::vector<int>> homoclinic_subsets(const CPoly& p, double tol) {
  const CVec rts = roots(p);
  const CVec nu = residues(p, rts);
  double scale = 0.0;
  for (auto v : nu) scale += std::abs(v);
  const int n = static_cast<int>(rts.size());
  std::vector<std::vector<int>> out;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    cplx sum = 0.0;
    std::vector<int> I;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        sum += nu[i];
        I.push_back(i);
      }
    if (std::abs(sum.real()) <= tol * scale) out.push_back(I);
  }
  return out;
}

DSInvariant ds_invariant(const CPoly& p, const ThetaProfile& th, double rho) {
  const int k = p.k;
  if (in_discriminant(p.eps)) throw DegenerateError("ds_invariant: parameter lies on the discriminant");
  DSInvariant out;
  out.roots = roots(p);
  auto hs = homoclinic_subsets(p);
  if (!hs.empty()) {
    std::ostringstream os;
    os << "ds_invariant: parameter within tolerance of a homoclinic hypersurface; I = {";
    for (size_t i = 0; i < hs[0].size(); ++i) os << (i ? "," : "") << hs[0][i];
    os << "}";
    throw BifurcationError(os.str(), hs);
  }

  const auto seps = separatrices_infinity(p, th, rho);
  const int n2 = 2 * k;
  out.landing.resize(n2);
  std::vector<double> phase(n2);
  for (int a = 0; a < n2; ++a) {
    if (seps[a].terminal != Terminal::Landed) {
      std::ostringstream os;
      os << "ds_invariant: separatrix " << a << " ended as " << to_string(seps[a].terminal);
      throw NumericError(os.str());
    }
    out.landing[a] = seps[a].root;
    phase[a] = seps[a].arrival_phase;
  }

  // Walk the faces of the separating graph: from petal (d_a, d_{a+1}) go down d_a,
  // turn counterclockwise around the landing root to the next separatrix d_b and
  // come back out into petal (d_{b-1}, d_b).
  auto next_petal = [&](int a) {
    const int r = out.landing[a];
    int best = a;
    double best_turn = 3 * kPi;
    for (int b = 0; b < n2; ++b) {
      if (b == a || out.landing[b] != r) continue;
      double turn = phase[b] - phase[a];
      while (turn <= 0) turn += 2 * kPi;
      while (turn > 2 * kPi) turn -= 2 * kPi;
      if (turn < best_turn) {
        best_turn = turn;
        best = b;
      }
    }
    return (best - 1 + n2) % n2;
  };
  std::vector<int> partner(n2, -1);
  for (int a = 0; a < n2; ++a) {
    if (partner[a] >= 0) continue;
    std::vector<int> cycle{a};
    for (int b = next_petal(a); b != a; b = next_petal(b)) {
      cycle.push_back(b);
      if (static_cast<int>(cycle.size()) > n2) break;
    }
    if (cycle.size() != 2 || (cycle[0] + cycle[1]) % 2 == 0)
      throw NumericError("ds_invariant: separating graph has a face without exactly two petals of opposite parity");
    partner[cycle[0]] = cycle[1];
    partner[cycle[1]] = cycle[0];
  }

  out.sigma.resize(k);
  out.taus.resize(k);
  const CVec nu = residues(p, out.roots);
  for (int a = 0; a < k; ++a) {
    const int e = 2 * a, o = partner[e];
    out.pairs.emplace_back(e, o);
    out.sigma[a] = ((o + 1) / 2) % k;
    // roots landed from directions e+1 .. o (counterclockwise) versus the rest
    std::vector<bool> inside(out.roots.size(), false), outside(out.roots.size(), false);
    for (int d = (e + 1) % n2;; d = (d + 1) % n2) {
      inside[out.landing[d]] = true;
      if (d == o) break;
    }
    for (int d = (o + 1) % n2;; d = (d + 1) % n2) {
      outside[out.landing[d]] = true;
      if (d == e) break;
    }
    cplx sum = 0.0;
    for (size_t i = 0; i < out.roots.size(); ++i) {
      if (inside[i] && outside[i]) throw NumericError("ds_invariant: loop does not separate the roots");
      if (inside[i]) sum += nu[i];
    }
    cplx tau = 2.0 * kPi * cplx(0, 1) * sum;
    if (tau.imag() < 0) tau = -tau;
    out.taus[a] = tau;
  }
  for (size_t i = 0; i < out.roots.size(); ++i)
    out.root_types.push_back(classify_root(p, out.roots[i], th.at_root(static_cast<int>(i))));
  return out;
}

std::uint64_t catalan(int k) {
  if (k < 1) throw ArgumentError("catalan: k >= 1");
  if (k > 33) throw ArgumentError("catalan: overflow beyond k = 33");
  std::uint64_t c = 1;
  for (int i = 0; i < k; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return c;
}

bool is_noncrossing(const std::vector<int>& sigma) {
  const int k = static_cast<int>(sigma.size());
  std::vector<int> block(k, -1);
  for (int i = 0; i < k; ++i) {
    if (sigma[i] < 0 || sigma[i] >= k) return false;
    if (block[i] >= 0) continue;
    // cycle through i (the smallest unvisited element); must increase then wrap once
    int j = i, wraps = 0;
    do {
      if (block[j] >= 0) return false;
      block[j] = i;
      const int nx = sigma[j];
      if (nx <= j) ++wraps;
      j = nx;
    } while (j != i);
    if (wraps != 1) return false;
  }
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      for (int c = b + 1; c < k; ++c)
        for (int d = c + 1; d < k; ++d)
          if (block[a] == block[c] && block[b] == block[d] && block[a] != block[b]) return false;
  return true;
}

cplx weak_holonomy(const UnfoldingField& field, double x_star, cplx y0, int direction, double guard) {
  field.validate();
  for (auto r : roots(field.p))
    if (std::abs(r) >= x_star) throw ArgumentError("weak_holonomy: circle |x| = x_star must enclose all roots");
  if (y0 == 0.0) return 0.0;
  if (std::abs(y0) >= guard) throw ArgumentError("weak_holonomy: |y0| beyond the guard radius");
  const double dir = direction >= 0 ? 1.0 : -1.0;
  const cplx w = 2.0 * kPi * cplx(0, 1) * dir;

  using State = std::array<double, 2>;
  auto rhs = [&](const State& s, State& ds, double t) {
    const cplx y(s[0], s[1]);
    if (std::abs(y) > guard) throw EscapeError("weak_holonomy: |y| exceeded the guard radius");
    const cplx x = x_star * std::exp(w * t);
    const cplx v = y * field.ydot_over_y(x, y) / field.p(x) * (w * x);
    ds = {v.real(), v.imag()};
  };
  State st{y0.real(), y0.imag()};
  auto stepper = odeint::make_controlled(1e-16 * std::abs(y0), 1e-13, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(stepper, rhs, st, 0.0, 1.0, 1e-3);
  const cplx y(st[0], st[1]);
  if (!std::isfinite(y.real()) || !std::isfinite(y.imag()) || std::abs(y) > guard)
    throw EscapeError("weak_holonomy: |y| exceeded the guard radius");
  return y;
}

GermMap holonomy_germ(const UnfoldingField& field, double x_star, int direction, double radius, int order) {
  if (order < 1 || !(radius > 0)) throw ArgumentError("holonomy_germ: need order >= 1 and radius > 0");
  const int N = std::max(32, 4 * (order + 1));
  CVec samples(N);
  for (int j = 0; j < N; ++j) samples[j] = weak_holonomy(field, x_star, std::polar(radius, 2 * kPi * j / N), direction);
  CVec c(order);
  for (int q = 1; q <= order; ++q) {
    cplx acc = 0.0;
    for (int j = 0; j < N; ++j) acc += samples[j] * std::polar(1.0, -2 * kPi * double(j) * q / N);
    c[q - 1] = acc / double(N) / std::pow(radius, q);
  }
  return GermMap(c);
}

namespace {

// Sample a circle arc with spacing below `spacing`.
Curve arc_samples(double rho, double a0, double a1, double spacing) {
  const int n = std::max(2, static_cast<int>(std::ceil(rho * std::abs(a1 - a0) / spacing)) + 1);
  Curve out(n);
  for (int i = 0; i < n; ++i) out[i] = std::polar(rho, a0 + (a1 - a0) * i / (n - 1));
  return out;
}

Curve spiral(cplx xm, double nu, double r_end, double spacing) {
  Curve out{xm};
  const cplx w(1.0, nu);
  double r = 0.0;
  while (r < r_end) {
    const double speed = std::abs(xm) * std::exp(r) * std::abs(w);
    r = std::min(r_end, r + 0.9 * spacing / speed);
    out.push_back(xm * std::exp(w * r));
  }
  return out;
}

// First crossing of |x| = rho along an inward curve, linearly interpolated.
cplx crossing(const Curve& c, double rho) {
  for (size_t i = 1; i < c.size(); ++i) {
    const double a = std::abs(c[i - 1]), b = std::abs(c[i]);
    if (a > rho && b <= rho) return c[i - 1] + (c[i] - c[i - 1]) * ((a - rho) / (a - b));
  }
  throw NumericError("squid_boundaries: separatrix does not cross the disk boundary");
}

}  // namespace

std::vector<SquidSector> squid_boundaries(const CPoly& p, const ThetaProfile& th, double rho, double nu, cplx mu0) {
  if (!(mu0.real() > nu * mu0.imag())) throw ArgumentError("squid_boundaries: need Re mu0 > nu Im mu0");
  const int k = p.k;
  const CVec rts = roots(p);
  const auto seps = separatrices_infinity(p, th, rho);
  const double spacing = rho / 200;
  const double delta = kPi / (20 * k);
  const double rl = landing_radius(p, rts, rho);

  std::vector<double> phi(k);
  for (int l = 0; l < k; ++l) phi[l] = std::arg(crossing(seps[2 * l + 1].points, rho));

  TrajectoryControls c;
  c.max_step = spacing;
  c.exit_radius = rho * (1 + 1e-3);
  c.landing_radius = rl;

  auto boundary = [&](double angle, int& landed) {
    auto tr = integrate_trajectory(p, th, std::polar(rho, angle), rho, c);
    if (tr.terminal != Terminal::Landed)
      throw RemedyError("squid_boundaries: boundary trajectory ended as " + to_string(tr.terminal));
    if (classify_root(p, rts[tr.root], th.at_root(tr.root)) != RootType::saddle && rho_eps(p.eps) > 0)
      throw RemedyError("squid_boundaries: boundary trajectory landed at a root that is not of saddle type");
    landed = tr.root;
    tr.points.push_back(rts[tr.root]);
    return tr.points;
  };

  std::vector<SquidSector> out;
  for (int j = 0; j < k; ++j) {
    SquidSector sq;
    sq.j = j;
    double a0 = phi[(j - 1 + k) % k], a1 = phi[j];
    while (a1 <= a0) a1 += 2 * kPi;
    a0 -= delta;
    a1 += delta;
    sq.arc = arc_samples(rho, a0, a1, spacing);
    sq.boundary_minus = boundary(a0, sq.saddle_minus);
    sq.boundary_plus = boundary(a1, sq.saddle_plus);
    sq.spiral_minus = spiral(std::polar(rho, a0), nu, std::log(10.0), spacing);
    sq.spiral_plus = spiral(std::polar(rho, a1), nu, std::log(10.0), spacing);
    sq.node = seps[2 * j].root;

    if (sq.node >= 0 && sq.node != sq.saddle_plus) {
      // fan of trajectories leaving the node; keep the middle of the run reaching the saddle
      const int fan = 72;
      std::vector<Trajectory> trs(fan);
      std::vector<bool> hit(fan, false);
      for (int i = 0; i < fan; ++i) {
        trs[i] = integrate_trajectory(p, th, rts[sq.node] + std::polar(10 * rl, 2 * kPi * i / fan), rho, c);
        hit[i] = trs[i].terminal == Terminal::Landed && trs[i].root == sq.saddle_plus;
      }
      int best_start = -1, best_len = 0;
      for (int i = 0; i < fan; ++i) {
        if (!hit[i] || hit[(i - 1 + fan) % fan]) continue;
        int len = 0;
        while (len < fan && hit[(i + len) % fan]) ++len;
        if (len > best_len) {
          best_len = len;
          best_start = i;
        }
      }
      if (best_len == fan) best_start = 0;
      if (best_start >= 0) {
        const auto& tr = trs[(best_start + best_len / 2) % fan];
        sq.gate.push_back(rts[sq.node]);
        sq.gate.insert(sq.gate.end(), tr.points.begin(), tr.points.end());
        sq.gate.push_back(rts[sq.saddle_plus]);
      }
    }
    out.push_back(std::move(sq));
  }
  return out;
}

}  // namespace unfolding
