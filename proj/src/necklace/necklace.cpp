#include "unfolding/necklace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <regex>
#include <sstream>

#include "unfolding/errors.hpp"

namespace unfolding {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

int wrap(int j, int k) { return ((j % k) + k) % k; }

// Gaussian elimination with partial pivoting; throws on a singular matrix.
CVec solve_square(std::vector<CVec> A, CVec b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) < 1e-12) throw ArgumentError("gate_multipliers: crossing structure does not determine the multipliers");
    std::swap(A[piv], A[c]);
    std::swap(b[piv], b[c]);
    for (int r = c + 1; r < n; ++r) {
      const cplx f = A[r][c] / A[c][c];
      for (int q = c; q < n; ++q) A[r][q] -= f * A[c][q];
      b[r] -= f * b[c];
    }
  }
  CVec x(n);
  for (int r = n - 1; r >= 0; --r) {
    cplx acc = b[r];
    for (int q = r + 1; q < n; ++q) acc -= A[r][q] * x[q];
    x[r] = acc / A[r][r];
  }
  return x;
}

int matrix_rank(std::vector<CVec> A) {
  const int rows = static_cast<int>(A.size());
  const int cols = rows ? static_cast<int>(A[0].size()) : 0;
  int rank = 0;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = rank;
    for (int r = rank + 1; r < rows; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) < 1e-9) continue;
    std::swap(A[piv], A[rank]);
    for (int r = rank + 1; r < rows; ++r) {
      const cplx f = A[r][c] / A[rank][c];
      for (int q = c; q < cols; ++q) A[r][q] -= f * A[rank][q];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

BernoulliMap ber_compose(const BernoulliMap& b1, const BernoulliMap& b2) {
  if (b1.d < 1 || b2.d < 1) throw ArgumentError("ber_compose: d must be positive");
  if (b1.d != b2.d && !b1.is_linear() && !b2.is_linear())
    throw ArgumentError("ber_compose: Bernoulli maps of different index");
  const int d = b1.is_linear() ? b2.d : b1.d;
  return {d, b1.alpha * b2.alpha, b1.beta * std::pow(b2.alpha, d) + b2.beta};
}

BernoulliMap ber_inverse(const BernoulliMap& b) {
  if (b.alpha == 0.0) throw ArgumentError("ber_inverse: alpha = 0");
  return {b.d, 1.0 / b.alpha, -b.beta / std::pow(b.alpha, b.d)};
}

GermMap ber_to_germ(const BernoulliMap& b, int N) {
  if (b.d < 1) throw ArgumentError("ber_to_germ: d must be positive");
  if (N < 1) throw ArgumentError("ber_to_germ: N must be positive");
  if (b.is_linear()) return GermMap::linear(b.alpha, N);
  CVec a(N, 0.0);
  a[0] = 1.0;
  if (b.d < N) a[b.d] = b.beta;
  const CVec e = series1::pow(a, -1.0 / b.d, N - 1);
  GermMap g(CVec(N, 0.0));
  for (int p = 1; p <= N; ++p) g.coeffs[p - 1] = b.alpha * e[p - 1];
  return g;
}

Word parse_word(const std::string& text, int k) {
  if (k < 1) throw ArgumentError("parse_word: k must be positive");
  static const std::regex tok(R"(([sg])(-?\d+)([+-]))");
  std::istringstream in(text);
  std::string t;
  Word w;
  while (in >> t) {
    std::smatch m;
    if (!std::regex_match(t, m, tok)) throw ArgumentError("parse_word: bad token '" + t + "'");
    w.push_back({m[1].str()[0], wrap(std::stoi(m[2].str()), k), m[3].str() == "+" ? 1 : -1});
  }
  return w;
}

std::string to_string(const Word& w) {
  std::string out;
  for (const auto& l : w) {
    if (!out.empty()) out += ' ';
    out += l.kind;
    out += std::to_string(l.j);
    out += l.sign > 0 ? '+' : '-';
  }
  return out;
}

Word reduce(const Word& w) {
  Word out;
  for (const auto& l : w) {
    if (!out.empty() && out.back() == l.inverse())
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

Word word_inverse(const Word& w) {
  Word out;
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(it->inverse());
  return out;
}

GermMap saddle_map(const NecklaceSystem& sys, int j, int N) {
  if (j < 0 || j >= static_cast<int>(sys.phi.size())) throw ArgumentError("saddle_map: sector index out of range");
  return exp_germ(2.0 * kPi * kI * sys.mu / double(sys.k), sys.phi[j], N);
}

GermMap word_holonomy(const Word& w, const NecklaceSystem& sys, int N) {
  if (static_cast<int>(sys.phi.size()) != sys.k || static_cast<int>(sys.nus.size()) != sys.k)
    throw ArgumentError("word_holonomy: system needs k saddle germs and k gate multipliers");
  GermMap acc = GermMap::identity(N);
  for (const auto& l : reduce(w)) {
    if (l.j < 0 || l.j >= sys.k) throw ArgumentError("word_holonomy: letter index out of range");
    GermMap step;
    if (l.kind == 's') {
      step = saddle_map(sys, l.j, N);
      if (l.sign < 0) step = inverse(step);
    } else {
      step = GermMap::linear(l.sign > 0 ? sys.nus[l.j] : 1.0 / sys.nus[l.j], N);
    }
    acc = compose(step, acc);
  }
  return acc;
}

cplx root_ramification(const CPoly& p, cplx mu, cplx root) {
  const cplx d = p.deriv(root);
  if (std::abs(d) < 1e-300) throw DegenerateError("root_ramification: multiple root");
  return std::exp(-2.0 * kPi * kI * (1.0 + mu * std::pow(root, p.k)) / d);
}

CrossingStructure k1_crossings(int saddle_root) {
  if (saddle_root != 0 && saddle_root != 1) throw ArgumentError("k1_crossings: root index must be 0 or 1");
  CrossingStructure cs(2);
  cs[saddle_root] = {{'s', 0, -1}, {'g', 0, -1}};
  cs[1 - saddle_root] = {{'g', 0, 1}};
  return cs;
}

CVec gate_multipliers(const CPoly& p, cplx mu, const std::vector<int>& sigma,
                      const std::optional<CrossingStructure>& crossings, int saddle_root) {
  const int k = p.k;
  if (static_cast<int>(sigma.size()) != k) throw ArgumentError("gate_multipliers: sigma must have k entries");
  if (!crossings && k != 1) throw ArgumentError("gate_multipliers: k >= 2 requires an explicit crossing structure");
  const CrossingStructure cs = crossings ? *crossings : k1_crossings(saddle_root);
  const CVec rts = roots(p);
  if (cs.size() != rts.size()) throw ArgumentError("gate_multipliers: one crossing word per root required");

  // log nu_j unknowns: sum_g sign log nu_j = log R_r - (sum_s sign) 2 pi i mu / k
  std::vector<CVec> A(rts.size(), CVec(k, 0.0));
  CVec b(rts.size());
  for (std::size_t r = 0; r < rts.size(); ++r) {
    int saddles = 0;
    for (const auto& l : cs[r]) {
      if (l.j < 0 || l.j >= k) throw ArgumentError("gate_multipliers: letter index out of range");
      if (l.kind == 'g')
        A[r][l.j] += double(l.sign);
      else
        saddles += l.sign;
    }
    b[r] = std::log(root_ramification(p, mu, rts[r])) - double(saddles) * 2.0 * kPi * kI * mu / double(k);
  }

  // Greedy choice of k independent equations, solved exactly; the rest are checked.
  std::vector<int> chosen;
  std::vector<CVec> sub;
  for (std::size_t r = 0; r < A.size() && static_cast<int>(chosen.size()) < k; ++r) {
    sub.push_back(A[r]);
    if (matrix_rank(sub) == static_cast<int>(sub.size()))
      chosen.push_back(static_cast<int>(r));
    else
      sub.pop_back();
  }
  if (static_cast<int>(chosen.size()) < k)
    throw ArgumentError("gate_multipliers: crossing structure does not determine the multipliers");
  CVec rhs;
  for (int r : chosen) rhs.push_back(b[r]);
  const CVec logs = solve_square(sub, rhs);
  CVec nus(k);
  for (int j = 0; j < k; ++j) nus[j] = std::exp(logs[j]);
  if (ramification_defect(p, mu, nus, cs) > 1e-9)
    throw ArgumentError("gate_multipliers: no solution for the crossing structure");
  return nus;
}

double ramification_defect(const CPoly& p, cplx mu, const CVec& nus, const CrossingStructure& crossings) {
  const CVec rts = roots(p);
  if (crossings.size() != rts.size()) throw ArgumentError("ramification_defect: one crossing word per root required");
  const cplx sector = std::exp(2.0 * kPi * kI * mu / double(p.k));
  double worst = 0.0;
  for (std::size_t r = 0; r < rts.size(); ++r) {
    cplx prod = 1.0;
    for (const auto& l : crossings[r]) {
      const cplx f = l.kind == 'g' ? nus.at(l.j) : sector;
      prod *= l.sign > 0 ? f : 1.0 / f;
    }
    const cplx R = root_ramification(p, mu, rts[r]);
    worst = std::max(worst, std::abs(prod - R) / std::abs(R));
  }
  return worst;
}

std::vector<GermMap> act_modulus(cplx c, int theta, const std::vector<GermMap>& m) {
  if (c == 0.0) throw ArgumentError("act_modulus: c must be nonzero");
  const int k = static_cast<int>(m.size());
  std::vector<GermMap> out;
  out.reserve(k);
  for (int j = 0; j < k; ++j) {
    const GermMap& f = m[wrap(j + theta, k)];
    GermMap g = f;
    cplx cp = c;
    for (int p = 1; p <= g.order(); ++p, cp *= c) g.coeffs[p - 1] *= cp;
    out.push_back(std::move(g));
  }
  return out;
}

CompatResult check_compatibility(const NecklaceSystem& a, const NecklaceSystem& b, const std::vector<Word>& generators,
                                 int N, double threshold) {
  if (a.k != b.k) throw ArgumentError("check_compatibility: systems have different k");
  if (N < 1) throw ArgumentError("check_compatibility: N must be positive");
  CompatResult res;
  std::vector<GermMap> pa, pb;
  for (const auto& w : generators) {
    pa.push_back(word_holonomy(w, a, N));
    pb.push_back(word_holonomy(w, b, N));
  }
  const std::size_t G = generators.size();
  for (std::size_t g = 0; g < G; ++g) {
    const cplx ma = pa[g].coeff(1), mb = pb[g].coeff(1);
    const double dev = std::abs(ma - mb) / std::max(1.0, std::abs(ma));
    if (dev > threshold) {
      res.failing_order = 1;
      res.failing_word = generators[g];
      res.defect = dev;
      return res;
    }
  }

  // At order p: (a_1 - a_1^p) delta_p + [A o delta - delta o B]_p (delta_p = 0) = 0, stacked over generators.
  GermMap delta = GermMap::identity(N);
  for (int p = 2; p <= N; ++p) {
    const GermMap dp = delta.truncated(p);
    CVec coef(G), rhs(G);
    double scale = 1.0;
    for (std::size_t g = 0; g < G; ++g) {
      const cplx a1 = pa[g].coeff(1);
      coef[g] = a1 - std::pow(a1, p);
      rhs[g] = -(compose(pa[g].truncated(p), dp).coeff(p) - compose(dp, pb[g].truncated(p)).coeff(p));
      scale = std::max(scale, std::abs(rhs[g]));
    }
    double nrm = 0.0;
    cplx num = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      nrm += std::norm(coef[g]);
      num += std::conj(coef[g]) * rhs[g];
    }
    const cplx dpv = nrm > 1e-24 ? num / nrm : cplx(0.0);
    double worst = 0.0;
    std::size_t worst_g = 0;
    for (std::size_t g = 0; g < G; ++g) {
      const double r = std::abs(coef[g] * dpv - rhs[g]) / scale;
      if (r > worst) {
        worst = r;
        worst_g = g;
      }
    }
    res.defect = std::max(res.defect, worst);
    if (worst > threshold) {
      res.failing_order = p;
      res.failing_word = generators[worst_g];
      res.defect = worst;
      return res;
    }
    delta.coeffs[p - 1] = dpv;
  }
  res.compatible = true;
  res.delta = delta;
  return res;
}

}  // namespace unfolding
