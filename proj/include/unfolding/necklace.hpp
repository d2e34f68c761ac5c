#pragma once

#include <optional>
#include <string>
#include <vector>

#include "unfolding/cpoly.hpp"
#include "unfolding/germ.hpp"

namespace unfolding {

// h -> alpha h (1 + beta h^d)^{-1/d}. In w = h^{-d} it reads w -> alpha^{-d} (w + beta).
struct BernoulliMap {
  int d = 1;
  cplx alpha = 1.0;
  cplx beta = 0.0;

  bool is_linear() const { return beta == 0.0; }
};

// b1 o b2 as germs: (alpha1 alpha2, beta1 alpha2^d + beta2).
BernoulliMap ber_compose(const BernoulliMap& b1, const BernoulliMap& b2);
BernoulliMap ber_inverse(const BernoulliMap& b);
GermMap ber_to_germ(const BernoulliMap& b, int N);

struct Letter {
  char kind = 's';  // 's' saddle sector, 'g' gate sector
  int j = 0;
  int sign = 1;

  Letter inverse() const { return {kind, j, -sign}; }
  bool operator==(const Letter&) const = default;
};

using Word = std::vector<Letter>;

// Tokens like "s0+ g1-", separated by whitespace; indices taken mod k.
Word parse_word(const std::string& text, int k);
std::string to_string(const Word& w);
Word reduce(const Word& w);
Word word_inverse(const Word& w);

struct NecklaceSystem {
  int k = 1;
  cplx mu = 0.0;
  std::vector<GermMap> phi;  // additive germs, saddle maps h exp(2 pi i mu / k + phi_j(h))
  CVec nus;                  // gate maps h -> nu_j h
  std::vector<int> sigma;
};

GermMap saddle_map(const NecklaceSystem& sys, int j, int N);

// Letters are applied left to right: psi[w1 w2] = psi[w2] o psi[w1].
GermMap word_holonomy(const Word& w, const NecklaceSystem& sys, int N);

// exp(-2 pi i (1 + mu x^k) / P'(x)) at a root.
cplx root_ramification(const CPoly& p, cplx mu, cplx root);

// Letters crossed while turning once around each root (indexed as roots(p)).
// The product of their factors e^{+-2 pi i mu/k}, nu_j^{+-1} equals the root's ramification.
using CrossingStructure = std::vector<Word>;

// k = 1 with the given saddle-type root: {s0- g0-} around it, {g0+} around the other.
CrossingStructure k1_crossings(int saddle_root);

// Solves the product-of-ramifications equations for the k gate multipliers.
// k = 1 uses k1_crossings(saddle_root) when no structure is given; k >= 2 requires one.
CVec gate_multipliers(const CPoly& p, cplx mu, const std::vector<int>& sigma,
                      const std::optional<CrossingStructure>& crossings = std::nullopt, int saddle_root = 0);

// Largest deviation between crossing products and ramifications.
double ramification_defect(const CPoly& p, cplx mu, const CVec& nus, const CrossingStructure& crossings);

// j -> m[j + theta] o (c h).
std::vector<GermMap> act_modulus(cplx c, int theta, const std::vector<GermMap>& m);

struct CompatResult {
  bool compatible = false;
  std::optional<GermMap> delta;  // psi_A[w] o delta = delta o psi_B[w]
  int failing_order = 0;         // 1 for a multiplier mismatch
  Word failing_word;
  double defect = 0.0;
};

CompatResult check_compatibility(const NecklaceSystem& a, const NecklaceSystem& b, const std::vector<Word>& generators,
                                 int N, double threshold = 1e-9);

}  // namespace unfolding
