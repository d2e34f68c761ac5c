#pragma once

#include "unfolding/series.hpp"

namespace unfolding {

struct FormalInvariants {
  cplx mu = 0.0;
  CVec u;  // degree <= k
};

// Invariant curve y = s(x) of xdot = Ax, ydot = Ay, as coefficients s_0..s_N.
// Ay must have a nonzero y-linear coefficient at the origin.
CVec solve_center_manifold(const TSeries& Ax, const TSeries& Ay, int k, int N);

struct CohomologicalSolution {
  TSeries F;
  CVec obstruction;  // remainder of G(x, 0) modulo P, degree <= k
};

// X . F = G for the orbital field of `field`, slice by slice in y.
CohomologicalSolution solve_cohomological(const UnfoldingField& field, const TSeries& G);

// Z = U X with X the orbital field.  u = U(x, 0) mod P, mu from the y-linear part of X.
FormalInvariants formal_invariants(const VField& X, const TSeries& U, const CPoly& p);
FormalInvariants formal_invariants(const UnfoldingField& field, int nx = 24, int ny = 12);

// W - (W.F) / (1 + Y.F) Y, componentwise.
VField flow_conjugate(const VField& W, const VField& Y, const TSeries& F);

}  // namespace unfolding
