#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unfolding/cpoly.hpp"
#include "unfolding/germ.hpp"
#include "unfolding/series.hpp"

namespace unfolding {

using Curve = std::vector<cplx>;

// Rotation angle of the field e^{i theta} P d/dx, piecewise constant in x:
// theta_root applies within a quarter of the minimal root gap of that root.
struct ThetaProfile {
  double far = 0.0;
  std::map<int, double> by_root;

  double at(cplx x, const CVec& rts) const;
  double at_root(int index) const;
};

enum class Terminal { Landed, ExitedDisk, Homoclinic, Budget };
std::string to_string(Terminal t);

struct TrajectoryControls {
  double rtol = 1e-10;
  double atol = 1e-13;
  double max_step = -1.0;        // default: max(rho, |x|) / 50
  double landing_radius = -1.0;  // default: see landing_radius()
  double exit_radius = -1.0;     // default: rho
  int direction = 1;             // +1 forward, -1 backward in real time
  int max_steps = 200000;
};

struct Trajectory {
  Curve points;
  Terminal terminal = Terminal::Budget;
  int root = -1;  // index into roots(p) when Landed
  double theta = 0.0;
  double elapsed = 0.0;  // signed real time
  // arg(x - root) transported to the landing circle along the linearized flow
  double arrival_phase = 0.0;
};

// 1e-3 max(rho_eps, gap), capped at a quarter of the root gap; 1e-3 rho when eps = 0.
double landing_radius(const CPoly& p, const CVec& rts, double rho);

Trajectory integrate_trajectory(const CPoly& p, double theta, cplx x0, double rho, const TrajectoryControls& c = {});
Trajectory integrate_trajectory(const CPoly& p, const ThetaProfile& theta, cplx x0, double rho,
                                const TrajectoryControls& c = {});

// The 2k separatrix directions of infinity in increasing angle: even index 2l is
// repelling from the roots' side (integrated backward), odd index 2l+1 flows in from
// infinity (integrated forward).
std::vector<double> separatrix_angles(int k, double theta);
std::vector<Trajectory> separatrices_infinity(const CPoly& p, const ThetaProfile& theta, double rho);

enum class RootType { node, saddle, center };
std::string to_string(RootType t);
RootType classify_root(const CPoly& p, cplx root, double theta);

// 2 pi i sum_{I} 1/P'(x), I given as indices into roots(p).
cplx ds_tau(const CPoly& p, const std::vector<int>& subset);

struct DSInvariant {
  std::vector<int> sigma;
  CVec taus;
  std::vector<RootType> root_types;
  std::vector<std::vector<int>> homoclinic_partitions;
  // Petal a lies between separatrix directions a and a+1; pairs[j] = {2j, partner}.
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> landing;  // root index per separatrix
  CVec roots;
};

// Proper subsets I (as root indices, containing root 0 or not) with |Re nu(I)| <= tol sum|1/P'|.
std::vector<std::vector<int>> homoclinic_subsets(const CPoly& p, double tol = 1e-6);

DSInvariant ds_invariant(const CPoly& p, const ThetaProfile& theta, double rho);

std::uint64_t catalan(int k);

// Cycles increasing and the induced partition non-crossing.
bool is_noncrossing(const std::vector<int>& sigma);

// Lift of the loop x = x_star e^{2 pi i s direction} through dy/dx = B/A.
cplx weak_holonomy(const UnfoldingField& field, double x_star, cplx y0, int direction = 1, double guard = 1e3);

// Taylor coefficients of the holonomy through `order`, from samples on |y| = radius.
GermMap holonomy_germ(const UnfoldingField& field, double x_star, int direction, double radius, int order);

struct SquidSector {
  int j = 0;
  Curve arc;
  Curve boundary_minus, boundary_plus;  // land at saddle-type roots
  Curve spiral_minus, spiral_plus;      // geometric spirals to infinity
  Curve gate;                           // from the node-type vertex to a saddle-type vertex
  int saddle_minus = -1, saddle_plus = -1, node = -1;
};

std::vector<SquidSector> squid_boundaries(const CPoly& p, const ThetaProfile& theta, double rho, double nu,
                                          cplx mu0 = 1.0);

}  // namespace unfolding
