#pragma once

// Transformations that turn the mixed-integer, non-convex resource allocation
// problem into a sequence of convex subproblems: reweighted l1 link weights,
// the first-order majorant of the bilinear fronthaul term, the quadratic
// transform of the SINR ratio and its closed-form auxiliary, and assembly of
// the per-iteration constraint system for a chosen scope.

#include <cstdint>
#include <span>
#include <vector>

#include "hcmec/convex.hpp"
#include "hcmec/model.hpp"

namespace hcmec {

/// Outer-loop constants frozen for one subproblem.
struct SurrogateAnchors
{
  Eigen::MatrixXd beta;    // B x K link weights
  Eigen::MatrixXd q_prev;  // B x K
  Eigen::VectorXd r_prev;  // bit/s
  Eigen::VectorXcd u;      // quadratic-transform auxiliaries (physical units)
  double delta = 1e-8;

  static SurrogateAnchors from_state (const VariableState &state, double delta);
};

/// 1 / (delta + previous link power).
double link_weight (double previous_power, double delta);

/// beta_{b,k} for every BS/user pair; UAV users get 1 / delta (no BS power).
Eigen::MatrixXd update_weights (const std::vector<ComplexVector> &w_prev, const NetworkScenario &sc, double delta);

/// sum_k (q+r)^2 - 2 (q'-r')(q-r) + (q'-r')^2, compared against 4 R_b^max.
double sca_fronthaul_lhs (std::span<const double> q, std::span<const double> r, std::span<const double> q_prev,
                          std::span<const double> r_prev);

/// gamma_k - 2 Re{conj(u_k) w_k^H h_k} + |u_k|^2 (sigma^2 + extra + sum_{i != k} |h_k^H w_i|^2)
double quadratic_transform_residual (int k, const std::vector<ComplexVector> &w, double gamma_k, Complex u_k,
                                     const NetworkScenario &sc, double extra_interference = 0.0);

/// Minimizer of the residual in u_k: w_k^H h_k / (sigma^2 + extra + interference).
Complex optimal_u (int k, const std::vector<ComplexVector> &w, const NetworkScenario &sc,
                   double extra_interference = 0.0);

enum class ScopeKind
{
  Network,  // all users, all entities
  Cloud,    // users of the central cloud
  Edge,     // users of one UAV
};

struct SubproblemScope
{
  ScopeKind kind = ScopeKind::Network;
  int ec = 0;
  /// Optional explicit user list; every entry must be owned by the scope.
  std::vector<int> users;
  /// Interference from outside the scope at each user (W), treated as noise.
  std::vector<double> foreign_interference;
  /// Replace the reweighted/majorized fronthaul machinery by exact per-BS
  /// rate sums over the `active` links; inactive BS blocks are pinned to zero.
  bool fixed_clustering = false;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> active;  // B x K

  static SubproblemScope network () { return {}; }
  static SubproblemScope cloud ();
  static SubproblemScope edge (int e);

  /// kCloud, a UAV index, or -2 for the whole network.
  int entity () const;
  bool owns (int k, const NetworkScenario &sc) const;
  std::vector<int> resolve_users (const NetworkScenario &sc) const;
};

/// Internal scaling of the subproblem. Rates are expressed in rate_unit,
/// cycles in cycle_unit and channels are normalized by the noise amplitude.
struct AssemblyOptions
{
  double rate_unit = 1e6;
  double cycle_unit = 1e9;
  double r_floor = 1.0;  // bit/s
  double f_floor = 1.0;  // cycles/s
};

struct SubproblemLayout
{
  std::vector<int> users;
  std::vector<int> r;
  std::vector<int> f;
  std::vector<int> gamma;
  /// Real-part index per antenna coefficient (imaginary part follows), -1 when pinned to zero.
  std::vector<std::vector<int>> w;
  /// Per BS, -1 when absent.
  std::vector<std::vector<int>> q;
  AssemblyOptions units;
};

struct AssembledSubproblem
{
  ConvexSubproblem problem;
  SubproblemLayout layout;
};

/// Emits the convex constraint system for the scope: quadratic-transform SINR
/// residuals, log-rate bounds, link-weight bounds, majorized fronthaul, BS and
/// UAV power, compute capacities, and delay limits. Throws std::invalid_argument
/// when the scope lists users it does not own.
AssembledSubproblem assemble_subproblem (const SubproblemScope &scope, const VariableState &state,
                                         const SurrogateAnchors &anchors, const NetworkScenario &sc,
                                         const AssemblyOptions &opts = {});

/// Variables of the scoped users packed in layout order (physical -> scaled units).
Eigen::VectorXd pack (const SubproblemLayout &layout, const VariableState &state, const NetworkScenario &sc);

/// Copies a subproblem point back into the scoped users' variables.
void write_back (const SubproblemLayout &layout, const Eigen::VectorXd &x, const NetworkScenario &sc,
                 VariableState &state);

/// Random start: CN(0,1) beamformers scaled to half of each BS budget and half
/// of each UAV's residual budget, equal compute split, SINR auxiliaries and
/// rates slightly inside their bounds, link weights and surrogates at the start.
VariableState initialize_state (const NetworkScenario &sc, std::uint64_t seed, double delta);

}  // namespace hcmec
