#pragma once

// Phase-I / phase-II log-barrier interior-point method with damped Newton
// centering and KKT certification.

#include <iosfwd>
#include <vector>

#include "hcmec/convex.hpp"

namespace hcmec {

struct SolverOptions
{
  double t0 = 1.0;
  double t_factor = 10.0;
  /// Stop once m / t < gap_per_constraint * m.
  double gap_per_constraint = 1e-7;
  double ls_alpha = 0.25;
  double ls_beta = 0.5;
  int newton_cap = 50;       // per centering step
  double newton_tol = 1e-9;  // on lambda^2 / 2
  /// Below this decrement full Newton steps are taken without a decrease test.
  double pure_newton_decrement = 1e-4;
  /// Phase-I optimum above this value declares the problem infeasible.
  double eps_feas = 1e-9;
  /// Stationarity target, relative: eps_kkt * (1 + ||objective|| + sum_i ||lambda_i grad g_i||).
  double eps_kkt = 1e-6;
  /// Minimum distance phase I keeps from the domain bounds at its start.
  double domain_margin = 1e-4;
  bool record_trace = false;
};

enum class SolverStatus
{
  Optimal,
  MaxIter,
  Infeasible,
};

const char *to_string (SolverStatus status);

struct NewtonTraceRow
{
  int iteration = 0;
  double t = 0.0;
  double barrier = 0.0;
  double decrement = 0.0;  // lambda^2 / 2
  bool phase1 = false;
};

struct SolverSolution
{
  SolverStatus status = SolverStatus::Infeasible;
  Eigen::VectorXd x;
  Eigen::VectorXd duals;
  double objective = 0.0;
  double max_violation = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;
  double final_t = 0.0;
  int newton_iterations = 0;
  int phase1_iterations = 0;
  std::vector<NewtonTraceRow> trace;
};

struct Phase1Result
{
  bool feasible = false;
  Eigen::VectorXd x;
  /// Smallest achieved common bound s on the relaxed constraints.
  double min_bound = 0.0;
  int newton_iterations = 0;
  bool unchanged = false;
};

struct KktResidual
{
  double stationarity = 0.0;
  double complementarity = 0.0;
  /// sum_i ||lambda_i grad g_i||, the size of the terms that cancel in the residual.
  double gradient_scale = 0.0;
};

/// Strictly feasible point for p, or a certificate that none exists.
Phase1Result phase1 (const ConvexSubproblem &p, const SolverOptions &opts = {},
                     std::vector<NewtonTraceRow> *trace = nullptr);

SolverSolution solve (const ConvexSubproblem &p, const SolverOptions &opts = {});

/// Lagrangian stationarity ||-c + sum_i lambda_i grad g_i|| and max |lambda_i g_i|.
KktResidual kkt_residual (const ConvexSubproblem &p, const Eigen::VectorXd &x, const Eigen::VectorXd &duals);

/// iteration,t,barrier,newton_decrement
void write_trace_csv (const std::vector<NewtonTraceRow> &trace, std::ostream &out);

}  // namespace hcmec
