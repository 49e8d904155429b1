#pragma once

// Optimization variables, metric evaluation and feasibility auditing against
// the original (unrelaxed) joint communication/computation problem.

#include <string>
#include <vector>

#include "hcmec/scenario.hpp"

namespace hcmec {

/// Current iterate of all optimization variables plus outer-loop auxiliaries.
///
/// w[k] lives on the serving entity's antennas only: length B * L_c for cloud
/// users (block b feeds BS b) and L_e for UAV users. Per-link matrices (q,
/// beta, q_prev) are B x K; columns of UAV users are unused.
struct VariableState
{
  std::vector<ComplexVector> w;
  Eigen::VectorXd r;      // bit/s
  Eigen::VectorXd f;      // cycles/s
  Eigen::VectorXd gamma;  // SINR auxiliary
  Eigen::MatrixXd q;
  Eigen::VectorXcd u;
  Eigen::MatrixXd beta;
  Eigen::MatrixXd q_prev;
  Eigen::VectorXd r_prev;

  /// Correctly shaped, all-zero state (beta set to one).
  static VariableState zeros (const NetworkScenario &sc);
  /// Throws std::invalid_argument when dimensions disagree with the scenario.
  void check_dimensions (const NetworkScenario &sc) const;
};

/// h_k^H w_i, taken over the antennas of user i's serving entity.
Complex beam_response (int k, int i, const std::vector<ComplexVector> &w, const NetworkScenario &sc);

/// Sum over i != k of |h_k^H w_i|^2.
double interference (int k, const std::vector<ComplexVector> &w, const NetworkScenario &sc);

double sinr (int k, const VariableState &state, const NetworkScenario &sc);
double sinr (int k, const std::vector<ComplexVector> &w, const NetworkScenario &sc);

/// tau * log2(1 + SINR_k).
double rate_bound (int k, const std::vector<ComplexVector> &w, const NetworkScenario &sc);

/// ||w_{b,k}||^2; zero for UAV users.
double link_power (int b, int k, const VariableState &state, const NetworkScenario &sc);

double bs_power (int b, const VariableState &state, const NetworkScenario &sc);

struct EcPower
{
  double transmit = 0.0;
  double computation = 0.0;
  double operation = 0.0;
  double total () const { return transmit + computation + operation; }
};

EcPower power_ec (int e, const VariableState &state, const NetworkScenario &sc);

struct DelayBreakdown
{
  double computation = 0.0;
  double fronthaul = 0.0;
  double transmission = 0.0;
  double total () const { return computation + fronthaul + transmission; }
};

/// Throws std::domain_error for non-positive f_k or r_k.
DelayBreakdown delay (int k, const VariableState &state, const NetworkScenario &sc);

/// Sum of r_k over links whose power exceeds the activity threshold.
double fronthaul_load (int b, const VariableState &state, const NetworkScenario &sc, double activity_threshold);

/// 1e-6 * P_b^max.
double default_activity_threshold (const NetworkScenario &sc);

struct MetricsReport
{
  std::vector<double> sinr;
  std::vector<double> rate_bound;
  std::vector<double> rate;
  std::vector<DelayBreakdown> delay;
  std::vector<double> bs_power;
  std::vector<double> fronthaul_load;
  std::vector<EcPower> ec_power;
  double objective = 0.0;  // sum alpha_k r_k
  /// Largest delay; among users tied with it, the one with the longest transmission.
  int worst_delay_user = -1;

  double average_rate () const;
  double worst_delay () const;
};

MetricsReport evaluate_metrics (const VariableState &state, const NetworkScenario &sc, double activity_threshold);

enum class ConstraintFamily
{
  BsPower,
  EcPower,
  Fronthaul,
  CloudCapacity,
  EcCapacity,
  Rate,
  Delay,
};

const char *to_string (ConstraintFamily family);

struct ConstraintSlack
{
  ConstraintFamily family;
  int index = 0;           // BS, EC or user index within the family
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;           // rhs - lhs
  double relative_slack = 0.0;  // slack / max(|rhs|, |lhs|)
  bool pass = false;

  std::string id () const;
};

struct FeasibilityReport
{
  double tolerance = 0.0;
  std::vector<ConstraintSlack> entries;

  bool pass () const;
  std::vector<std::string> violations () const;
};

/// Evaluates every constraint of the original problem. Never throws on an
/// infeasible state; infinite delays are reported as violations.
FeasibilityReport audit (const VariableState &state, const NetworkScenario &sc, double eps_feas,
                         double activity_threshold);
FeasibilityReport audit (const VariableState &state, const NetworkScenario &sc, double eps_feas);

}  // namespace hcmec
