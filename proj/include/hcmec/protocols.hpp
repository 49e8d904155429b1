#pragma once

// Outer-loop orchestration of the centralized (FCP), partially decentralized
// (PDP) and fully distributed (FDP) protocols.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcmec/model.hpp"
#include "hcmec/reformulate.hpp"
#include "hcmec/solver.hpp"

namespace hcmec {

enum class Protocol
{
  Fcp,
  Pdp,
  Fdp,
};

const char *to_string (Protocol p);
/// "fcp", "pdp" or "fdp" (case-insensitive); throws std::invalid_argument otherwise.
Protocol protocol_from_string (const std::string &name);

struct ProtocolOptions
{
  Protocol protocol = Protocol::Fcp;
  int max_outer_iterations = 100;
  double rel_tol = 1e-4;
  bool freeze_beta = false;
  double delta = 1e-5;  // W, smoothing of the link weights
  std::uint64_t init_seed = 1;
  /// Phase-I rounds with refreshed auxiliaries before the first iteration.
  int restoration_rounds = 50;
  double eps_feas = 1e-6;
  double activity_threshold = 0.0;  // W; <= 0 selects the scenario default
  /// Re-solve once with the final clustering and exact fronthaul sums.
  bool polish = true;
  int polish_iterations = 20;
  /// Reject an outer iterate whose audited objective falls below the previous one.
  bool monotone_safeguard = true;
  /// FDP only: raise compute cycles of users whose delay breaks after rate capping.
  bool fdp_delay_repair = true;
  /// Solve the entity subproblems of a PDP/FDP round on separate threads.
  bool parallel_entities = false;
  SolverOptions solver;
  AssemblyOptions units;

  void validate () const;
};

class InfeasibleInstance : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Per (entity, user) interference in watts. Slot 0 is the cloud, slot 1 + e UAV e.
struct InterferenceTable
{
  Eigen::MatrixXd rows;  // (E + 1) x K

  static int slot (int entity) { return entity == kCloud ? 0 : entity + 1; }
  double at (int entity, int k) const { return rows (slot (entity), k); }
  /// Sum of every row except the one of `own_entity`.
  double foreign (int k, int own_entity) const;
  /// Number of scalars forwarded in one exchange round.
  long scalar_count () const { return static_cast<long> (rows.size ()); }
};

/// row[k] = sum over users i of `entity`, i != k, of |h_k^H w_i|^2.
Eigen::VectorXd compute_interference_report (int entity, const std::vector<ComplexVector> &w,
                                             const NetworkScenario &sc);

InterferenceTable build_interference_table (const std::vector<ComplexVector> &w, const NetworkScenario &sc);

/// max_k |sigma^2 + sum of rows at k - (sigma^2 + interference_k)| / (sigma^2 + interference_k).
double decomposition_error (const InterferenceTable &table, const std::vector<ComplexVector> &w,
                            const NetworkScenario &sc);

struct RunResult
{
  Protocol protocol = Protocol::Fcp;
  std::vector<double> objective_trace;  // audited objective per outer iteration, bit/s
  std::vector<double> wallclock_trace;  // seconds since start, per outer iteration
  std::vector<double> polish_trace;
  VariableState state;
  MetricsReport metrics;
  FeasibilityReport feasibility;
  double wallclock_s = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<long> exchanged_scalars;  // per round
  long total_exchanged = 0;
  double max_decomposition_error = 0.0;
  int rejected_iterates = 0;
  SolverStatus last_status = SolverStatus::Optimal;
  /// PDP/FDP: users whose delay limit fails after rate capping and repair.
  std::vector<int> repair_failures;

  double objective () const { return metrics.objective; }
};

RunResult run_fcp (const NetworkScenario &sc, const ProtocolOptions &opts,
                   const std::optional<VariableState> &start = std::nullopt);
RunResult run_pdp (const NetworkScenario &sc, const ProtocolOptions &opts,
                   const std::optional<VariableState> &start = std::nullopt);
RunResult run_fdp (const NetworkScenario &sc, const ProtocolOptions &opts,
                   const std::optional<VariableState> &start = std::nullopt);
/// Dispatches on opts.protocol.
RunResult run_protocol (const NetworkScenario &sc, const ProtocolOptions &opts,
                        const std::optional<VariableState> &start = std::nullopt);

/// Sum of alpha_k min(r_k, tau log2(1 + SINR_k)).
double audited_objective (const VariableState &state, const NetworkScenario &sc);

/// Real decision variables per outer iteration as tabulated for each protocol
/// (complex beamformer entries count once).
long table_variable_count (Protocol p, const NetworkScenario &sc);
/// Same count for the cloud or one UAV subproblem under PDP/FDP.
long table_entity_variable_count (int entity, const NetworkScenario &sc);

}  // namespace hcmec
