#pragma once

// Configuration-driven sweeps over one scenario parameter, producing
// plot-ready CSV tables with per-seed rows and mean/std aggregates.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcmec/protocols.hpp"
#include "hcmec/serialization.hpp"

namespace hcmec {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class SweepAxis
{
  NumUav,
  FronthaulCapacity,
  DataRatio,  // D_k / F_k
  UserDensity,  // users per km^2 of the coverage disk
  MaxDelay,
};

const char *to_string (SweepAxis axis);
SweepAxis axis_from_string (const std::string &name);

struct ExperimentConfig
{
  std::string preset = "desk";
  TopologyParams topology;
  ChannelParams channel;
  TaskParams task;
  BudgetParams budget;
  ProtocolOptions options;
  SweepAxis axis = SweepAxis::NumUav;
  std::vector<double> axis_values;
  std::vector<std::uint64_t> seeds;
  std::vector<Protocol> protocols;
  std::string output_dir = "results";
  int jobs = 1;
  /// When false the wall-clock column is written as zero, making repeated runs byte-identical.
  bool record_wallclock = true;
  bool save_states = false;

  void validate () const;
};

/// "desk" (3 BSs, K = 8, E = 2, 10 seeds) or "paper" (7 BSs, K = 30).
ExperimentConfig preset_config (const std::string &name);

/// Recognized top-level keys: preset, axis, axis_values, seeds, protocols,
/// output_dir, jobs, record_wallclock, save_states, overrides. Overrides use
/// dotted keys such as "task.max_delay_s" or "budget.fronthaul_capacity_bps".
ExperimentConfig config_from_json (const Json &doc);
Json config_to_json (const ExperimentConfig &cfg);
ExperimentConfig load_config (const std::string &path);

/// Scenario of one sweep cell.
NetworkScenario cell_scenario (const ExperimentConfig &cfg, double axis_value, std::uint64_t seed);

struct SweepRow
{
  double axis = 0.0;
  std::string seed;  // seed number, "mean" or "std"
  Protocol protocol = Protocol::Fcp;
  double objective = 0.0;
  double avg_rate_bps = 0.0;
  double worst_delay_s = 0.0;
  double delay_comp_s = 0.0;
  double delay_tx_s = 0.0;
  double delay_fh_s = 0.0;
  double wallclock_s = 0.0;
  double outer_iters = 0.0;
};

struct SweepTable
{
  std::vector<SweepRow> rows;        // axis-major, then seed, then protocol
  std::vector<SweepRow> aggregates;  // per axis value and protocol: mean, then std
};

struct CellRecord
{
  double axis = 0.0;
  std::uint64_t seed = 0;
  NetworkScenario scenario;
  RunResult result;
  bool infeasible = false;
};

/// Runs every (axis value, seed, protocol) cell on up to cfg.jobs workers. The
/// callback, if given, sees every finished cell in table order.
SweepTable run_sweep (const ExperimentConfig &cfg, const std::function<void (const CellRecord &)> &on_cell = {});

/// Mean and sample standard deviation over the seed rows of each (axis, protocol).
std::vector<SweepRow> aggregate_rows (const std::vector<SweepRow> &rows);

void emit_csv (const SweepTable &table, std::ostream &out);
void emit_csv (const SweepTable &table, const std::string &path);
SweepTable parse_csv (std::istream &in);

}  // namespace hcmec
