#pragma once

// Hand-built scenarios shared by the unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include "hcmec/experiment.hpp"
#include "hcmec/model.hpp"
#include "hcmec/scenario.hpp"

namespace hcmec::testing {

/// Scenario with zero channels, unit noise and default budgets. Users in
/// `serving` are kCloud or a UAV index.
inline NetworkScenario
bare_scenario (int num_bs, int bs_antennas, int num_uav, int uav_antennas, const std::vector<int> &serving,
               double noise = 1.0)
{
  NetworkScenario sc;
  sc.topology.num_bs = num_bs;
  sc.topology.bs_antennas = bs_antennas;
  sc.topology.num_uav = num_uav;
  sc.topology.uav_antennas = uav_antennas;
  sc.topology.num_users = static_cast<int> (serving.size ());
  sc.bs.assign (num_bs, Position{});
  sc.uav.assign (num_uav, Position{0.0, 0.0, 150.0});
  sc.users.assign (serving.size (), Position{});
  sc.serving = serving;
  for (std::size_t k = 0; k < serving.size (); ++k)
    {
      sc.h_bs.push_back (ComplexVector::Zero (num_bs * bs_antennas));
      sc.h_uav.emplace_back (num_uav, ComplexVector::Zero (uav_antennas));
      sc.tasks.push_back (TaskParams{});
    }
  const BudgetParams budget;
  sc.noise_power = noise;
  sc.bandwidth = 1e7;
  sc.bs_power_max = dbm_to_watts (budget.bs_power_dbm);
  sc.uav_power_max = dbm_to_watts (budget.uav_power_dbm);
  sc.fronthaul_capacity = budget.fronthaul_capacity_bps;
  sc.cc_capacity = budget.cc_capacity_cps;
  sc.ec_capacity = budget.ec_capacity_cps;
  sc.cpu_s = budget.cpu_s;
  sc.cpu_mu = budget.cpu_mu;
  sc.ec_operation_power = budget.ec_operation_power_w;
  return sc;
}

inline ComplexVector
random_cn (int n, Rng &rng, double scale = 1.0)
{
  std::normal_distribution<double> g (0.0, std::sqrt (0.5) * scale);
  ComplexVector v (n);
  for (int i = 0; i < n; ++i)
    v[i] = Complex (g (rng), g (rng));
  return v;
}

/// Random beamformers of the right shape for every user.
inline std::vector<ComplexVector>
random_beams (const NetworkScenario &sc, Rng &rng, double scale = 1.0)
{
  std::vector<ComplexVector> w;
  for (int k = 0; k < sc.num_users (); ++k)
    w.push_back (random_cn (sc.entity_antennas (sc.serving[k]), rng, scale));
  return w;
}

/// Random channels on every antenna of `sc`.
inline void
randomize_channels (NetworkScenario &sc, Rng &rng, double scale = 1.0)
{
  for (int k = 0; k < sc.num_users (); ++k)
    {
      sc.h_bs[k] = random_cn (sc.num_bs () * sc.bs_antennas (), rng, scale);
      for (auto &h : sc.h_uav[k])
        h = random_cn (sc.uav_antennas (), rng, scale);
    }
}

/// The desk preset's scenario for one seed, with E UAVs.
inline NetworkScenario
desk_scenario (std::uint64_t seed, int num_uav = 2)
{
  const ExperimentConfig cfg = preset_config ("desk");
  return cell_scenario (cfg, num_uav, seed);
}

inline double
rel_diff (double a, double b)
{
  return std::abs (a - b) / std::max ({std::abs (a), std::abs (b), 1e-300});
}

}  // namespace hcmec::testing
