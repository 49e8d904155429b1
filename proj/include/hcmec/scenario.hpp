#pragma once

// Network instance generation: topology, channel draws and per-user task data.

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace hcmec {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using Rng = std::mt19937_64;

/// Serving-entity marker for users handled by the central cloud.
inline constexpr int kCloud = -1;

struct Position
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator== (const Position &) const = default;
};

double horizontal_distance (const Position &a, const Position &b);

struct TopologyParams
{
  int num_bs = 7;
  double inter_bs_distance = 400.0;  // m
  int bs_antennas = 3;
  int num_uav = 0;
  int uav_antennas = 1;
  double uav_altitude = 150.0;  // m
  int num_users = 0;
  std::optional<int> num_edge_users;  // unset: one per UAV
  double edge_user_radius = 100.0;    // m, around the serving UAV
  double min_bs_distance = 35.0;      // m, exclusion zone around each BS
  /// Redraws of a user whose task cannot be met even without interference.
  int max_redraws = 100;
  double service_margin = 2.0;  // required single-user SNR headroom
  /// Explicit BS layout. Empty selects the 7-site hexagon.
  std::vector<Position> bs_positions;
  /// Explicit UAV placement. Empty selects midpoints between outer-ring BS pairs.
  std::vector<Position> uav_positions;

  int edge_users () const { return num_edge_users.value_or (num_uav); }
  void validate () const;
};

struct ChannelParams
{
  double noise_psd_dbm_hz = -134.0;
  double bandwidth_hz = 1e7;
  double shadowing_std_db = 8.0;
  double eta_los_db = 4.0;
  double eta_nlos_db = 35.0;
  double los_a = 9.61;  // urban sigmoid parameters of the LoS probability
  double los_b = 0.16;
  double carrier_freq_hz = 2e9;

  void validate () const;
};

struct TaskParams
{
  double cycles = 1e8;               // F_k
  double data_bits = 1e5;            // D_k
  double max_delay_s = 0.6;          // t_k
  double fronthaul_delay_s = 4.5e-4; // Lambda_k
  double weight = 1.0;               // alpha_k

  void validate () const;
};

/// Power, fronthaul and compute budgets. Powers are given in dBm here and
/// converted to watts when a scenario is built.
struct BudgetParams
{
  double bs_power_dbm = 24.0;
  double uav_power_dbm = 17.0;
  double fronthaul_capacity_bps = 5e7;
  double cc_capacity_cps = 5e10;
  double ec_capacity_cps = 1e9;
  double cpu_s = 1e-28;
  double cpu_mu = 3.0;
  double ec_operation_power_w = 100.0;
  /// Count Q_e inside the EC power budget. Off by default: with the
  /// published constants the budget cannot be met otherwise.
  bool operation_power_in_constraint = false;

  void validate () const;
};

/// One immutable problem instance. All quantities are in linear SI units.
struct NetworkScenario
{
  TopologyParams topology;
  ChannelParams channel_params;

  std::vector<Position> bs;
  std::vector<Position> uav;
  std::vector<Position> users;
  /// kCloud or the index of the serving UAV, per user.
  std::vector<int> serving;

  /// Stacked BS channel per user, length B * L_c (block b is h_{b,k}).
  std::vector<ComplexVector> h_bs;
  /// UAV channels per user and UAV, each of length L_e.
  std::vector<std::vector<ComplexVector>> h_uav;

  double noise_power = 0.0;  // W
  double bandwidth = 0.0;    // Hz
  std::vector<TaskParams> tasks;

  double bs_power_max = 0.0;        // W
  double uav_power_max = 0.0;       // W
  double fronthaul_capacity = 0.0;  // bit/s
  double cc_capacity = 0.0;         // cycles/s
  double ec_capacity = 0.0;         // cycles/s
  double cpu_s = 0.0;
  double cpu_mu = 0.0;
  double ec_operation_power = 0.0;  // W
  bool operation_power_in_constraint = false;

  int num_bs () const { return static_cast<int> (bs.size ()); }
  int num_uav () const { return static_cast<int> (uav.size ()); }
  int num_users () const { return static_cast<int> (users.size ()); }
  int bs_antennas () const { return topology.bs_antennas; }
  int uav_antennas () const { return topology.uav_antennas; }

  bool is_central (int k) const { return serving[k] == kCloud; }
  /// Users served by an entity (kCloud or a UAV index), ascending.
  std::vector<int> users_of (int entity) const;
  /// Antenna count of the entity's transmit array.
  int entity_antennas (int entity) const;
  /// Channel from the entity's antennas towards user k.
  const ComplexVector &channel (int k, int entity) const;
  /// [h_{1,k}; ...; h_{B,k}; h~_{1,k}; ...; h~_{E,k}]
  ComplexVector aggregate_channel (int k) const;

  /// Structural consistency checks (partition, dimensions, positivity).
  void validate () const;
};

double dbm_to_watts (double dbm);
double watts_to_dbm (double watts);

/// 3GPP macro pathloss, d in kilometers.
double pathloss_bs (double distance_km);

/// Probability of line of sight at the given elevation angle (degrees).
double los_probability (double elevation_deg, const ChannelParams &cp);

/// Expected air-to-ground pathloss: free space at the slant distance plus the
/// LoS/NLoS-weighted excess loss.
double pathloss_uav (double horizontal_distance_m, double altitude_m, const ChannelParams &cp);

/// Pathloss plus log-normal shadowing applied to i.i.d. CN(0,1) entries.
ComplexVector draw_channel (double pathloss_db, double shadow_std_db, int length, Rng &rng);

double noise_power (const ChannelParams &cp);

std::vector<Position> hexagonal_layout (double inter_bs_distance);
std::vector<Position> triangle_layout (double inter_bs_distance);
std::vector<Position> default_uav_positions (const std::vector<Position> &bs, int count, double altitude,
                                             double inter_bs_distance);
/// Centre and radius of the disk in which central users are dropped.
Position coverage_center (const std::vector<Position> &bs);
double coverage_radius (const std::vector<Position> &bs, double inter_bs_distance);

/// Whether `entity` alone, at full budget and without interference, can meet
/// user k's delay limit with `margin` times the required SNR.
bool user_serviceable (const NetworkScenario &sc, int k, int entity, double margin);

NetworkScenario generate_scenario (const TopologyParams &tp, const ChannelParams &cp, const TaskParams &task,
                                   std::uint64_t seed, const BudgetParams &budget = {});

/// Keeps the first `keep` UAVs. Users of removed UAVs are re-associated to the
/// cloud; all channel draws are retained.
NetworkScenario keep_uavs (const NetworkScenario &sc, int keep);

}  // namespace hcmec
