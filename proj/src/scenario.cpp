#include "hcmec/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hcmec {

namespace {

constexpr double kSpeedOfLight = 299792458.0;  // m/s

void
require (bool condition, const std::string &message)
{
  if (!condition)
    throw std::invalid_argument (message);
}

Position
uniform_in_disk (const Position &center, double radius, Rng &rng)
{
  std::uniform_real_distribution<double> unit (0.0, 1.0);
  const double rho = radius * std::sqrt (unit (rng));
  const double phi = 2.0 * std::numbers::pi * unit (rng);
  return {center.x + rho * std::cos (phi), center.y + rho * std::sin (phi), 0.0};
}

bool
clear_of_bs (const Position &p, const std::vector<Position> &bs, double min_distance)
{
  return std::all_of (bs.begin (), bs.end (),
                      [&] (const Position &b) { return horizontal_distance (p, b) >= min_distance; });
}

// Rejection sampling against the BS exclusion zones; gives up after a bounded
// number of tries so that a badly configured radius cannot hang generation.
Position
drop_user (const Position &center, double radius, const std::vector<Position> &bs, double min_distance, Rng &rng)
{
  for (int attempt = 0; attempt < 10000; ++attempt)
    {
      Position p = uniform_in_disk (center, radius, rng);
      if (clear_of_bs (p, bs, min_distance))
        return p;
    }
  throw std::invalid_argument ("cannot place a user outside the BS exclusion zones");
}

}  // namespace

double
horizontal_distance (const Position &a, const Position &b)
{
  return std::hypot (a.x - b.x, a.y - b.y);
}

void
TopologyParams::validate () const
{
  require (num_bs >= 0 && num_uav >= 0 && num_users >= 0, "topology counts must be non-negative");
  require (bs_antennas >= 1, "bs_antennas must be >= 1");
  require (uav_antennas >= 1, "uav_antennas must be >= 1");
  require (edge_users () >= 0, "num_edge_users must be non-negative");
  require (edge_users () <= num_users, "num_edge_users exceeds num_users");
  require (edge_users () == 0 || num_uav > 0, "edge users require at least one UAV");
  require (inter_bs_distance > 0.0, "inter_bs_distance must be positive");
  require (uav_altitude > 0.0, "uav_altitude must be positive");
  require (edge_user_radius >= 0.0 && min_bs_distance >= 0.0, "placement radii must be non-negative");
  require (max_redraws >= 0 && service_margin >= 0.0, "redraw settings must be non-negative");
  if (bs_positions.empty ())
    require (num_bs == 7, "hexagonal layout needs num_bs == 7; pass explicit bs_positions otherwise");
  else
    require (static_cast<int> (bs_positions.size ()) == num_bs, "bs_positions size differs from num_bs");
  if (!uav_positions.empty ())
    require (static_cast<int> (uav_positions.size ()) >= num_uav, "fewer uav_positions than num_uav");
}

void
ChannelParams::validate () const
{
  require (bandwidth_hz > 0.0, "bandwidth must be positive");
  require (shadowing_std_db >= 0.0, "shadowing_std must be non-negative");
  require (eta_nlos_db >= eta_los_db, "eta_nlos must be >= eta_los");
  require (carrier_freq_hz > 0.0, "carrier frequency must be positive");
}

void
TaskParams::validate () const
{
  require (cycles > 0.0, "cycles must be positive");
  require (data_bits > 0.0, "data_bits must be positive");
  require (max_delay_s > 0.0, "max_delay_s must be positive");
  require (fronthaul_delay_s > 0.0, "fronthaul_delay_s must be positive");
  require (weight > 0.0, "weight must be positive");
}

void
BudgetParams::validate () const
{
  require (fronthaul_capacity_bps > 0.0, "fronthaul_capacity_bps must be positive");
  require (cc_capacity_cps > 0.0, "cc_capacity_cps must be positive");
  require (ec_capacity_cps > 0.0, "ec_capacity_cps must be positive");
  require (cpu_s >= 0.0, "cpu_s must be non-negative");
  require (cpu_mu >= 1.0, "cpu_mu must be at least 1");
  require (ec_operation_power_w >= 0.0, "ec_operation_power_w must be non-negative");
}

std::vector<int>
NetworkScenario::users_of (int entity) const
{
  std::vector<int> out;
  for (int k = 0; k < num_users (); ++k)
    if (serving[k] == entity)
      out.push_back (k);
  return out;
}

int
NetworkScenario::entity_antennas (int entity) const
{
  return entity == kCloud ? num_bs () * bs_antennas () : uav_antennas ();
}

const ComplexVector &
NetworkScenario::channel (int k, int entity) const
{
  return entity == kCloud ? h_bs[k] : h_uav[k][entity];
}

ComplexVector
NetworkScenario::aggregate_channel (int k) const
{
  const int lc = num_bs () * bs_antennas ();
  ComplexVector h (lc + num_uav () * uav_antennas ());
  h.head (lc) = h_bs[k];
  for (int e = 0; e < num_uav (); ++e)
    h.segment (lc + e * uav_antennas (), uav_antennas ()) = h_uav[k][e];
  return h;
}

void
NetworkScenario::validate () const
{
  const int k_count = num_users ();
  require (static_cast<int> (serving.size ()) == k_count, "association size mismatch");
  require (static_cast<int> (h_bs.size ()) == k_count && static_cast<int> (h_uav.size ()) == k_count,
           "channel table size mismatch");
  require (static_cast<int> (tasks.size ()) == k_count, "task table size mismatch");
  require (noise_power > 0.0, "noise power must be positive");
  require (bandwidth > 0.0, "bandwidth must be positive");
  for (int k = 0; k < k_count; ++k)
    {
      require (serving[k] == kCloud || (serving[k] >= 0 && serving[k] < num_uav ()), "invalid serving entity");
      require (h_bs[k].size () == num_bs () * bs_antennas (), "BS channel length mismatch");
      require (static_cast<int> (h_uav[k].size ()) == num_uav (), "UAV channel count mismatch");
      for (const auto &h : h_uav[k])
        require (h.size () == uav_antennas (), "UAV channel length mismatch");
      require (h_bs[k].allFinite (), "non-finite channel");
      tasks[k].validate ();
    }
}

double
dbm_to_watts (double dbm)
{
  return std::pow (10.0, (dbm - 30.0) / 10.0);
}

double
watts_to_dbm (double watts)
{
  return 10.0 * std::log10 (watts) + 30.0;
}

double
pathloss_bs (double distance_km)
{
  if (!(distance_km > 0.0))
    throw std::domain_error ("pathloss_bs: distance must be positive");
  return 128.1 + 37.6 * std::log10 (distance_km);
}

double
los_probability (double elevation_deg, const ChannelParams &cp)
{
  return 1.0 / (1.0 + cp.los_a * std::exp (-cp.los_b * (elevation_deg - cp.los_a)));
}

double
pathloss_uav (double horizontal_distance_m, double altitude_m, const ChannelParams &cp)
{
  if (!(altitude_m > 0.0))
    throw std::domain_error ("pathloss_uav: altitude must be positive");
  if (horizontal_distance_m < 0.0)
    throw std::domain_error ("pathloss_uav: negative horizontal distance");
  const double slant = std::hypot (horizontal_distance_m, altitude_m);
  const double free_space = 20.0 * std::log10 (4.0 * std::numbers::pi * slant * cp.carrier_freq_hz / kSpeedOfLight);
  const double elevation = std::atan2 (altitude_m, horizontal_distance_m) * 180.0 / std::numbers::pi;
  const double p_los = los_probability (elevation, cp);
  return free_space + p_los * cp.eta_los_db + (1.0 - p_los) * cp.eta_nlos_db;
}

ComplexVector
draw_channel (double pathloss_db, double shadow_std_db, int length, Rng &rng)
{
  if (length < 1)
    throw std::invalid_argument ("draw_channel: length must be >= 1");
  std::normal_distribution<double> normal (0.0, 1.0);
  const double shadow = shadow_std_db > 0.0 ? shadow_std_db * normal (rng) : 0.0;
  const double amplitude = std::sqrt (std::pow (10.0, -(pathloss_db + shadow) / 10.0));
  ComplexVector h (length);
  for (int i = 0; i < length; ++i)
    {
      const double re = normal (rng);
      const double im = normal (rng);
      h[i] = Complex (re, im) * (amplitude * std::numbers::sqrt2 / 2.0);
    }
  return h;
}

double
noise_power (const ChannelParams &cp)
{
  return std::pow (10.0, (cp.noise_psd_dbm_hz + 10.0 * std::log10 (cp.bandwidth_hz) - 30.0) / 10.0);
}

std::vector<Position>
hexagonal_layout (double inter_bs_distance)
{
  std::vector<Position> out{{0.0, 0.0, 0.0}};
  for (int i = 0; i < 6; ++i)
    {
      const double phi = i * std::numbers::pi / 3.0;
      out.push_back ({inter_bs_distance * std::cos (phi), inter_bs_distance * std::sin (phi), 0.0});
    }
  return out;
}

std::vector<Position>
triangle_layout (double inter_bs_distance)
{
  const double circumradius = inter_bs_distance / std::sqrt (3.0);
  std::vector<Position> out;
  for (int i = 0; i < 3; ++i)
    {
      const double phi = std::numbers::pi / 2.0 + i * 2.0 * std::numbers::pi / 3.0;
      out.push_back ({circumradius * std::cos (phi), circumradius * std::sin (phi), 0.0});
    }
  return out;
}

Position
coverage_center (const std::vector<Position> &bs)
{
  Position c;
  if (bs.empty ())
    return c;
  for (const auto &p : bs)
    {
      c.x += p.x;
      c.y += p.y;
    }
  c.x /= static_cast<double> (bs.size ());
  c.y /= static_cast<double> (bs.size ());
  return c;
}

double
coverage_radius (const std::vector<Position> &bs, double inter_bs_distance)
{
  const Position c = coverage_center (bs);
  double far = 0.0;
  for (const auto &p : bs)
    far = std::max (far, horizontal_distance (p, c));
  return far + inter_bs_distance / std::sqrt (3.0);
}

std::vector<Position>
default_uav_positions (const std::vector<Position> &bs, int count, double altitude, double inter_bs_distance)
{
  const Position c = coverage_center (bs);
  std::vector<Position> ring;
  for (const auto &p : bs)
    if (horizontal_distance (p, c) > 1.0)
      ring.push_back (p);
  std::sort (ring.begin (), ring.end (), [&] (const Position &a, const Position &b) {
    return std::atan2 (a.y - c.y, a.x - c.x) < std::atan2 (b.y - c.y, b.x - c.x);
  });

  std::vector<Position> out;
  if (ring.size () >= 2)
    for (std::size_t i = 0; i < ring.size () && static_cast<int> (out.size ()) < count; ++i)
      {
        const Position &a = ring[i];
        const Position &b = ring[(i + 1) % ring.size ()];
        out.push_back ({(a.x + b.x) / 2.0, (a.y + b.y) / 2.0, altitude});
      }
  // Beyond the available midpoints, continue on a ring just inside the coverage edge.
  const double radius = 0.8 * coverage_radius (bs, inter_bs_distance);
  const int extra = count - static_cast<int> (out.size ());
  for (int j = 0; j < extra; ++j)
    {
      const double phi = (j + 0.5) * 2.0 * std::numbers::pi / extra;
      out.push_back ({c.x + radius * std::cos (phi), c.y + radius * std::sin (phi), altitude});
    }
  return out;
}

bool
user_serviceable (const NetworkScenario &sc, int k, int entity, double margin)
{
  const TaskParams &task = sc.tasks[k];
  double f = 0.0;
  double power = 0.0;
  double gain = 0.0;
  double limit = task.max_delay_s;
  if (entity == kCloud)
    {
      f = sc.cc_capacity;
      limit -= task.fronthaul_delay_s;
      const int lc = sc.bs_antennas ();
      for (int b = 0; b < sc.num_bs (); ++b)
        gain += sc.bs_power_max * sc.h_bs[k].segment (b * lc, lc).squaredNorm ();
      power = 1.0;
    }
  else
    {
      const double available
          = sc.uav_power_max - (sc.operation_power_in_constraint ? sc.ec_operation_power : 0.0);
      if (!(available > 0.0))
        return false;
      f = std::min (sc.ec_capacity, std::pow (0.5 * available / sc.cpu_s, 1.0 / sc.cpu_mu));
      power = available - sc.cpu_s * std::pow (f, sc.cpu_mu);
      gain = sc.h_uav[k][entity].squaredNorm ();
    }
  const double room = limit - task.cycles / f;
  if (!(room > 0.0))
    return false;
  const double needed = std::exp2 (task.data_bits / room / sc.bandwidth) - 1.0;
  return power * gain / sc.noise_power >= margin * needed;
}

NetworkScenario
generate_scenario (const TopologyParams &tp, const ChannelParams &cp, const TaskParams &task, std::uint64_t seed,
                   const BudgetParams &budget)
{
  tp.validate ();
  cp.validate ();
  task.validate ();
  budget.validate ();

  NetworkScenario sc;
  sc.topology = tp;
  sc.channel_params = cp;
  sc.bs = tp.bs_positions.empty () ? hexagonal_layout (tp.inter_bs_distance) : tp.bs_positions;
  for (auto &p : sc.bs)
    p.z = 0.0;
  if (tp.uav_positions.empty ())
    sc.uav = default_uav_positions (sc.bs, tp.num_uav, tp.uav_altitude, tp.inter_bs_distance);
  else
    sc.uav.assign (tp.uav_positions.begin (), tp.uav_positions.begin () + tp.num_uav);
  for (auto &p : sc.uav)
    p.z = tp.uav_altitude;

  sc.noise_power = noise_power (cp);
  sc.bandwidth = cp.bandwidth_hz;
  sc.bs_power_max = dbm_to_watts (budget.bs_power_dbm);
  sc.uav_power_max = dbm_to_watts (budget.uav_power_dbm);
  sc.fronthaul_capacity = budget.fronthaul_capacity_bps;
  sc.cc_capacity = budget.cc_capacity_cps;
  sc.ec_capacity = budget.ec_capacity_cps;
  sc.cpu_s = budget.cpu_s;
  sc.cpu_mu = budget.cpu_mu;
  sc.ec_operation_power = budget.ec_operation_power_w;
  sc.operation_power_in_constraint = budget.operation_power_in_constraint;

  Rng rng (seed);
  const int edge = tp.edge_users ();
  const int central = tp.num_users - edge;
  const Position center = coverage_center (sc.bs);
  const double radius = coverage_radius (sc.bs, tp.inter_bs_distance);
  const int bs_count = sc.num_bs ();
  const int lc = tp.bs_antennas;

  for (int k = 0; k < tp.num_users; ++k)
    {
      const int entity = k < central ? kCloud : (k - central) % tp.num_uav;
      sc.serving.push_back (entity);
      sc.tasks.push_back (task);
      sc.users.emplace_back ();
      sc.h_bs.emplace_back ();
      sc.h_uav.emplace_back ();
      for (int attempt = 0; attempt <= tp.max_redraws; ++attempt)
        {
          const Position &anchor = entity == kCloud ? center : sc.uav[entity];
          const double spread = entity == kCloud ? radius : tp.edge_user_radius;
          sc.users[k] = drop_user (anchor, spread, sc.bs, tp.min_bs_distance, rng);

          ComplexVector stacked (bs_count * lc);
          for (int b = 0; b < bs_count; ++b)
            {
              const double d_km = std::max (horizontal_distance (sc.users[k], sc.bs[b]), 1.0) / 1000.0;
              stacked.segment (b * lc, lc) = draw_channel (pathloss_bs (d_km), cp.shadowing_std_db, lc, rng);
            }
          sc.h_bs[k] = std::move (stacked);
          std::vector<ComplexVector> per_uav;
          for (const auto &u : sc.uav)
            {
              const double pl = pathloss_uav (horizontal_distance (sc.users[k], u), tp.uav_altitude, cp);
              per_uav.push_back (draw_channel (pl, cp.shadowing_std_db, tp.uav_antennas, rng));
            }
          sc.h_uav[k] = std::move (per_uav);

          // Edge users must also be servable by the BSs, since sweeps over
          // the UAV count hand them back to the cloud.
          const bool ok = user_serviceable (sc, k, kCloud, tp.service_margin)
                          && (entity == kCloud || user_serviceable (sc, k, entity, tp.service_margin));
          if (ok)
            break;
        }
    }
  return sc;
}

NetworkScenario
keep_uavs (const NetworkScenario &sc, int keep)
{
  if (keep < 0 || keep > sc.num_uav ())
    throw std::invalid_argument ("keep_uavs: count out of range");
  NetworkScenario out = sc;
  out.uav.resize (keep);
  out.topology.num_uav = keep;
  for (auto &h : out.h_uav)
    h.resize (keep);
  int edge = 0;
  for (auto &s : out.serving)
    {
      if (s != kCloud && s >= keep)
        s = kCloud;
      if (s != kCloud)
        ++edge;
    }
  out.topology.num_edge_users = edge;
  return out;
}

}  // namespace hcmec
