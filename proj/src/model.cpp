#include "hcmec/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hcmec {

namespace {
constexpr double kDelayTieTolerance = 1e-5;
}

VariableState
VariableState::zeros (const NetworkScenario &sc)
{
  const int k_count = sc.num_users ();
  const int b_count = sc.num_bs ();
  VariableState s;
  s.w.resize (k_count);
  for (int k = 0; k < k_count; ++k)
    s.w[k] = ComplexVector::Zero (sc.entity_antennas (sc.serving[k]));
  s.r = Eigen::VectorXd::Zero (k_count);
  s.f = Eigen::VectorXd::Zero (k_count);
  s.gamma = Eigen::VectorXd::Zero (k_count);
  s.q = Eigen::MatrixXd::Zero (b_count, k_count);
  s.u = Eigen::VectorXcd::Zero (k_count);
  s.beta = Eigen::MatrixXd::Ones (b_count, k_count);
  s.q_prev = Eigen::MatrixXd::Zero (b_count, k_count);
  s.r_prev = Eigen::VectorXd::Zero (k_count);
  return s;
}

void
VariableState::check_dimensions (const NetworkScenario &sc) const
{
  const int k_count = sc.num_users ();
  const int b_count = sc.num_bs ();
  auto fail = [] (const char *what) { throw std::invalid_argument (std::string ("state dimension mismatch: ") + what); };
  if (static_cast<int> (w.size ()) != k_count)
    fail ("w");
  for (int k = 0; k < k_count; ++k)
    if (w[k].size () != sc.entity_antennas (sc.serving[k]))
      fail ("w[k] length");
  if (r.size () != k_count || f.size () != k_count || gamma.size () != k_count || u.size () != k_count)
    fail ("per-user vectors");
  if (q.rows () != b_count || q.cols () != k_count || beta.rows () != b_count || beta.cols () != k_count)
    fail ("per-link matrices");
}

Complex
beam_response (int k, int i, const std::vector<ComplexVector> &w, const NetworkScenario &sc)
{
  const ComplexVector &h = sc.channel (k, sc.serving[i]);
  if (w[i].size () != h.size ())
    throw std::invalid_argument ("beam_response: beamformer length does not match the serving entity");
  return h.dot (w[i]);
}

double
interference (int k, const std::vector<ComplexVector> &w, const NetworkScenario &sc)
{
  double sum = 0.0;
  for (int i = 0; i < sc.num_users (); ++i)
    if (i != k)
      sum += std::norm (beam_response (k, i, w, sc));
  return sum;
}

double
sinr (int k, const std::vector<ComplexVector> &w, const NetworkScenario &sc)
{
  if (static_cast<int> (w.size ()) != sc.num_users ())
    throw std::invalid_argument ("sinr: beamformer count mismatch");
  return std::norm (beam_response (k, k, w, sc)) / (sc.noise_power + interference (k, w, sc));
}

double
sinr (int k, const VariableState &state, const NetworkScenario &sc)
{
  return sinr (k, state.w, sc);
}

double
rate_bound (int k, const std::vector<ComplexVector> &w, const NetworkScenario &sc)
{
  return sc.bandwidth * std::log2 (1.0 + sinr (k, w, sc));
}

double
link_power (int b, int k, const VariableState &state, const NetworkScenario &sc)
{
  if (!sc.is_central (k))
    return 0.0;
  return state.w[k].segment (b * sc.bs_antennas (), sc.bs_antennas ()).squaredNorm ();
}

double
bs_power (int b, const VariableState &state, const NetworkScenario &sc)
{
  double p = 0.0;
  for (int k = 0; k < sc.num_users (); ++k)
    p += link_power (b, k, state, sc);
  return p;
}

EcPower
power_ec (int e, const VariableState &state, const NetworkScenario &sc)
{
  EcPower p;
  double cycles = 0.0;
  for (int k = 0; k < sc.num_users (); ++k)
    if (sc.serving[k] == e)
      {
        p.transmit += state.w[k].squaredNorm ();
        cycles += state.f[k];
      }
  p.computation = sc.cpu_s * std::pow (cycles, sc.cpu_mu);
  p.operation = sc.ec_operation_power;
  return p;
}

DelayBreakdown
delay (int k, const VariableState &state, const NetworkScenario &sc)
{
  if (!(state.f[k] > 0.0) || !(state.r[k] > 0.0))
    throw std::domain_error ("delay: f_k and r_k must be positive");
  const TaskParams &t = sc.tasks[k];
  DelayBreakdown d;
  d.computation = t.cycles / state.f[k];
  d.fronthaul = sc.is_central (k) ? t.fronthaul_delay_s : 0.0;
  d.transmission = t.data_bits / state.r[k];
  return d;
}

double
fronthaul_load (int b, const VariableState &state, const NetworkScenario &sc, double activity_threshold)
{
  double load = 0.0;
  for (int k = 0; k < sc.num_users (); ++k)
    if (link_power (b, k, state, sc) > activity_threshold)
      load += state.r[k];
  return load;
}

double
default_activity_threshold (const NetworkScenario &sc)
{
  return 1e-6 * sc.bs_power_max;
}

double
MetricsReport::average_rate () const
{
  if (rate.empty ())
    return 0.0;
  double s = 0.0;
  for (double v : rate)
    s += v;
  return s / static_cast<double> (rate.size ());
}

double
MetricsReport::worst_delay () const
{
  return worst_delay_user < 0 ? 0.0 : delay[worst_delay_user].total ();
}

MetricsReport
evaluate_metrics (const VariableState &state, const NetworkScenario &sc, double activity_threshold)
{
  state.check_dimensions (sc);
  MetricsReport m;
  const int k_count = sc.num_users ();
  for (int k = 0; k < k_count; ++k)
    {
      const double s = sinr (k, state, sc);
      m.sinr.push_back (s);
      m.rate_bound.push_back (sc.bandwidth * std::log2 (1.0 + s));
      m.rate.push_back (state.r[k]);
      m.objective += sc.tasks[k].weight * state.r[k];
      DelayBreakdown d;
      if (state.f[k] > 0.0 && state.r[k] > 0.0)
        d = delay (k, state, sc);
      else
        d.computation = d.transmission = std::numeric_limits<double>::infinity ();
      m.delay.push_back (d);
    }
  // Users within rounding of the largest delay are tied; the worst-connected one is reported.
  double longest = 0.0;
  for (const auto &d : m.delay)
    longest = std::max (longest, d.total ());
  for (int k = 0; k < k_count; ++k)
    {
      const double total = m.delay[k].total ();
      if (!(total >= longest * (1.0 - kDelayTieTolerance)))
        continue;
      if (m.worst_delay_user < 0 || m.delay[k].transmission > m.delay[m.worst_delay_user].transmission)
        m.worst_delay_user = k;
    }
  for (int b = 0; b < sc.num_bs (); ++b)
    {
      m.bs_power.push_back (bs_power (b, state, sc));
      m.fronthaul_load.push_back (fronthaul_load (b, state, sc, activity_threshold));
    }
  for (int e = 0; e < sc.num_uav (); ++e)
    m.ec_power.push_back (power_ec (e, state, sc));
  return m;
}

const char *
to_string (ConstraintFamily family)
{
  switch (family)
    {
    case ConstraintFamily::BsPower: return "bs_power";
    case ConstraintFamily::EcPower: return "ec_power";
    case ConstraintFamily::Fronthaul: return "fronthaul";
    case ConstraintFamily::CloudCapacity: return "cloud_capacity";
    case ConstraintFamily::EcCapacity: return "ec_capacity";
    case ConstraintFamily::Rate: return "rate";
    case ConstraintFamily::Delay: return "delay";
    }
  return "unknown";
}

std::string
ConstraintSlack::id () const
{
  return std::string (to_string (family)) + "[" + std::to_string (index) + "]";
}

bool
FeasibilityReport::pass () const
{
  return std::all_of (entries.begin (), entries.end (), [] (const ConstraintSlack &c) { return c.pass; });
}

std::vector<std::string>
FeasibilityReport::violations () const
{
  std::vector<std::string> out;
  for (const auto &c : entries)
    if (!c.pass)
      out.push_back (c.id ());
  return out;
}

namespace {

ConstraintSlack
make_slack (ConstraintFamily family, int index, double lhs, double rhs, double eps)
{
  ConstraintSlack c;
  c.family = family;
  c.index = index;
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = rhs - lhs;
  const double scale = std::max (std::abs (rhs), std::abs (lhs));
  if (std::isinf (lhs))
    c.relative_slack = -std::numeric_limits<double>::infinity ();
  else
    c.relative_slack = scale > 0.0 ? c.slack / scale : 0.0;
  c.pass = c.relative_slack >= -eps;
  return c;
}

}  // namespace

FeasibilityReport
audit (const VariableState &state, const NetworkScenario &sc, double eps_feas, double activity_threshold)
{
  state.check_dimensions (sc);
  FeasibilityReport rep;
  rep.tolerance = eps_feas;
  const int k_count = sc.num_users ();
  const double inf = std::numeric_limits<double>::infinity ();

  for (int b = 0; b < sc.num_bs (); ++b)
    rep.entries.push_back (make_slack (ConstraintFamily::BsPower, b, bs_power (b, state, sc), sc.bs_power_max, eps_feas));
  for (int e = 0; e < sc.num_uav (); ++e)
    {
      const EcPower p = power_ec (e, state, sc);
      const double lhs = p.transmit + p.computation + (sc.operation_power_in_constraint ? p.operation : 0.0);
      rep.entries.push_back (make_slack (ConstraintFamily::EcPower, e, lhs, sc.uav_power_max, eps_feas));
    }
  for (int b = 0; b < sc.num_bs (); ++b)
    rep.entries.push_back (make_slack (ConstraintFamily::Fronthaul, b,
                                       fronthaul_load (b, state, sc, activity_threshold), sc.fronthaul_capacity,
                                       eps_feas));

  double cloud_cycles = 0.0;
  std::vector<double> ec_cycles (sc.num_uav (), 0.0);
  for (int k = 0; k < k_count; ++k)
    (sc.is_central (k) ? cloud_cycles : ec_cycles[sc.serving[k]]) += state.f[k];
  rep.entries.push_back (make_slack (ConstraintFamily::CloudCapacity, 0, cloud_cycles, sc.cc_capacity, eps_feas));
  for (int e = 0; e < sc.num_uav (); ++e)
    rep.entries.push_back (make_slack (ConstraintFamily::EcCapacity, e, ec_cycles[e], sc.ec_capacity, eps_feas));

  for (int k = 0; k < k_count; ++k)
    rep.entries.push_back (make_slack (ConstraintFamily::Rate, k, state.r[k], rate_bound (k, state.w, sc), eps_feas));
  for (int k = 0; k < k_count; ++k)
    {
      const TaskParams &t = sc.tasks[k];
      const double lhs = (state.f[k] > 0.0 && state.r[k] > 0.0)
                             ? t.cycles / state.f[k] + t.data_bits / state.r[k]
                             : inf;
      const double rhs = t.max_delay_s - (sc.is_central (k) ? t.fronthaul_delay_s : 0.0);
      rep.entries.push_back (make_slack (ConstraintFamily::Delay, k, lhs, rhs, eps_feas));
    }
  return rep;
}

FeasibilityReport
audit (const VariableState &state, const NetworkScenario &sc, double eps_feas)
{
  return audit (state, sc, eps_feas, default_activity_threshold (sc));
}

}  // namespace hcmec
