#include "hcmec/serialization.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

namespace hcmec {

namespace {

Json
complex_array (const ComplexVector &v)
{
  Json a = Json::array ();
  for (Eigen::Index i = 0; i < v.size (); ++i)
    {
      a.push_back (v[i].real ());
      a.push_back (v[i].imag ());
    }
  return a;
}

ComplexVector
complex_from (const Json &a)
{
  if (!a.is_array () || a.size () % 2 != 0)
    throw std::invalid_argument ("complex vector must be a flat array of even length");
  ComplexVector v (static_cast<Eigen::Index> (a.size () / 2));
  for (Eigen::Index i = 0; i < v.size (); ++i)
    v[i] = Complex (a.at (2 * i).get<double> (), a.at (2 * i + 1).get<double> ());
  return v;
}

Json
real_array (const Eigen::VectorXd &v)
{
  return Json (std::vector<double> (v.data (), v.data () + v.size ()));
}

Eigen::VectorXd
real_from (const Json &a)
{
  const auto v = a.get<std::vector<double>> ();
  return Eigen::Map<const Eigen::VectorXd> (v.data (), static_cast<Eigen::Index> (v.size ()));
}

// Row-major nested arrays.
Json
matrix_array (const Eigen::MatrixXd &m)
{
  Json a = Json::array ();
  for (Eigen::Index r = 0; r < m.rows (); ++r)
    a.push_back (real_array (m.row (r).transpose ()));
  return a;
}

Eigen::MatrixXd
matrix_from (const Json &a, Eigen::Index cols)
{
  Eigen::MatrixXd m (static_cast<Eigen::Index> (a.size ()), cols);
  for (Eigen::Index r = 0; r < m.rows (); ++r)
    {
      const Eigen::VectorXd row = real_from (a.at (r));
      if (row.size () != cols)
        throw std::invalid_argument ("ragged matrix in state document");
      m.row (r) = row.transpose ();
    }
  return m;
}

}  // namespace

void
to_json (Json &j, const Position &p)
{
  j = Json::array ({p.x, p.y, p.z});
}

void
from_json (const Json &j, Position &p)
{
  p = {j.at (0).get<double> (), j.at (1).get<double> (), j.size () > 2 ? j.at (2).get<double> () : 0.0};
}

void
to_json (Json &j, const TopologyParams &tp)
{
  j = {{"num_bs", tp.num_bs},
       {"inter_bs_distance", tp.inter_bs_distance},
       {"bs_antennas", tp.bs_antennas},
       {"num_uav", tp.num_uav},
       {"uav_antennas", tp.uav_antennas},
       {"uav_altitude", tp.uav_altitude},
       {"num_users", tp.num_users},
       {"edge_user_radius", tp.edge_user_radius},
       {"min_bs_distance", tp.min_bs_distance},
       {"max_redraws", tp.max_redraws},
       {"service_margin", tp.service_margin},
       {"bs_positions", tp.bs_positions},
       {"uav_positions", tp.uav_positions}};
  j["num_edge_users"] = tp.num_edge_users ? Json (*tp.num_edge_users) : Json ();
}

void
from_json (const Json &j, TopologyParams &tp)
{
  tp = {};
  tp.num_bs = j.value ("num_bs", tp.num_bs);
  tp.inter_bs_distance = j.value ("inter_bs_distance", tp.inter_bs_distance);
  tp.bs_antennas = j.value ("bs_antennas", tp.bs_antennas);
  tp.num_uav = j.value ("num_uav", tp.num_uav);
  tp.uav_antennas = j.value ("uav_antennas", tp.uav_antennas);
  tp.uav_altitude = j.value ("uav_altitude", tp.uav_altitude);
  tp.num_users = j.value ("num_users", tp.num_users);
  tp.edge_user_radius = j.value ("edge_user_radius", tp.edge_user_radius);
  tp.min_bs_distance = j.value ("min_bs_distance", tp.min_bs_distance);
  tp.max_redraws = j.value ("max_redraws", tp.max_redraws);
  tp.service_margin = j.value ("service_margin", tp.service_margin);
  if (j.contains ("bs_positions"))
    tp.bs_positions = j.at ("bs_positions").get<std::vector<Position>> ();
  if (j.contains ("uav_positions"))
    tp.uav_positions = j.at ("uav_positions").get<std::vector<Position>> ();
  if (j.contains ("num_edge_users") && !j.at ("num_edge_users").is_null ())
    tp.num_edge_users = j.at ("num_edge_users").get<int> ();
}

void
to_json (Json &j, const ChannelParams &cp)
{
  j = {{"noise_psd_dbm_hz", cp.noise_psd_dbm_hz}, {"bandwidth_hz", cp.bandwidth_hz},
       {"shadowing_std_db", cp.shadowing_std_db}, {"eta_los_db", cp.eta_los_db},
       {"eta_nlos_db", cp.eta_nlos_db},           {"los_a", cp.los_a},
       {"los_b", cp.los_b},                       {"carrier_freq_hz", cp.carrier_freq_hz}};
}

void
from_json (const Json &j, ChannelParams &cp)
{
  cp = {};
  cp.noise_psd_dbm_hz = j.value ("noise_psd_dbm_hz", cp.noise_psd_dbm_hz);
  cp.bandwidth_hz = j.value ("bandwidth_hz", cp.bandwidth_hz);
  cp.shadowing_std_db = j.value ("shadowing_std_db", cp.shadowing_std_db);
  cp.eta_los_db = j.value ("eta_los_db", cp.eta_los_db);
  cp.eta_nlos_db = j.value ("eta_nlos_db", cp.eta_nlos_db);
  cp.los_a = j.value ("los_a", cp.los_a);
  cp.los_b = j.value ("los_b", cp.los_b);
  cp.carrier_freq_hz = j.value ("carrier_freq_hz", cp.carrier_freq_hz);
}

void
to_json (Json &j, const TaskParams &t)
{
  j = {{"cycles", t.cycles},
       {"data_bits", t.data_bits},
       {"max_delay_s", t.max_delay_s},
       {"fronthaul_delay_s", t.fronthaul_delay_s},
       {"weight", t.weight}};
}

void
from_json (const Json &j, TaskParams &t)
{
  t = {};
  t.cycles = j.value ("cycles", t.cycles);
  t.data_bits = j.value ("data_bits", t.data_bits);
  t.max_delay_s = j.value ("max_delay_s", t.max_delay_s);
  t.fronthaul_delay_s = j.value ("fronthaul_delay_s", t.fronthaul_delay_s);
  t.weight = j.value ("weight", t.weight);
}

void
to_json (Json &j, const BudgetParams &b)
{
  j = {{"bs_power_dbm", b.bs_power_dbm},
       {"uav_power_dbm", b.uav_power_dbm},
       {"fronthaul_capacity_bps", b.fronthaul_capacity_bps},
       {"cc_capacity_cps", b.cc_capacity_cps},
       {"ec_capacity_cps", b.ec_capacity_cps},
       {"cpu_s", b.cpu_s},
       {"cpu_mu", b.cpu_mu},
       {"ec_operation_power_w", b.ec_operation_power_w},
       {"operation_power_in_constraint", b.operation_power_in_constraint}};
}

void
from_json (const Json &j, BudgetParams &b)
{
  b = {};
  b.bs_power_dbm = j.value ("bs_power_dbm", b.bs_power_dbm);
  b.uav_power_dbm = j.value ("uav_power_dbm", b.uav_power_dbm);
  b.fronthaul_capacity_bps = j.value ("fronthaul_capacity_bps", b.fronthaul_capacity_bps);
  b.cc_capacity_cps = j.value ("cc_capacity_cps", b.cc_capacity_cps);
  b.ec_capacity_cps = j.value ("ec_capacity_cps", b.ec_capacity_cps);
  b.cpu_s = j.value ("cpu_s", b.cpu_s);
  b.cpu_mu = j.value ("cpu_mu", b.cpu_mu);
  b.ec_operation_power_w = j.value ("ec_operation_power_w", b.ec_operation_power_w);
  b.operation_power_in_constraint = j.value ("operation_power_in_constraint", b.operation_power_in_constraint);
}

void
to_json (Json &j, const NetworkScenario &sc)
{
  Json h_bs = Json::array ();
  for (const auto &h : sc.h_bs)
    h_bs.push_back (complex_array (h));
  Json h_uav = Json::array ();
  for (const auto &per_user : sc.h_uav)
    {
      Json row = Json::array ();
      for (const auto &h : per_user)
        row.push_back (complex_array (h));
      h_uav.push_back (std::move (row));
    }
  j = {{"topology", sc.topology},
       {"channel_params", sc.channel_params},
       {"bs", sc.bs},
       {"uav", sc.uav},
       {"users", sc.users},
       {"serving", sc.serving},
       {"h_bs", std::move (h_bs)},
       {"h_uav", std::move (h_uav)},
       {"noise_power", sc.noise_power},
       {"bandwidth", sc.bandwidth},
       {"tasks", sc.tasks},
       {"bs_power_max", sc.bs_power_max},
       {"uav_power_max", sc.uav_power_max},
       {"fronthaul_capacity", sc.fronthaul_capacity},
       {"cc_capacity", sc.cc_capacity},
       {"ec_capacity", sc.ec_capacity},
       {"cpu_s", sc.cpu_s},
       {"cpu_mu", sc.cpu_mu},
       {"ec_operation_power", sc.ec_operation_power},
       {"operation_power_in_constraint", sc.operation_power_in_constraint}};
}

void
from_json (const Json &j, NetworkScenario &sc)
{
  sc = {};
  sc.topology = j.at ("topology").get<TopologyParams> ();
  sc.channel_params = j.at ("channel_params").get<ChannelParams> ();
  sc.bs = j.at ("bs").get<std::vector<Position>> ();
  sc.uav = j.at ("uav").get<std::vector<Position>> ();
  sc.users = j.at ("users").get<std::vector<Position>> ();
  sc.serving = j.at ("serving").get<std::vector<int>> ();
  for (const auto &h : j.at ("h_bs"))
    sc.h_bs.push_back (complex_from (h));
  for (const auto &row : j.at ("h_uav"))
    {
      std::vector<ComplexVector> per_user;
      for (const auto &h : row)
        per_user.push_back (complex_from (h));
      sc.h_uav.push_back (std::move (per_user));
    }
  sc.noise_power = j.at ("noise_power").get<double> ();
  sc.bandwidth = j.at ("bandwidth").get<double> ();
  sc.tasks = j.at ("tasks").get<std::vector<TaskParams>> ();
  sc.bs_power_max = j.at ("bs_power_max").get<double> ();
  sc.uav_power_max = j.at ("uav_power_max").get<double> ();
  sc.fronthaul_capacity = j.at ("fronthaul_capacity").get<double> ();
  sc.cc_capacity = j.at ("cc_capacity").get<double> ();
  sc.ec_capacity = j.at ("ec_capacity").get<double> ();
  sc.cpu_s = j.at ("cpu_s").get<double> ();
  sc.cpu_mu = j.at ("cpu_mu").get<double> ();
  sc.ec_operation_power = j.at ("ec_operation_power").get<double> ();
  sc.operation_power_in_constraint = j.at ("operation_power_in_constraint").get<bool> ();
  sc.validate ();
}

void
to_json (Json &j, const VariableState &s)
{
  Json w = Json::array ();
  for (const auto &v : s.w)
    w.push_back (complex_array (v));
  j = {{"w", std::move (w)},
       {"r", real_array (s.r)},
       {"f", real_array (s.f)},
       {"gamma", real_array (s.gamma)},
       {"q", matrix_array (s.q)},
       {"u", complex_array (s.u)},
       {"beta", matrix_array (s.beta)},
       {"q_prev", matrix_array (s.q_prev)},
       {"r_prev", real_array (s.r_prev)}};
}

void
from_json (const Json &j, VariableState &s)
{
  s = {};
  for (const auto &v : j.at ("w"))
    s.w.push_back (complex_from (v));
  s.r = real_from (j.at ("r"));
  s.f = real_from (j.at ("f"));
  s.gamma = real_from (j.at ("gamma"));
  const Eigen::Index k = s.r.size ();
  s.q = matrix_from (j.at ("q"), k);
  s.u = complex_from (j.at ("u"));
  s.beta = matrix_from (j.at ("beta"), k);
  s.q_prev = matrix_from (j.at ("q_prev"), k);
  s.r_prev = real_from (j.at ("r_prev"));
}

void
to_json (Json &j, const MetricsReport &m)
{
  Json delays = Json::array ();
  for (const auto &d : m.delay)
    delays.push_back ({{"computation", d.computation}, {"fronthaul", d.fronthaul}, {"transmission", d.transmission}});
  Json ec = Json::array ();
  for (const auto &p : m.ec_power)
    ec.push_back ({{"transmit", p.transmit}, {"computation", p.computation}, {"operation", p.operation}});
  j = {{"sinr", m.sinr},
       {"rate_bound", m.rate_bound},
       {"rate", m.rate},
       {"delay", std::move (delays)},
       {"bs_power", m.bs_power},
       {"fronthaul_load", m.fronthaul_load},
       {"ec_power", std::move (ec)},
       {"objective", m.objective},
       {"average_rate", m.average_rate ()},
       {"worst_delay", m.worst_delay ()},
       {"worst_delay_user", m.worst_delay_user}};
}

void
to_json (Json &j, const FeasibilityReport &f)
{
  Json entries = Json::array ();
  for (const auto &e : f.entries)
    entries.push_back ({{"id", e.id ()},
                        {"lhs", e.lhs},
                        {"rhs", e.rhs},
                        {"slack", e.slack},
                        {"relative_slack", e.relative_slack},
                        {"pass", e.pass}});
  j = {{"tolerance", f.tolerance}, {"pass", f.pass ()}, {"entries", std::move (entries)}};
}

void
to_json (Json &j, const RunResult &r)
{
  j = {{"protocol", to_string (r.protocol)},
       {"objective_trace", r.objective_trace},
       {"wallclock_trace", r.wallclock_trace},
       {"polish_trace", r.polish_trace},
       {"state", r.state},
       {"metrics", r.metrics},
       {"feasibility", r.feasibility},
       {"wallclock_s", r.wallclock_s},
       {"outer_iterations", r.outer_iterations},
       {"converged", r.converged},
       {"exchanged_scalars", r.exchanged_scalars},
       {"total_exchanged", r.total_exchanged},
       {"max_decomposition_error", r.max_decomposition_error},
       {"rejected_iterates", r.rejected_iterates},
       {"last_status", to_string (r.last_status)},
       {"repair_failures", r.repair_failures}};
}

Json
describe (const ConvexSubproblem &p)
{
  Json blocks = Json::array ();
  for (const auto &b : p.blocks)
    blocks.push_back ({{"name", b.name}, {"offset", b.offset}, {"size", b.size}});
  Json cons = Json::array ();
  for (const auto &c : p.constraints)
    cons.push_back ({{"kind", to_string (c.kind)},
                     {"label", c.label},
                     {"domain_bound", c.domain_bound},
                     {"value_at_start", c.value (p.initial_point)}});
  return {{"num_variables", p.num_variables}, {"blocks", std::move (blocks)}, {"constraints", std::move (cons)}};
}

void
write_objective_csv (const RunResult &r, std::ostream &out)
{
  out << "iteration,objective,wallclock_s\n";
  const auto old = out.precision (17);
  for (std::size_t i = 0; i < r.objective_trace.size (); ++i)
    out << i + 1 << ',' << r.objective_trace[i] << ','
        << (i < r.wallclock_trace.size () ? r.wallclock_trace[i] : 0.0) << '\n';
  out.precision (old);
}

Json
solution_document (const NetworkScenario &sc, const RunResult &r)
{
  return {{"scenario", sc}, {"state", r.state}, {"protocol", to_string (r.protocol)}};
}

Json
read_json_file (const std::string &path)
{
  std::ifstream in (path);
  if (!in)
    throw std::runtime_error ("cannot open " + path);
  return Json::parse (in);
}

void
write_json_file (const std::string &path, const Json &j)
{
  std::ofstream out (path);
  if (!out)
    throw std::runtime_error ("cannot write " + path);
  out << j.dump (2) << '\n';
}

}  // namespace hcmec
