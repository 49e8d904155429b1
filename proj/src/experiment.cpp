#include "hcmec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace hcmec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN ();

Json
options_json (const ProtocolOptions &o)
{
  return {{"max_outer_iterations", o.max_outer_iterations},
          {"rel_tol", o.rel_tol},
          {"freeze_beta", o.freeze_beta},
          {"delta", o.delta},
          {"restoration_rounds", o.restoration_rounds},
          {"eps_feas", o.eps_feas},
          {"activity_threshold", o.activity_threshold},
          {"polish", o.polish},
          {"polish_iterations", o.polish_iterations},
          {"monotone_safeguard", o.monotone_safeguard},
          {"fdp_delay_repair", o.fdp_delay_repair},
          {"parallel_entities", o.parallel_entities}};
}

void
options_from (const Json &j, ProtocolOptions &o)
{
  o.max_outer_iterations = j.at ("max_outer_iterations").get<int> ();
  o.rel_tol = j.at ("rel_tol").get<double> ();
  o.freeze_beta = j.at ("freeze_beta").get<bool> ();
  o.delta = j.at ("delta").get<double> ();
  o.restoration_rounds = j.at ("restoration_rounds").get<int> ();
  o.eps_feas = j.at ("eps_feas").get<double> ();
  o.activity_threshold = j.at ("activity_threshold").get<double> ();
  o.polish = j.at ("polish").get<bool> ();
  o.polish_iterations = j.at ("polish_iterations").get<int> ();
  o.monotone_safeguard = j.at ("monotone_safeguard").get<bool> ();
  o.fdp_delay_repair = j.at ("fdp_delay_repair").get<bool> ();
  o.parallel_entities = j.at ("parallel_entities").get<bool> ();
}

// Overridable scalar fields, grouped by section.
Json
sections (const ExperimentConfig &cfg)
{
  Json topo = cfg.topology;
  topo.erase ("bs_positions");
  topo.erase ("uav_positions");
  topo["layout"] = cfg.topology.bs_positions.empty () ? "hex" : "triangle";
  return {{"topology", topo},
          {"channel", cfg.channel},
          {"task", cfg.task},
          {"budget", cfg.budget},
          {"protocol", options_json (cfg.options)}};
}

void
apply_sections (const Json &s, ExperimentConfig &cfg)
{
  Json topo = s.at ("topology");
  const std::string layout = topo.at ("layout").get<std::string> ();
  topo.erase ("layout");
  cfg.topology = topo.get<TopologyParams> ();
  if (layout == "triangle")
    {
      cfg.topology.bs_positions = triangle_layout (cfg.topology.inter_bs_distance);
      cfg.topology.num_bs = 3;
    }
  else if (layout == "hex")
    {
      cfg.topology.bs_positions.clear ();
      cfg.topology.num_bs = 7;
    }
  else
    throw ConfigError ("topology.layout: expected \"hex\" or \"triangle\", got \"" + layout + "\"");
  cfg.channel = s.at ("channel").get<ChannelParams> ();
  cfg.task = s.at ("task").get<TaskParams> ();
  cfg.budget = s.at ("budget").get<BudgetParams> ();
  options_from (s.at ("protocol"), cfg.options);
}

std::string
format_double (double v)
{
  char buf[64];
  std::snprintf (buf, sizeof buf, "%.17g", v);
  return buf;
}

SweepRow
row_for (const CellRecord &cell, const ExperimentConfig &cfg)
{
  SweepRow row;
  row.axis = cell.axis;
  row.seed = std::to_string (cell.seed);
  row.protocol = cell.result.protocol;
  if (cell.infeasible)
    {
      row.objective = row.avg_rate_bps = row.worst_delay_s = kNaN;
      row.delay_comp_s = row.delay_tx_s = row.delay_fh_s = kNaN;
      row.wallclock_s = cfg.record_wallclock ? cell.result.wallclock_s : 0.0;
      return row;
    }
  const MetricsReport &m = cell.result.metrics;
  row.objective = m.objective;
  row.avg_rate_bps = m.average_rate ();
  row.worst_delay_s = m.worst_delay ();
  if (m.worst_delay_user >= 0)
    {
      const DelayBreakdown &d = m.delay[m.worst_delay_user];
      row.delay_comp_s = d.computation;
      row.delay_tx_s = d.transmission;
      row.delay_fh_s = d.fronthaul;
    }
  row.wallclock_s = cfg.record_wallclock ? cell.result.wallclock_s : 0.0;
  row.outer_iters = cell.result.outer_iterations;
  return row;
}

}  // namespace

const char *
to_string (SweepAxis axis)
{
  switch (axis)
    {
    case SweepAxis::NumUav: return "num_uav";
    case SweepAxis::FronthaulCapacity: return "fronthaul_capacity";
    case SweepAxis::DataRatio: return "data_ratio";
    case SweepAxis::UserDensity: return "user_density";
    case SweepAxis::MaxDelay: return "max_delay";
    }
  return "unknown";
}

SweepAxis
axis_from_string (const std::string &name)
{
  for (SweepAxis a : {SweepAxis::NumUav, SweepAxis::FronthaulCapacity, SweepAxis::DataRatio, SweepAxis::UserDensity,
                      SweepAxis::MaxDelay})
    if (name == to_string (a))
      return a;
  throw ConfigError ("axis: unknown sweep axis \"" + name + "\"");
}

void
ExperimentConfig::validate () const
{
  auto check = [] (const char *section, const auto &params) {
    try
      {
        params.validate ();
      }
    catch (const std::invalid_argument &e)
      {
        throw ConfigError (std::string (section) + ": " + e.what ());
      }
  };
  check ("topology", topology);
  check ("channel", channel);
  check ("task", task);
  check ("budget", budget);
  check ("protocol", options);
  if (axis_values.empty ())
    throw ConfigError ("axis_values: must not be empty");
  if (seeds.empty ())
    throw ConfigError ("seeds: must not be empty");
  if (protocols.empty ())
    throw ConfigError ("protocols: must not be empty");
  if (jobs < 1)
    throw ConfigError ("jobs: must be at least 1");
  for (double v : axis_values)
    {
      const bool ok = axis == SweepAxis::NumUav ? (v >= 0.0 && v == std::floor (v)) : v > 0.0;
      if (!ok)
        throw ConfigError ("axis_values: invalid value " + format_double (v) + " for axis " + to_string (axis));
    }
}

ExperimentConfig
preset_config (const std::string &name)
{
  ExperimentConfig cfg;
  cfg.preset = name;
  cfg.protocols = {Protocol::Fcp, Protocol::Pdp, Protocol::Fdp};
  for (std::uint64_t s = 1; s <= 10; ++s)
    cfg.seeds.push_back (s);
  if (name == "desk")
    {
      cfg.topology.num_bs = 3;
      cfg.topology.bs_positions = triangle_layout (cfg.topology.inter_bs_distance);
      cfg.topology.num_users = 8;
      cfg.topology.num_uav = 2;
      cfg.axis_values = {0, 1, 2};
    }
  else if (name == "paper")
    {
      cfg.topology.num_bs = 7;
      cfg.topology.num_users = 30;
      cfg.topology.num_uav = 4;
      cfg.axis_values = {0, 2, 4};
    }
  else
    throw ConfigError ("preset: unknown preset \"" + name + "\"");
  return cfg;
}

ExperimentConfig
config_from_json (const Json &doc)
{
  if (!doc.is_object ())
    throw ConfigError ("config: top level must be a JSON object");
  static const std::vector<std::string> known = {"preset",   "axis",      "axis_values",      "seeds",
                                                 "protocols", "output_dir", "jobs",            "record_wallclock",
                                                 "save_states", "overrides"};
  for (const auto &[key, value] : doc.items ())
    if (std::find (known.begin (), known.end (), key) == known.end ())
      throw ConfigError ("unknown config key \"" + key + "\"");

  try
    {
      ExperimentConfig cfg = preset_config (doc.value ("preset", std::string ("desk")));
      if (doc.contains ("axis"))
        cfg.axis = axis_from_string (doc.at ("axis").get<std::string> ());
      if (doc.contains ("axis_values"))
        cfg.axis_values = doc.at ("axis_values").get<std::vector<double>> ();
      if (doc.contains ("seeds"))
        cfg.seeds = doc.at ("seeds").get<std::vector<std::uint64_t>> ();
      if (doc.contains ("protocols"))
        {
          cfg.protocols.clear ();
          for (const auto &p : doc.at ("protocols"))
            try
              {
                cfg.protocols.push_back (protocol_from_string (p.get<std::string> ()));
              }
            catch (const std::invalid_argument &e)
              {
                throw ConfigError (std::string ("protocols: ") + e.what ());
              }
        }
      cfg.output_dir = doc.value ("output_dir", cfg.output_dir);
      cfg.jobs = doc.value ("jobs", cfg.jobs);
      cfg.record_wallclock = doc.value ("record_wallclock", cfg.record_wallclock);
      cfg.save_states = doc.value ("save_states", cfg.save_states);

      if (doc.contains ("overrides"))
        {
          Json s = sections (cfg);
          for (const auto &[key, value] : doc.at ("overrides").items ())
            {
              const auto dot = key.find ('.');
              if (dot == std::string::npos)
                throw ConfigError ("override \"" + key + "\": expected section.field");
              const std::string section = key.substr (0, dot);
              const std::string field = key.substr (dot + 1);
              if (!s.contains (section) || !s.at (section).contains (field))
                throw ConfigError ("unknown override key \"" + key + "\"");
              Json &slot = s[section][field];
              const bool numeric_ok = slot.is_number () && value.is_number ();
              const bool nullable = field == "num_edge_users" && (value.is_null () || value.is_number_integer ());
              if (!(numeric_ok || nullable || slot.type () == value.type ()))
                throw ConfigError ("override \"" + key + "\": wrong value type");
              slot = value;
            }
          apply_sections (s, cfg);
        }
      cfg.validate ();
      return cfg;
    }
  catch (const ConfigError &)
    {
      throw;
    }
  catch (const std::exception &e)
    {
      throw ConfigError (std::string ("config: ") + e.what ());
    }
}

Json
config_to_json (const ExperimentConfig &cfg)
{
  Json overrides = Json::object ();
  for (const auto &[section, fields] : sections (cfg).items ())
    for (const auto &[field, value] : fields.items ())
      overrides[section + "." + field] = value;
  std::vector<std::string> protocols;
  for (Protocol p : cfg.protocols)
    protocols.push_back (to_string (p));
  return {{"preset", cfg.preset},
          {"axis", to_string (cfg.axis)},
          {"axis_values", cfg.axis_values},
          {"seeds", cfg.seeds},
          {"protocols", protocols},
          {"output_dir", cfg.output_dir},
          {"jobs", cfg.jobs},
          {"record_wallclock", cfg.record_wallclock},
          {"save_states", cfg.save_states},
          {"overrides", std::move (overrides)}};
}

ExperimentConfig
load_config (const std::string &path)
{
  Json doc;
  try
    {
      doc = read_json_file (path);
    }
  catch (const std::exception &e)
    {
      throw ConfigError (e.what ());
    }
  return config_from_json (doc);
}

NetworkScenario
cell_scenario (const ExperimentConfig &cfg, double axis_value, std::uint64_t seed)
{
  TopologyParams tp = cfg.topology;
  TaskParams task = cfg.task;
  BudgetParams budget = cfg.budget;
  int keep = -1;
  switch (cfg.axis)
    {
    case SweepAxis::NumUav:
      {
        // Draw with the largest UAV count so every axis value shares users
        // and channels; dropped UAVs hand their users to the cloud.
        int most = 0;
        for (double v : cfg.axis_values)
          most = std::max (most, static_cast<int> (v));
        tp.num_uav = most;
        if (!tp.num_edge_users)
          tp.num_edge_users = most;
        keep = static_cast<int> (axis_value);
        break;
      }
    case SweepAxis::FronthaulCapacity: budget.fronthaul_capacity_bps = axis_value; break;
    case SweepAxis::DataRatio: task.data_bits = axis_value * task.cycles; break;
    case SweepAxis::UserDensity:
      {
        const std::vector<Position> bs = tp.bs_positions.empty () ? hexagonal_layout (tp.inter_bs_distance)
                                                                  : tp.bs_positions;
        const double r_km = coverage_radius (bs, tp.inter_bs_distance) / 1000.0;
        tp.num_users = std::max (tp.edge_users () + 1,
                                 static_cast<int> (std::lround (axis_value * std::numbers::pi * r_km * r_km)));
        break;
      }
    case SweepAxis::MaxDelay: task.max_delay_s = axis_value; break;
    }
  NetworkScenario sc = generate_scenario (tp, cfg.channel, task, seed, budget);
  return keep >= 0 ? keep_uavs (sc, keep) : sc;
}

SweepTable
run_sweep (const ExperimentConfig &cfg, const std::function<void (const CellRecord &)> &on_cell)
{
  cfg.validate ();
  struct Job
  {
    double axis;
    std::uint64_t seed;
    Protocol protocol;
  };
  std::vector<Job> jobs;
  for (double v : cfg.axis_values)
    for (std::uint64_t s : cfg.seeds)
      for (Protocol p : cfg.protocols)
        jobs.push_back ({v, s, p});

  std::vector<CellRecord> cells (jobs.size ());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size (); i = next++)
      {
        const Job &job = jobs[i];
        CellRecord &cell = cells[i];
        cell.axis = job.axis;
        cell.seed = job.seed;
        cell.scenario = cell_scenario (cfg, job.axis, job.seed);
        ProtocolOptions opts = cfg.options;
        opts.protocol = job.protocol;
        opts.init_seed = job.seed;
        try
          {
            cell.result = run_protocol (cell.scenario, opts);
          }
        catch (const InfeasibleInstance &)
          {
            cell.infeasible = true;
            cell.result.protocol = job.protocol;
          }
      }
  };
  const int workers = std::min<int> (cfg.jobs, static_cast<int> (jobs.size ()));
  if (workers <= 1)
    worker ();
  else
    {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w)
        pool.emplace_back (worker);
      for (auto &t : pool)
        t.join ();
    }

  SweepTable table;
  for (const auto &cell : cells)
    {
      table.rows.push_back (row_for (cell, cfg));
      if (on_cell)
        on_cell (cell);
    }
  table.aggregates = aggregate_rows (table.rows);
  return table;
}

std::vector<SweepRow>
aggregate_rows (const std::vector<SweepRow> &rows)
{
  std::vector<std::pair<double, Protocol>> keys;
  for (const auto &r : rows)
    if (std::find (keys.begin (), keys.end (), std::make_pair (r.axis, r.protocol)) == keys.end ())
      keys.emplace_back (r.axis, r.protocol);

  using Field = double SweepRow::*;
  static const Field fields[] = {&SweepRow::objective,    &SweepRow::avg_rate_bps, &SweepRow::worst_delay_s,
                                 &SweepRow::delay_comp_s, &SweepRow::delay_tx_s,   &SweepRow::delay_fh_s,
                                 &SweepRow::wallclock_s,  &SweepRow::outer_iters};
  std::vector<SweepRow> out;
  for (const auto &[axis, protocol] : keys)
    {
      std::vector<const SweepRow *> group;
      for (const auto &r : rows)
        if (r.axis == axis && r.protocol == protocol && !std::isnan (r.objective))
          group.push_back (&r);
      SweepRow mean{axis, "mean", protocol};
      SweepRow sd{axis, "std", protocol};
      const double n = static_cast<double> (group.size ());
      for (Field f : fields)
        {
          double sum = 0.0;
          for (const auto *r : group)
            sum += r->*f;
          const double m = group.empty () ? kNaN : sum / n;
          double ss = 0.0;
          for (const auto *r : group)
            ss += (r->*f - m) * (r->*f - m);
          mean.*f = m;
          sd.*f = group.size () > 1 ? std::sqrt (ss / (n - 1.0)) : (group.empty () ? kNaN : 0.0);
        }
      out.push_back (mean);
      out.push_back (sd);
    }
  return out;
}

void
emit_csv (const SweepTable &table, std::ostream &out)
{
  if (table.rows.empty ())
    throw std::invalid_argument ("emit_csv: empty table");
  out << "axis,seed,protocol,objective,avg_rate_bps,worst_delay_s,delay_comp_s,delay_tx_s,delay_fh_s,wallclock_s,"
         "outer_iters\n";
  auto line = [&] (const SweepRow &r) {
    out << format_double (r.axis) << ',' << r.seed << ',' << to_string (r.protocol) << ','
        << format_double (r.objective) << ',' << format_double (r.avg_rate_bps) << ','
        << format_double (r.worst_delay_s) << ',' << format_double (r.delay_comp_s) << ','
        << format_double (r.delay_tx_s) << ',' << format_double (r.delay_fh_s) << ','
        << format_double (r.wallclock_s) << ',' << format_double (r.outer_iters) << '\n';
  };
  for (const auto &r : table.rows)
    line (r);
  for (const auto &r : table.aggregates)
    line (r);
}

void
emit_csv (const SweepTable &table, const std::string &path)
{
  std::ofstream out (path, std::ios::binary);
  if (!out)
    throw std::runtime_error ("cannot write " + path);
  emit_csv (table, out);
}

SweepTable
parse_csv (std::istream &in)
{
  SweepTable table;
  std::string line;
  if (!std::getline (in, line))
    throw std::invalid_argument ("parse_csv: missing header");
  while (std::getline (in, line))
    {
      if (line.empty ())
        continue;
      std::vector<std::string> cols;
      std::stringstream ss (line);
      std::string cell;
      while (std::getline (ss, cell, ','))
        cols.push_back (cell);
      if (cols.size () != 11)
        throw std::invalid_argument ("parse_csv: expected 11 columns");
      SweepRow r;
      r.axis = std::strtod (cols[0].c_str (), nullptr);
      r.seed = cols[1];
      r.protocol = protocol_from_string (cols[2]);
      double *targets[] = {&r.objective,  &r.avg_rate_bps, &r.worst_delay_s, &r.delay_comp_s,
                           &r.delay_tx_s, &r.delay_fh_s,   &r.wallclock_s,   &r.outer_iters};
      for (int i = 0; i < 8; ++i)
        *targets[i] = std::strtod (cols[3 + i].c_str (), nullptr);
      (r.seed == "mean" || r.seed == "std" ? table.aggregates : table.rows).push_back (r);
    }
  return table;
}

}  // namespace hcmec
