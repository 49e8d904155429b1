#include "hcmec/protocols.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <future>

namespace hcmec {

namespace {

using Clock = std::chrono::steady_clock;

double
seconds_since (Clock::time_point start)
{
  return std::chrono::duration<double> (Clock::now () - start).count ();
}

std::vector<SubproblemScope>
agents_for (Protocol protocol, const NetworkScenario &sc)
{
  if (protocol == Protocol::Fcp)
    return {SubproblemScope::network ()};
  std::vector<SubproblemScope> out;
  if (!sc.users_of (kCloud).empty () || sc.num_uav () == 0)
    out.push_back (SubproblemScope::cloud ());
  for (int e = 0; e < sc.num_uav (); ++e)
    if (!sc.users_of (e).empty ())
      out.push_back (SubproblemScope::edge (e));
  return out;
}

// Interference each agent attributes to user k beyond its own users.
double
foreign_view (Protocol protocol, const InterferenceTable &table, int k, const NetworkScenario &sc)
{
  return protocol == Protocol::Pdp ? table.foreign (k, sc.serving[k]) : 0.0;
}

// Interference the agent in charge of user k perceives at k.
double
perceived_interference (Protocol protocol, const InterferenceTable &table, int k, const NetworkScenario &sc)
{
  if (protocol == Protocol::Fcp)
    return table.rows.col (k).sum ();
  return table.at (sc.serving[k], k) + foreign_view (protocol, table, k, sc);
}

void
refresh_anchors (VariableState &state, const NetworkScenario &sc, const ProtocolOptions &opts, bool update_beta,
                 const InterferenceTable &table)
{
  if (update_beta)
    state.beta = update_weights (state.w, sc, opts.delta);
  for (int k = 0; k < sc.num_users (); ++k)
    {
      for (int b = 0; b < sc.num_bs (); ++b)
        state.q (b, k) = sc.is_central (k) ? state.beta (b, k) * link_power (b, k, state, sc) : 0.0;
      const Complex signal = std::conj (beam_response (k, k, state.w, sc));
      state.u[k] = signal / (sc.noise_power + perceived_interference (opts.protocol, table, k, sc));
    }
  state.q_prev = state.q;
  state.r_prev = state.r;
}

struct AgentOutcome
{
  bool solved = false;
  SolverStatus status = SolverStatus::Infeasible;
  SubproblemLayout layout;
  Eigen::VectorXd x;
};

AgentOutcome
solve_agent (SubproblemScope scope, const VariableState &state, const NetworkScenario &sc,
             const ProtocolOptions &opts, const InterferenceTable &table)
{
  if (opts.protocol == Protocol::Pdp)
    {
      scope.foreign_interference.assign (sc.num_users (), 0.0);
      for (int k = 0; k < sc.num_users (); ++k)
        scope.foreign_interference[k] = foreign_view (opts.protocol, table, k, sc);
    }
  AssembledSubproblem sub
      = assemble_subproblem (scope, state, SurrogateAnchors::from_state (state, opts.delta), sc, opts.units);
  const SolverSolution sol = solve (sub.problem, opts.solver);
  AgentOutcome out;
  out.status = sol.status;
  out.layout = std::move (sub.layout);
  if (sol.status != SolverStatus::Infeasible)
    {
      out.solved = true;
      out.x = sol.x;
    }
  return out;
}

std::vector<AgentOutcome>
solve_round (const std::vector<SubproblemScope> &agents, const VariableState &state, const NetworkScenario &sc,
             const ProtocolOptions &opts, const InterferenceTable &table)
{
  std::vector<AgentOutcome> out;
  if (opts.parallel_entities && agents.size () > 1)
    {
      std::vector<std::future<AgentOutcome>> jobs;
      for (const auto &a : agents)
        jobs.push_back (std::async (std::launch::async, solve_agent, a, std::cref (state), std::cref (sc),
                                    std::cref (opts), std::cref (table)));
      for (auto &j : jobs)
        out.push_back (j.get ());
    }
  else
    for (const auto &a : agents)
      out.push_back (solve_agent (a, state, sc, opts, table));
  return out;
}

// Repeats phase I with refreshed auxiliaries until every agent's subproblem
// admits a strictly feasible point.
bool
restore_feasibility (VariableState &state, const std::vector<SubproblemScope> &agents, const NetworkScenario &sc,
                     const ProtocolOptions &opts)
{
  for (int round = 0; round < opts.restoration_rounds; ++round)
    {
      const InterferenceTable table = build_interference_table (state.w, sc);
      refresh_anchors (state, sc, opts, true, table);
      bool all_feasible = true;
      for (SubproblemScope scope : agents)
        {
          if (opts.protocol == Protocol::Pdp)
            {
              scope.foreign_interference.assign (sc.num_users (), 0.0);
              for (int k = 0; k < sc.num_users (); ++k)
                scope.foreign_interference[k] = foreign_view (opts.protocol, table, k, sc);
            }
          const AssembledSubproblem sub = assemble_subproblem (
              scope, state, SurrogateAnchors::from_state (state, opts.delta), sc, opts.units);
          const Phase1Result p1 = phase1 (sub.problem, opts.solver);
          all_feasible = all_feasible && p1.feasible;
          write_back (sub.layout, p1.x, sc, state);
        }
      if (all_feasible)
        return true;
    }
  return false;
}

struct LoopOutcome
{
  bool any_solved = false;
  bool first_infeasible = false;
};

// Runs up to `limit` outer iterations from `state`, appending to `trace`.
LoopOutcome
outer_loop (VariableState &state, std::vector<SubproblemScope> agents, const NetworkScenario &sc,
            const ProtocolOptions &opts, int limit, bool reweight, std::vector<double> &trace, RunResult &res,
            Clock::time_point start, bool record)
{
  LoopOutcome lo;
  InterferenceTable table = build_interference_table (state.w, sc);
  double accepted = 0.0;
  for (int it = 1; it <= limit; ++it)
    {
      VariableState candidate = state;
      refresh_anchors (candidate, sc, opts, reweight && !(opts.freeze_beta && it > 1), table);
      // Refreshed surrogates are tight at the current point.
      state.beta = candidate.beta;
      state.q = candidate.q;
      state.q_prev = candidate.q_prev;
      state.r_prev = candidate.r_prev;
      state.u = candidate.u;

      const std::vector<AgentOutcome> outcomes = solve_round (agents, candidate, sc, opts, table);
      bool solved = false;
      for (const auto &o : outcomes)
        {
          res.last_status = o.status;
          if (o.solved)
            {
              write_back (o.layout, o.x, sc, candidate);
              solved = true;
            }
          else if (it == 1)
            lo.first_infeasible = true;
        }
      if (lo.first_infeasible)
        return lo;
      lo.any_solved = lo.any_solved || solved;

      if (opts.protocol != Protocol::Fcp)
        {
          table = build_interference_table (candidate.w, sc);
          if (opts.protocol == Protocol::Pdp)
            {
              res.exchanged_scalars.push_back (table.scalar_count ());
              res.total_exchanged += table.scalar_count ();
              res.max_decomposition_error
                  = std::max (res.max_decomposition_error, decomposition_error (table, candidate.w, sc));
            }
          else if (record)
            res.exchanged_scalars.push_back (0);
        }
      else
        table = build_interference_table (candidate.w, sc);

      const double obj = audited_objective (candidate, sc);
      if (opts.monotone_safeguard && it > 1 && obj < accepted)
        {
          ++res.rejected_iterates;
          table = build_interference_table (state.w, sc);
          trace.push_back (accepted);
        }
      else
        {
          state = std::move (candidate);
          trace.push_back (obj);
        }
      if (record)
        {
          res.wallclock_trace.push_back (seconds_since (start));
          ++res.outer_iterations;
        }
      const double prev = accepted;
      accepted = trace.back ();
      if (it > 1 && std::abs (accepted - prev) <= opts.rel_tol * std::abs (prev))
        {
          if (record)
            res.converged = true;
          break;
        }
    }
  return lo;
}

// Raises f_k of users whose delay limit fails, within compute capacity and by
// taking cycles from users with spare time. A UAV
// whose power budget binds gives up a sliver of transmit power for the extra
// cycles, after which rates are re-capped and the check repeats. Returns the
// users that stay infeasible.
std::vector<int>
repair_delays (VariableState &state, const NetworkScenario &sc)
{
  std::vector<int> failures;
  for (int pass = 0; pass < 5; ++pass)
    {
      failures.clear ();
      bool changed = false;
      for (int k = 0; k < sc.num_users (); ++k)
        {
          const TaskParams &task = sc.tasks[k];
          const double limit = task.max_delay_s - (sc.is_central (k) ? task.fronthaul_delay_s : 0.0);
          const double tx = state.r[k] > 0.0 ? task.data_bits / state.r[k] : INFINITY;
          const double comp = state.f[k] > 0.0 ? task.cycles / state.f[k] : INFINITY;
          if (comp + tx <= limit)
            continue;
          const double room = limit - tx;
          if (!(room > 0.0))
            {
              failures.push_back (k);
              continue;
            }
          const double needed = task.cycles / room * (1.0 + 1e-9);
          const int entity = sc.serving[k];
          const std::vector<int> mine = sc.users_of (entity);
          double others = 0.0;
          for (int i : mine)
            if (i != k)
              others += state.f[i];
          const double capacity = entity == kCloud ? sc.cc_capacity : sc.ec_capacity;
          if (needed + others > capacity)
            {
              // Borrow cycles from users of the same entity that finish early.
              std::vector<std::pair<int, double>> donors;
              double spare_cycles = 0.0;
              for (int i : mine)
                {
                  if (i == k)
                    continue;
                  const TaskParams &ti = sc.tasks[i];
                  const double left = ti.max_delay_s - (sc.is_central (i) ? ti.fronthaul_delay_s : 0.0)
                                      - ti.data_bits / state.r[i];
                  if (!(left > 0.0))
                    continue;
                  const double floor = ti.cycles / left * (1.0 + 1e-9);
                  if (state.f[i] > floor)
                    {
                      donors.push_back ({i, state.f[i] - floor});
                      spare_cycles += state.f[i] - floor;
                    }
                }
              const double deficit = needed + others - capacity;
              if (deficit > spare_cycles)
                {
                  failures.push_back (k);
                  continue;
                }
              for (const auto &[i, give] : donors)
                state.f[i] -= deficit * give / spare_cycles;
              others -= deficit;
            }
          if (entity != kCloud)
            {
              const EcPower p = power_ec (entity, state, sc);
              const double compute = sc.cpu_s * std::pow (needed + others, sc.cpu_mu);
              const double spare = sc.uav_power_max - p.operation * (sc.operation_power_in_constraint ? 1.0 : 0.0)
                                   - compute;
              if (!(spare > 0.0))
                {
                  failures.push_back (k);
                  continue;
                }
              if (p.transmit > spare)
                {
                  const double scale = std::sqrt (spare / p.transmit * (1.0 - 1e-12));
                  for (int i : mine)
                    state.w[i] *= scale;
                }
            }
          state.f[k] = needed;
          changed = true;
        }
      if (!changed)
        break;
      for (int k = 0; k < sc.num_users (); ++k)
        {
          state.r[k] = std::min (state.r[k], rate_bound (k, state.w, sc));
          state.gamma[k] = std::min (state.gamma[k], sinr (k, state.w, sc));
        }
    }
  return failures;
}

RunResult
run_impl (const NetworkScenario &sc, ProtocolOptions opts, Protocol protocol,
          const std::optional<VariableState> &start)
{
  opts.protocol = protocol;
  opts.validate ();
  sc.validate ();
  const auto t0 = Clock::now ();
  RunResult res;
  res.protocol = protocol;
  VariableState state = start ? *start : initialize_state (sc, opts.init_seed, opts.delta);
  state.check_dimensions (sc);
  const double threshold = opts.activity_threshold > 0.0 ? opts.activity_threshold : default_activity_threshold (sc);

  const std::vector<SubproblemScope> agents = agents_for (protocol, sc);
  if (agents.empty ())
    throw std::invalid_argument ("scenario has no users");

  if (!restore_feasibility (state, agents, sc, opts))
    throw InfeasibleInstance (std::string (to_string (protocol)) + ": no feasible starting point found");
  const LoopOutcome main = outer_loop (state, agents, sc, opts, opts.max_outer_iterations, true,
                                       res.objective_trace, res, t0, true);
  if (main.first_infeasible)
    throw InfeasibleInstance (std::string (to_string (protocol)) + ": first subproblem is infeasible");

  if (opts.polish)
    {
      // Fix the clustering found by the reweighting and enforce the exact
      // per-BS rate sums over the surviving links.
      std::vector<SubproblemScope> fixed = agents;
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> active (sc.num_bs (), sc.num_users ());
      for (int k = 0; k < sc.num_users (); ++k)
        for (int b = 0; b < sc.num_bs (); ++b)
          active (b, k) = sc.is_central (k) && link_power (b, k, state, sc) > threshold;
      for (auto &a : fixed)
        {
          a.fixed_clustering = true;
          a.active = active;
        }
      VariableState polished = state;
      RunResult scratch;
      const LoopOutcome po = outer_loop (polished, fixed, sc, opts, opts.polish_iterations, false,
                                         res.polish_trace, scratch, t0, false);
      if (!po.first_infeasible && po.any_solved)
        {
          state = std::move (polished);
          res.exchanged_scalars.insert (res.exchanged_scalars.end (), scratch.exchanged_scalars.begin (),
                                        scratch.exchanged_scalars.end ());
          res.total_exchanged += scratch.total_exchanged;
          res.max_decomposition_error = std::max (res.max_decomposition_error, scratch.max_decomposition_error);
        }
    }

  // Rates are capped by the SINR under the true all-entity interference.
  for (int k = 0; k < sc.num_users (); ++k)
    {
      const double s = sinr (k, state.w, sc);
      state.gamma[k] = std::min (state.gamma[k], s);
      state.r[k] = std::min (state.r[k], rate_bound (k, state.w, sc));
    }
  if (protocol == Protocol::Pdp || (protocol == Protocol::Fdp && opts.fdp_delay_repair))
    repair_delays (state, sc);

  res.state = std::move (state);
  res.metrics = evaluate_metrics (res.state, sc, threshold);
  res.feasibility = audit (res.state, sc, opts.eps_feas, threshold);
  if (protocol != Protocol::Fcp)
    for (const auto &e : res.feasibility.entries)
      if (e.family == ConstraintFamily::Delay && !e.pass)
        res.repair_failures.push_back (e.index);
  res.wallclock_s = seconds_since (t0);
  return res;
}

}  // namespace

const char *
to_string (Protocol p)
{
  switch (p)
    {
    case Protocol::Fcp: return "fcp";
    case Protocol::Pdp: return "pdp";
    case Protocol::Fdp: return "fdp";
    }
  return "unknown";
}

Protocol
protocol_from_string (const std::string &name)
{
  std::string s (name);
  std::transform (s.begin (), s.end (), s.begin (), [] (unsigned char c) { return std::tolower (c); });
  if (s == "fcp")
    return Protocol::Fcp;
  if (s == "pdp")
    return Protocol::Pdp;
  if (s == "fdp")
    return Protocol::Fdp;
  throw std::invalid_argument ("unknown protocol '" + name + "'");
}

void
ProtocolOptions::validate () const
{
  if (max_outer_iterations < 1)
    throw std::invalid_argument ("max_outer_iterations must be at least 1");
  if (!(rel_tol > 0.0))
    throw std::invalid_argument ("rel_tol must be positive");
  if (!(delta > 0.0))
    throw std::invalid_argument ("delta must be positive");
  if (polish_iterations < 1)
    throw std::invalid_argument ("polish_iterations must be at least 1");
}

double
InterferenceTable::foreign (int k, int own_entity) const
{
  return rows.col (k).sum () - at (own_entity, k);
}

Eigen::VectorXd
compute_interference_report (int entity, const std::vector<ComplexVector> &w, const NetworkScenario &sc)
{
  Eigen::VectorXd row = Eigen::VectorXd::Zero (sc.num_users ());
  const std::vector<int> mine = sc.users_of (entity);
  for (int k = 0; k < sc.num_users (); ++k)
    for (int i : mine)
      if (i != k)
        row[k] += std::norm (beam_response (k, i, w, sc));
  return row;
}

InterferenceTable
build_interference_table (const std::vector<ComplexVector> &w, const NetworkScenario &sc)
{
  InterferenceTable t;
  t.rows.resize (sc.num_uav () + 1, sc.num_users ());
  t.rows.row (0) = compute_interference_report (kCloud, w, sc).transpose ();
  for (int e = 0; e < sc.num_uav (); ++e)
    t.rows.row (e + 1) = compute_interference_report (e, w, sc).transpose ();
  return t;
}

double
decomposition_error (const InterferenceTable &table, const std::vector<ComplexVector> &w, const NetworkScenario &sc)
{
  double worst = 0.0;
  for (int k = 0; k < sc.num_users (); ++k)
    {
      const double exact = sc.noise_power + interference (k, w, sc);
      const double summed = sc.noise_power + table.rows.col (k).sum ();
      worst = std::max (worst, std::abs (summed - exact) / exact);
    }
  return worst;
}

double
audited_objective (const VariableState &state, const NetworkScenario &sc)
{
  double obj = 0.0;
  for (int k = 0; k < sc.num_users (); ++k)
    obj += sc.tasks[k].weight * std::min (state.r[k], rate_bound (k, state.w, sc));
  return obj;
}

RunResult
run_fcp (const NetworkScenario &sc, const ProtocolOptions &opts, const std::optional<VariableState> &start)
{
  return run_impl (sc, opts, Protocol::Fcp, start);
}

RunResult
run_pdp (const NetworkScenario &sc, const ProtocolOptions &opts, const std::optional<VariableState> &start)
{
  return run_impl (sc, opts, Protocol::Pdp, start);
}

RunResult
run_fdp (const NetworkScenario &sc, const ProtocolOptions &opts, const std::optional<VariableState> &start)
{
  return run_impl (sc, opts, Protocol::Fdp, start);
}

RunResult
run_protocol (const NetworkScenario &sc, const ProtocolOptions &opts, const std::optional<VariableState> &start)
{
  return run_impl (sc, opts, opts.protocol, start);
}

long
table_variable_count (Protocol p, const NetworkScenario &sc)
{
  const long k = sc.num_users ();
  const long b = sc.num_bs ();
  if (p == Protocol::Fcp)
    return k * (3 + static_cast<long> (sc.num_uav ()) * sc.uav_antennas () + b * (1 + sc.bs_antennas ()));
  long total = table_entity_variable_count (kCloud, sc);
  for (int e = 0; e < sc.num_uav (); ++e)
    total += table_entity_variable_count (e, sc);
  return total;
}

long
table_entity_variable_count (int entity, const NetworkScenario &sc)
{
  const long users = static_cast<long> (sc.users_of (entity).size ());
  if (entity == kCloud)
    {
      const long b = sc.num_bs ();
      return users * (3 + b + b * sc.bs_antennas ());
    }
  return users * (3 + sc.uav_antennas ());
}

}  // namespace hcmec
