// Acceptance run: every criterion prints one PASS/FAIL line; the exit code is
// non-zero when any of them fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hcmec/experiment.hpp"
#include "hcmec/protocols.hpp"
#include "hcmec/reformulate.hpp"
#include "hcmec/solver.hpp"
#include "oracles.hpp"

using namespace hcmec;
using namespace hcmec::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome
{
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::string
fmt (const char *format, auto... args)
{
  char buf[512];
  std::snprintf (buf, sizeof buf, format, args...);
  return buf;
}

double
seconds_since (Clock::time_point start)
{
  return std::chrono::duration<double> (Clock::now () - start).count ();
}

double
mean_of (const std::vector<double> &v)
{
  double s = 0.0;
  for (double x : v)
    s += x;
  return v.empty () ? NAN : s / static_cast<double> (v.size ());
}

// Every FCP/PDP run made by any criterion, for the feasibility audit.
struct AuditedRun
{
  std::string tag;
  NetworkScenario scenario;
  RunResult result;
};
std::vector<AuditedRun> audited_runs;

std::optional<RunResult>
run_and_record (const std::string &tag, const NetworkScenario &sc, Protocol p, ProtocolOptions opts = {})
{
  opts.protocol = p;
  try
    {
      RunResult r = run_protocol (sc, opts);
      if (p != Protocol::Fdp)
        audited_runs.push_back ({tag, sc, r});
      return r;
    }
  catch (const InfeasibleInstance &)
    {
      std::fprintf (stderr, "  %s %s: infeasible instance\n", tag.c_str (), to_string (p));
      return std::nullopt;
    }
}

// 1. Quadratic-transform tightness on generated scenarios.
Outcome
fp_tightness ()
{
  Rng rng (101);
  std::uniform_real_distribution<double> unit (0.0, 1.0);
  double worst = 0.0;
  int draws = 0;
  for (std::uint64_t seed = 1; draws < 1000; ++seed)
    {
      const NetworkScenario sc = desk_scenario (seed, static_cast<int> (seed % 3));
      for (int rep = 0; rep < 5 && draws < 1000; ++rep)
        {
          auto w = random_beams (sc, rng);
          for (int k = 0; k < sc.num_users (); ++k)
            w[k] *= std::sqrt ((sc.is_central (k) ? sc.bs_power_max : sc.uav_power_max) * unit (rng)
                               / w[k].squaredNorm ());
          for (int k = 0; k < sc.num_users () && draws < 1000; ++k, ++draws)
            {
              const double s = sinr (k, w, sc);
              const double gamma = 2.0 * s * unit (rng);
              const double g = quadratic_transform_residual (k, w, gamma, optimal_u (k, w, sc), sc);
              worst = std::max (worst, std::abs (g - (gamma - s)) / std::max ({gamma, s, 1e-300}));
            }
        }
    }
  return {worst <= 1e-9, fmt ("max relative deviation %.2e over %d draws", worst, draws)};
}

// 2. Fronthaul majorant.
Outcome
sca_majorization ()
{
  Rng rng (202);
  std::uniform_real_distribution<double> u (0.0, 1.0);
  double worst_gap = 0.0, worst_anchor = 0.0;
  for (int i = 0; i < 10000; ++i)
    {
      // Mix scales: link weights are O(1) while rates span several decades.
      const std::array<double, 1> q{u (rng) * 2.0}, r{u (rng) * 100.0}, qp{u (rng) * 2.0}, rp{u (rng) * 100.0};
      const double bilinear = 4.0 * q[0] * r[0];
      worst_gap = std::min (worst_gap, sca_fronthaul_lhs (q, r, qp, rp) - bilinear);
      const double anchor = 4.0 * qp[0] * rp[0];
      worst_anchor
          = std::max (worst_anchor, std::abs (sca_fronthaul_lhs (qp, rp, qp, rp) - anchor) / std::max (1.0, anchor));
    }
  return {worst_gap >= 0.0 && worst_anchor <= 1e-12,
          fmt ("min(surrogate - 4qr) = %.2e, max anchor deviation %.2e over 10000 tuples", worst_gap, worst_anchor)};
}

// 3. The barrier solver on tiny subproblems against exhaustive search.
Outcome
grid_oracle ()
{
  double worst = 0.0;
  int compared = 0;
  std::string notes;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
      const NetworkScenario sc = tiny_cell (seed);
      const VariableState anchor = tiny_anchor (sc, seed, 1e-5);
      const auto asm_ = assemble_subproblem (SubproblemScope::network (), anchor,
                                             SurrogateAnchors::from_state (anchor, 1e-5), sc);
      const SolverSolution sol = solve (asm_.problem);
      const double oracle = subproblem_grid_optimum (sc, anchor, asm_.layout.units.rate_unit, 40);
      const double found = sol.objective * asm_.layout.units.rate_unit;
      if (oracle <= 0.0 || sol.status != SolverStatus::Optimal)
        {
          notes += fmt (" seed%llu:%s", static_cast<unsigned long long> (seed),
                        oracle <= 0.0 ? "grid-empty" : "not-optimal");
          worst = INFINITY;
          continue;
        }
      const double dev = std::abs (found - oracle) / oracle;
      if (dev > 0.02)
        notes += fmt (" seed%llu:%.3f", static_cast<unsigned long long> (seed), dev);
      worst = std::max (worst, dev);
      ++compared;
    }
  return {worst <= 0.02, fmt ("max relative gap %.2e over %d instances%s", worst, compared, notes.c_str ())};
}

// 4. Derivatives of random and assembled constraints of every kind.
Outcome
gradient_checks ()
{
  Rng rng (404);
  std::uniform_real_distribution<double> coord (0.2, 3.0);
  std::map<ConstraintKind, double> worst;
  std::map<ConstraintKind, int> points;
  for (ConstraintKind kind : {ConstraintKind::Linear, ConstraintKind::ConvexQuadratic, ConstraintKind::PowerTerm,
                              ConstraintKind::LogRate, ConstraintKind::Hyperbolic})
    for (int i = 0; i < 100; ++i)
      {
        const Constraint c = random_constraint (kind, 8, rng);
        Eigen::VectorXd x (8);
        for (int j = 0; j < 8; ++j)
          x[j] = coord (rng);
        worst[kind] = std::max ({worst[kind], relative_mismatch (analytic_gradient (c, x), fd_gradient (c, x)),
                                 relative_mismatch (analytic_hessian (c, x), fd_hessian (c, x))});
        ++points[kind];
      }

  // The constraints the protocols actually build, at perturbed interior points.
  std::normal_distribution<double> jitter (0.0, 0.05);
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
      const NetworkScenario sc = desk_scenario (seed);
      const VariableState s = initialize_state (sc, seed, 1e-5);
      const auto asm_ = assemble_subproblem (SubproblemScope::network (), s, SurrogateAnchors::from_state (s, 1e-5), sc);
      const Eigen::VectorXd x0 = pack (asm_.layout, s, sc);
      for (int rep = 0; rep < 20; ++rep)
        {
          Eigen::VectorXd x = x0;
          for (Eigen::Index j = 0; j < x.size (); ++j)
            x[j] *= 1.0 + jitter (rng);
          for (const auto &c : asm_.problem.constraints)
            {
              if (!std::isfinite (c.value (x)) || c.domain_bound)
                continue;
              const double step = 1e-6;
              worst[c.kind] = std::max ({worst[c.kind], relative_mismatch (analytic_gradient (c, x), fd_gradient (c, x, step)),
                                         relative_mismatch (analytic_hessian (c, x), fd_hessian (c, x, step))});
            }
        }
    }
  double overall = 0.0;
  std::string detail;
  for (const auto &[kind, err] : worst)
    {
      overall = std::max (overall, err);
      detail += fmt ("%s %.1e; ", to_string (kind), err);
    }
  return {overall <= 1e-5, "max relative mismatch " + detail + fmt ("%d random points per kind", points[ConstraintKind::Linear])};
}

// 5. Ascent with frozen link weights.
Outcome
frozen_ascent ()
{
  ProtocolOptions o;
  o.freeze_beta = true;
  o.monotone_safeguard = false;
  double worst_drop = 0.0;
  int longest = 0, runs = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
      const NetworkScenario sc = desk_scenario (seed);
      const auto r = run_and_record (fmt ("frozen%llu", static_cast<unsigned long long> (seed)), sc, Protocol::Fcp, o);
      if (!r)
        return {false, fmt ("seed %llu infeasible", static_cast<unsigned long long> (seed))};
      for (std::size_t i = 1; i < r->objective_trace.size (); ++i)
        worst_drop = std::max (worst_drop, r->objective_trace[i - 1] - r->objective_trace[i]);
      longest = std::max (longest, r->outer_iterations);
      ++runs;
    }
  return {worst_drop <= 1e-6 && longest <= 100,
          fmt ("largest decrease %.3g bit/s, longest run %d iterations, %d seeds", worst_drop, longest, runs)};
}

// 7 and 11. Protocol ordering over 50 seeds plus a high-interference preset,
// with the exchange identity monitored on every PDP round.
struct OrderingResult
{
  Outcome ordering;
  Outcome decomposition;
};

NetworkScenario
high_interference_scenario (std::uint64_t seed)
{
  // Ample fronthaul leaves the cloud users interference limited.
  ExperimentConfig cfg = config_from_json (Json{{"overrides",
                                                 {{"topology.num_users", 10},
                                                  {"topology.edge_user_radius", 150.0},
                                                  {"budget.uav_power_dbm", 20.0},
                                                  {"budget.fronthaul_capacity_bps", 2e8}}}});
  return cell_scenario (cfg, 2, seed);
}

OrderingResult
protocol_ordering ()
{
  std::map<Protocol, std::vector<double>> objective;
  double worst_decomposition = 0.0;
  long pdp_rounds = 0;
  int skipped = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
    {
      const NetworkScenario sc = desk_scenario (seed);
      std::map<Protocol, double> row;
      for (Protocol p : {Protocol::Fcp, Protocol::Pdp, Protocol::Fdp})
        {
          const auto r = run_and_record (fmt ("desk%llu", static_cast<unsigned long long> (seed)), sc, p);
          if (!r)
            break;
          row[p] = r->objective ();
          if (p == Protocol::Pdp)
            {
              worst_decomposition = std::max (worst_decomposition, r->max_decomposition_error);
              pdp_rounds += static_cast<long> (r->exchanged_scalars.size ());
            }
        }
      if (row.size () != 3)
        {
          ++skipped;
          continue;
        }
      for (const auto &[p, v] : row)
        objective[p].push_back (v);
    }
  const double fcp = mean_of (objective[Protocol::Fcp]);
  const double pdp = mean_of (objective[Protocol::Pdp]);
  const double fdp = mean_of (objective[Protocol::Fdp]);

  int wins = 0, compared = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
      const NetworkScenario sc = high_interference_scenario (seed);
      const auto a = run_and_record (fmt ("hi%llu", static_cast<unsigned long long> (seed)), sc, Protocol::Pdp);
      if (a)
        worst_decomposition = std::max (worst_decomposition, a->max_decomposition_error);
      const auto b = a ? run_and_record ("hi", sc, Protocol::Fdp) : std::nullopt;
      if (!a || !b)
        continue;
      pdp_rounds += static_cast<long> (a->exchanged_scalars.size ());
      ++compared;
      if (a->objective () > b->objective ())
        ++wins;
    }
  const double share = compared ? static_cast<double> (wins) / compared : 0.0;

  OrderingResult out;
  out.ordering.pass = fcp >= pdp && pdp >= fdp && share >= 0.7;
  out.ordering.detail = fmt ("mean objective FCP %.4g >= PDP %.4g >= FDP %.4g Mbit/s over %zu seeds (%d dropped, no feasible start for some protocol); "
                             "PDP > FDP on %d/%d high-interference seeds (%.0f%%)",
                             fcp / 1e6, pdp / 1e6, fdp / 1e6, objective[Protocol::Fcp].size (), skipped, wins,
                             compared, 100.0 * share);
  out.decomposition.pass = worst_decomposition <= 1e-12 && pdp_rounds > 0;
  out.decomposition.detail = fmt ("max relative error %.2e over %ld PDP rounds", worst_decomposition, pdp_rounds);
  return out;
}

// 8. Average rate per user against the number of UAVs.
Outcome
uav_benefit ()
{
  bool pass = true;
  std::string detail;
  for (double cap : {25e6, 50e6})
    {
      ExperimentConfig cfg = preset_config ("desk");
      cfg.budget.fronthaul_capacity_bps = cap;
      for (Protocol p : {Protocol::Fcp, Protocol::Pdp, Protocol::Fdp})
        {
          std::vector<double> avg;
          for (int e : {0, 1, 2})
            {
              std::vector<double> rates;
              for (std::uint64_t seed : cfg.seeds)
                {
                  const auto r = run_and_record (fmt ("uav%d", e), cell_scenario (cfg, e, seed), p);
                  if (r)
                    rates.push_back (r->metrics.average_rate ());
                }
              avg.push_back (mean_of (rates));
            }
          const bool ok = avg[0] <= avg[1] && avg[1] <= avg[2];
          pass = pass && ok;
          detail += fmt ("%s@%.0fM %.3f/%.3f/%.3f%s; ", to_string (p), cap / 1e6, avg[0] / 1e6, avg[1] / 1e6,
                         avg[2] / 1e6, ok ? "" : " (not monotone)");
        }
    }
  return {pass, "mean Mbit/s per user at E=0/1/2: " + detail};
}

// 9. Transmission share of the worst-case delay along the data-to-cycles sweep.
Outcome
delay_tradeoff ()
{
  bool pass = true;
  std::string detail;
  const std::vector<double> ratios = {1e-3, 2e-3, 3e-3, 4e-3, 5e-3, 6e-3};
  for (double limit : {0.5, 1.3})
    {
      ExperimentConfig cfg = config_from_json (Json{{"preset", "paper"},
                                                    {"axis", "data_ratio"},
                                                    {"axis_values", ratios},
                                                    {"seeds", {1, 2, 3}},
                                                    {"protocols", {"pdp"}},
                                                    {"overrides",
                                                     {{"topology.num_users", 12},
                                                      {"topology.num_uav", 4},
                                                      {"topology.bs_antennas", 2},
                                                      {"budget.uav_power_dbm", 20.0},
                                                      {"task.max_delay_s", limit}}}});
      std::vector<double> share;
      bool feasible = true;
      for (double ratio : ratios)
        {
          std::vector<double> s;
          for (std::uint64_t seed : cfg.seeds)
            {
              const NetworkScenario sc = cell_scenario (cfg, ratio, seed);
              const auto r = run_and_record (fmt ("ratio%g", ratio), sc, Protocol::Pdp);
              if (!r || !r->feasibility.pass ())
                {
                  feasible = false;
                  continue;
                }
              const DelayBreakdown &d = r->metrics.delay[r->metrics.worst_delay_user];
              s.push_back (d.transmission / d.total ());
            }
          share.push_back (mean_of (s));
        }
      bool monotone = true;
      for (std::size_t i = 1; i < share.size (); ++i)
        monotone = monotone && share[i] >= share[i - 1];
      pass = pass && monotone && feasible;
      detail += fmt ("t=%.1fs shares", limit);
      for (double v : share)
        detail += fmt (" %.3f", v);
      detail += std::string (monotone ? "" : " (not monotone)") + (feasible ? "" : " (infeasible runs)") + "; ";
    }
  return {pass, detail};
}

// 10. Runtime growth with user density.
Outcome
runtime_scaling ()
{
  const std::vector<double> densities = {10.9, 15.6, 20.3, 25.0, 29.7};
  ExperimentConfig cfg = config_from_json (Json{{"axis", "user_density"},
                                                {"axis_values", densities},
                                                {"overrides", {{"topology.num_uav", 4}, {"budget.uav_power_dbm", 20.0}}}});
  std::map<Protocol, std::vector<double>> runtime;
  for (double d : densities)
    {
      std::map<Protocol, std::vector<double>> t;
      for (std::uint64_t seed = 1; seed <= 5; ++seed)
        {
          const NetworkScenario sc = cell_scenario (cfg, d, seed);
          for (Protocol p : {Protocol::Fcp, Protocol::Pdp, Protocol::Fdp})
            if (const auto r = run_and_record (fmt ("density%g", d), sc, p))
              t[p].push_back (r->wallclock_s);
        }
      for (Protocol p : {Protocol::Fcp, Protocol::Pdp, Protocol::Fdp})
        runtime[p].push_back (mean_of (t[p]));
    }
  const double base = runtime[Protocol::Fdp][0];
  bool fcp_slower = true, ratio_ok = true;
  std::string table;
  for (Protocol p : {Protocol::Fcp, Protocol::Pdp, Protocol::Fdp})
    {
      table += std::string (to_string (p)) + ":";
      for (double v : runtime[p])
        table += fmt (" %.2f", v / base);
      table += "; ";
    }
  for (std::size_t i = 0; i < densities.size (); ++i)
    {
      fcp_slower = fcp_slower && runtime[Protocol::Fcp][i] > runtime[Protocol::Pdp][i];
      const double ratio = runtime[Protocol::Pdp][i] / runtime[Protocol::Fdp][i];
      ratio_ok = ratio_ok && ratio >= 0.8 && ratio <= 1.25;
    }
  const double fcp_growth = runtime[Protocol::Fcp].back () / runtime[Protocol::Fcp].front ();
  const double pdp_growth = runtime[Protocol::Pdp].back () / runtime[Protocol::Pdp].front ();
  const bool pass = fcp_slower && ratio_ok && fcp_growth > pdp_growth;
  return {pass, "normalized runtimes " + table
                    + fmt ("growth FCP %.2f vs PDP %.2f%s%s", fcp_growth, pdp_growth, fcp_slower ? "" : " (FCP not slower)",
                           ratio_ok ? "" : " (PDP/FDP ratio out of range)")};
}

// 6. Audit of every FCP/PDP run that converged.
Outcome
feasibility_audit ()
{
  int checked = 0, failed = 0;
  std::string first;
  for (const auto &run : audited_runs)
    {
      if (!run.result.converged)
        continue;
      ++checked;
      const FeasibilityReport rep = audit (run.result.state, run.scenario, 1e-6, default_activity_threshold (run.scenario));
      if (!rep.pass ())
        {
          ++failed;
          first += (first.empty () ? ": " : ", ") + run.tag + " " + to_string (run.result.protocol) + " "
                   + rep.violations ().front ();
        }
    }
  return {failed == 0 && checked > 0,
          fmt ("%d of %d converged FCP/PDP runs violate a constraint (%zu runs total)%s", failed, checked,
               audited_runs.size (), first.c_str ())};
}

}  // namespace

int
main ()
{
  struct Criterion
  {
    int id;
    const char *name;
    double limit_s;  // 0: no runtime bound
  };
  const std::vector<Criterion> criteria = {
      {1, "FP tightness identity", 10.0},       {2, "SCA majorization", 5.0},
      {3, "solver oracle equivalence", 120.0},  {4, "gradient checks", 30.0},
      {5, "monotone ascent (frozen beta)", 600.0}, {6, "feasibility audit", 0.0},
      {7, "protocol ordering", 1800.0},         {8, "UAV benefit", 0.0},
      {9, "delay trade-off", 0.0},              {10, "runtime scaling", 0.0},
      {11, "interference decomposition", 0.0},
  };

  std::map<int, Outcome> results;
  auto timed = [&] (int id, const std::function<Outcome ()> &fn) {
    std::fprintf (stderr, "running criterion %d...\n", id);
    const auto start = Clock::now ();
    Outcome o = fn ();
    o.seconds = seconds_since (start);
    results[id] = o;
  };

  timed (1, fp_tightness);
  timed (2, sca_majorization);
  timed (3, grid_oracle);
  timed (4, gradient_checks);
  timed (5, frozen_ascent);
  {
    std::fprintf (stderr, "running criteria 7 and 11...\n");
    const auto start = Clock::now ();
    OrderingResult o = protocol_ordering ();
    o.ordering.seconds = o.decomposition.seconds = seconds_since (start);
    results[7] = o.ordering;
    results[11] = o.decomposition;
  }
  timed (8, uav_benefit);
  timed (9, delay_tradeoff);
  timed (10, runtime_scaling);
  timed (6, feasibility_audit);

  int failures = 0;
  for (const auto &c : criteria)
    {
      Outcome &o = results[c.id];
      if (c.limit_s > 0.0 && o.seconds > c.limit_s)
        {
          o.pass = false;
          o.detail += fmt (" (runtime %.1f s exceeds %.0f s)", o.seconds, c.limit_s);
        }
      failures += o.pass ? 0 : 1;
      std::printf ("criterion %2d %s  %s: %s [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str (),
                   o.seconds);
    }
  std::printf ("%d of %zu criteria passed\n", static_cast<int> (criteria.size ()) - failures, criteria.size ());
  return failures == 0 ? 0 : 1;
}
