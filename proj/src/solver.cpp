#include "hcmec/solver.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace hcmec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity ();

struct CenterOutcome
{
  bool converged = false;
  bool stopped = false;  // early-stop predicate fired
};

// Newton centering on  psi_t(x) = -t c.x - sum_i log(-g_i(x)).
class BarrierEngine
{
public:
  explicit BarrierEngine (const ConvexSubproblem &p)
    : p_ (p), n_ (p.num_variables), scratch_ (Eigen::VectorXd::Zero (p.num_variables))
  {
    supports_.reserve (p.constraints.size ());
    for (const auto &c : p.constraints)
      supports_.push_back (c.support ());
  }

  // Fills g and reports whether every constraint is strictly satisfied.
  bool values (const Eigen::VectorXd &x, Eigen::VectorXd &g) const
  {
    g.resize (static_cast<Eigen::Index> (p_.constraints.size ()));
    bool ok = true;
    for (std::size_t i = 0; i < p_.constraints.size (); ++i)
      {
        g[i] = p_.constraints[i].value (x);
        if (!(g[i] < 0.0))
          ok = false;
      }
    return ok;
  }

  double barrier (const Eigen::VectorXd &x, const Eigen::VectorXd &g, double t) const
  {
    double v = -t * p_.objective.dot (x);
    for (Eigen::Index i = 0; i < g.size (); ++i)
      v -= std::log (-g[i]);
    return v;
  }

  void derivatives (const Eigen::VectorXd &x, const Eigen::VectorXd &g, double t, Eigen::VectorXd &grad,
                    Eigen::MatrixXd &hess)
  {
    grad = -t * p_.objective;
    hess.setZero (n_, n_);
    for (std::size_t i = 0; i < p_.constraints.size (); ++i)
      {
        const Constraint &c = p_.constraints[i];
        const double inv = 1.0 / (-g[i]);
        const auto &sup = supports_[i];
        c.add_gradient (x, 1.0, scratch_);
        for (int a : sup)
          {
            const double ga = scratch_[a] * inv;
            grad[a] += ga;
            for (int b : sup)
              hess (a, b) += ga * scratch_[b] * inv;
          }
        for (int a : sup)
          scratch_[a] = 0.0;
        c.add_hessian (x, inv, hess);
      }
  }

  CenterOutcome center (Eigen::VectorXd &x, double t, const SolverOptions &opts, bool phase1, int &iterations,
                        std::vector<NewtonTraceRow> *trace,
                        const std::function<bool (const Eigen::VectorXd &, const Eigen::VectorXd &)> &stop)
  {
    Eigen::VectorXd g, g_trial, grad, dx, x_trial;
    Eigen::MatrixXd hess;
    values (x, g);
    for (int it = 0; it < opts.newton_cap; ++it)
      {
        derivatives (x, g, t, grad, hess);
        dx = newton_step (hess, grad);
        const double slope = grad.dot (dx);
        const double decrement = -slope / 2.0;
        ++iterations;
        if (trace)
          trace->push_back ({iterations, t, barrier (x, g, t), decrement, phase1});
        if (!(decrement > opts.newton_tol))
          return {true, false};

        // Backtrack into the strict interior, then to sufficient decrease.
        double s = 1.0;
        bool accepted = false;
        const double linear_change = -t * p_.objective.dot (dx);
        while (s > 1e-14)
          {
            x_trial = x + s * dx;
            if (values (x_trial, g_trial))
              {
                // Close to the centre the full step is safe and the
                // sufficient-decrease test drowns in rounding.
                if (s == 1.0 && decrement < opts.pure_newton_decrement)
                  {
                    accepted = true;
                    break;
                  }
                double change = s * linear_change;
                for (Eigen::Index i = 0; i < g.size (); ++i)
                  change -= std::log1p ((g_trial[i] - g[i]) / g[i]);
                if (change <= opts.ls_alpha * s * slope)
                  {
                    accepted = true;
                    break;
                  }
              }
            s *= opts.ls_beta;
          }
        if (!accepted)
          return {decrement < 1e-6, false};
        x.swap (x_trial);
        g.swap (g_trial);
        if (stop && stop (x, g))
          return {false, true};
      }
    return {false, false};
  }

private:
  Eigen::VectorXd newton_step (const Eigen::MatrixXd &hess, const Eigen::VectorXd &grad) const
  {
    // Jacobi equilibration before the Cholesky solve; the per-link weights
    // spread the diagonal over many orders of magnitude.
    Eigen::VectorXd d (n_);
    for (int i = 0; i < n_; ++i)
      d[i] = hess (i, i) > 0.0 ? 1.0 / std::sqrt (hess (i, i)) : 1.0;
    Eigen::MatrixXd scaled = d.asDiagonal () * hess * d.asDiagonal ();
    const Eigen::VectorXd rhs = -(d.array () * grad.array ()).matrix ();
    Eigen::LLT<Eigen::MatrixXd> llt (scaled);
    double ridge = 1e-14;
    while (llt.info () != Eigen::Success && ridge < 1.0)
      {
        Eigen::MatrixXd reg = scaled;
        reg.diagonal ().array () += ridge;
        llt.compute (reg);
        ridge *= 100.0;
      }
    const Eigen::VectorXd y = llt.solve (rhs);
    return (d.array () * y.array ()).matrix ();
  }

  const ConvexSubproblem &p_;
  int n_;
  std::vector<std::vector<int>> supports_;
  Eigen::VectorXd scratch_;
};

Eigen::VectorXd
central_path_duals (const Eigen::VectorXd &g, double t)
{
  Eigen::VectorXd lambda (g.size ());
  for (Eigen::Index i = 0; i < g.size (); ++i)
    lambda[i] = 1.0 / (t * (-g[i]));
  return lambda;
}

}  // namespace

const char *
to_string (SolverStatus status)
{
  switch (status)
    {
    case SolverStatus::Optimal: return "optimal";
    case SolverStatus::MaxIter: return "max_iter";
    case SolverStatus::Infeasible: return "infeasible";
    }
  return "unknown";
}

Phase1Result
phase1 (const ConvexSubproblem &p, const SolverOptions &opts, std::vector<NewtonTraceRow> *trace)
{
  p.validate ();
  const int n = p.num_variables;
  Phase1Result res;
  res.x = p.initial_point;

  // Domain bounds are never relaxed, so the start has to satisfy them with
  // some margin; a start hugging a bound stalls the centering steps.
  for (const auto &c : p.constraints)
    if (c.domain_bound)
      {
        const int i = c.linear.index.front ();
        const double lower = c.constant / -c.linear.coef.front ();
        const double margin = opts.domain_margin * std::max (1.0, std::abs (lower));
        if (!(res.x[i] - lower >= margin))
          res.x[i] = lower + margin;
      }

  double worst = -kInf;
  for (const auto &c : p.constraints)
    worst = std::max (worst, c.value (res.x));
  if (p.constraints.empty () || worst < 0.0)
    {
      res.feasible = true;
      res.unchanged = res.x == p.initial_point;
      res.min_bound = p.constraints.empty () ? -kInf : worst;
      return res;
    }
  if (!std::isfinite (worst))
    {
      res.min_bound = kInf;
      return res;
    }

  // minimize s  s.t.  g_i(x) <= s (relaxable),  domain bounds,  s >= -1
  ConvexSubproblem aug;
  aug.num_variables = n + 1;
  aug.blocks = p.blocks;
  aug.blocks.push_back ({"phase1_bound", n, 1});
  aug.objective = Eigen::VectorXd::Zero (n + 1);
  aug.objective[n] = -1.0;
  aug.constraints = p.constraints;
  for (auto &c : aug.constraints)
    if (!c.domain_bound)
      c.linear.add (n, -1.0);
  aug.constraints.push_back (lower_bound (n, -1.0, "phase1_floor"));
  aug.initial_point.resize (n + 1);
  aug.initial_point << res.x, worst + std::max (1.0, std::abs (worst));

  Eigen::VectorXd xa = aug.initial_point;
  BarrierEngine engine (aug);
  auto stop = [&] (const Eigen::VectorXd &z, const Eigen::VectorXd &) {
    if (!(z[n] < 0.0))
      return false;
    const Eigen::VectorXd head = z.head (n);
    for (const auto &c : p.constraints)
      if (!(c.value (head) < 0.0))
        return false;
    return true;
  };

  // Starting at t ~ m keeps the relaxed bound near its initial value instead
  // of letting the first centering drift far outside the feasible set.
  const double t_start = std::max (opts.t0, static_cast<double> (aug.constraints.size ()) / aug.initial_point[n]);
  for (double t = t_start;; t *= opts.t_factor)
    {
      const CenterOutcome out = engine.center (xa, t, opts, true, res.newton_iterations, trace, stop);
      if (out.stopped)
        {
          res.feasible = true;
          break;
        }
      if (1.0 / t < opts.gap_per_constraint)
        break;
    }
  res.min_bound = xa[n];
  res.x = xa.head (n);
  if (!res.feasible && res.min_bound <= opts.eps_feas)
    res.feasible = stop (xa, Eigen::VectorXd ());
  return res;
}

SolverSolution
solve (const ConvexSubproblem &p, const SolverOptions &opts)
{
  p.validate ();
  SolverSolution sol;
  std::vector<NewtonTraceRow> *trace = opts.record_trace ? &sol.trace : nullptr;

  if (p.num_variables == 0)
    {
      sol.status = SolverStatus::Optimal;
      sol.x = Eigen::VectorXd ();
      sol.duals = Eigen::VectorXd::Zero (static_cast<Eigen::Index> (p.constraints.size ()));
      return sol;
    }
  if (p.constraints.empty ())
    throw std::invalid_argument ("solve: unconstrained linear objective");

  const Phase1Result p1 = phase1 (p, opts, trace);
  sol.phase1_iterations = p1.newton_iterations;
  sol.x = p1.x;
  if (!p1.feasible)
    {
      sol.status = SolverStatus::Infeasible;
      sol.max_violation = p1.min_bound;
      sol.objective = p.objective.dot (sol.x);
      return sol;
    }

  BarrierEngine engine (p);
  Eigen::VectorXd x = p1.x;
  double t = opts.t0;
  bool last_converged = false;
  for (;; t *= opts.t_factor)
    {
      const CenterOutcome out = engine.center (x, t, opts, false, sol.newton_iterations, trace, {});
      last_converged = out.converged;
      if (1.0 / t < opts.gap_per_constraint)
        break;
    }

  Eigen::VectorXd g;
  engine.values (x, g);
  sol.x = x;
  sol.final_t = t;
  sol.duals = central_path_duals (g, t);
  sol.objective = p.objective.dot (x);
  sol.max_violation = p.max_violation (x);
  const KktResidual kkt = kkt_residual (p, x, sol.duals);
  sol.stationarity = kkt.stationarity;
  sol.complementarity = kkt.complementarity;
  const bool certified = sol.stationarity <= opts.eps_kkt * (1.0 + p.objective.norm () + kkt.gradient_scale)
                         && sol.max_violation <= opts.eps_feas;
  sol.status = (last_converged && certified) ? SolverStatus::Optimal : SolverStatus::MaxIter;
  return sol;
}

KktResidual
kkt_residual (const ConvexSubproblem &p, const Eigen::VectorXd &x, const Eigen::VectorXd &duals)
{
  if (duals.size () != static_cast<Eigen::Index> (p.constraints.size ()))
    throw std::invalid_argument ("kkt_residual: dual count mismatch");
  Eigen::VectorXd grad = -p.objective;
  KktResidual r;
  for (std::size_t i = 0; i < p.constraints.size (); ++i)
    {
      const Constraint &c = p.constraints[i];
      if (duals[i] != 0.0)
        {
          Eigen::VectorXd term = Eigen::VectorXd::Zero (grad.size ());
          c.add_gradient (x, duals[i], term);
          r.gradient_scale += term.norm ();
          grad += term;
        }
      r.complementarity = std::max (r.complementarity, std::abs (duals[i] * c.value (x)));
    }
  r.stationarity = grad.norm ();
  return r;
}

void
write_trace_csv (const std::vector<NewtonTraceRow> &trace, std::ostream &out)
{
  out << "iteration,t,barrier,newton_decrement\n";
  const auto old = out.precision (17);
  for (const auto &row : trace)
    out << row.iteration << ',' << row.t << ',' << row.barrier << ',' << row.decrement << '\n';
  out.precision (old);
}

}  // namespace hcmec
