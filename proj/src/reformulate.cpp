#include "hcmec/reformulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hcmec {

namespace {

constexpr int kWholeNetwork = -2;

std::string
tagged (const char *name, int index)
{
  return std::string (name) + "[" + std::to_string (index) + "]";
}

// Adds weight * |hbar^H w|^2 as two squared real forms over the interleaved
// (re, im) coordinates of w. Pinned coordinates (-1) contribute nothing.
void
add_response_squares (Constraint &c, double weight, const ComplexVector &hbar, const std::vector<int> &coords)
{
  SquareTerm re{weight, {}};
  SquareTerm im{weight, {}};
  for (std::size_t j = 0; j < coords.size (); ++j)
    {
      const int idx = coords[j];
      if (idx < 0)
        continue;
      const double hr = hbar[static_cast<Eigen::Index> (j)].real ();
      const double hi = hbar[static_cast<Eigen::Index> (j)].imag ();
      re.form.add (idx, hr);
      re.form.add (idx + 1, hi);
      im.form.add (idx, -hi);
      im.form.add (idx + 1, hr);
    }
  if (re.form.empty ())
    return;
  c.squares.push_back (std::move (re));
  c.squares.push_back (std::move (im));
}

// weight * ||w_block||^2 as per-coordinate squares.
void
add_energy_squares (Constraint &c, double weight, const std::vector<int> &coords, std::size_t first, std::size_t count)
{
  for (std::size_t j = first; j < first + count; ++j)
    {
      const int idx = coords[j];
      if (idx < 0)
        continue;
      for (int part = 0; part < 2; ++part)
        {
          SquareTerm sq{weight, {}};
          sq.form.add (idx + part, 1.0);
          c.squares.push_back (std::move (sq));
        }
    }
}

}  // namespace

SurrogateAnchors
SurrogateAnchors::from_state (const VariableState &state, double delta)
{
  return {state.beta, state.q_prev, state.r_prev, state.u, delta};
}

double
link_weight (double previous_power, double delta)
{
  return 1.0 / (delta + previous_power);
}

Eigen::MatrixXd
update_weights (const std::vector<ComplexVector> &w_prev, const NetworkScenario &sc, double delta)
{
  if (!(delta > 0.0))
    throw std::invalid_argument ("update_weights: delta must be positive");
  const int lc = sc.bs_antennas ();
  Eigen::MatrixXd beta (sc.num_bs (), sc.num_users ());
  for (int k = 0; k < sc.num_users (); ++k)
    for (int b = 0; b < sc.num_bs (); ++b)
      {
        const double p = sc.is_central (k) ? w_prev[k].segment (b * lc, lc).squaredNorm () : 0.0;
        beta (b, k) = link_weight (p, delta);
      }
  return beta;
}

double
sca_fronthaul_lhs (std::span<const double> q, std::span<const double> r, std::span<const double> q_prev,
                   std::span<const double> r_prev)
{
  if (q.size () != r.size () || q.size () != q_prev.size () || q.size () != r_prev.size ())
    throw std::invalid_argument ("sca_fronthaul_lhs: length mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < q.size (); ++k)
    {
      // (q + r)^2 - 2 a (q - r) + a^2 with a = q' - r', expanded without cancellation.
      const double gap = (q[k] - r[k]) - (q_prev[k] - r_prev[k]);
      sum += 4.0 * q[k] * r[k] + gap * gap;
    }
  return sum;
}

double
quadratic_transform_residual (int k, const std::vector<ComplexVector> &w, double gamma_k, Complex u_k,
                              const NetworkScenario &sc, double extra_interference)
{
  const Complex signal = std::conj (beam_response (k, k, w, sc));  // w_k^H h_k
  const double denom = sc.noise_power + extra_interference + interference (k, w, sc);
  return gamma_k - 2.0 * std::real (std::conj (u_k) * signal) + std::norm (u_k) * denom;
}

Complex
optimal_u (int k, const std::vector<ComplexVector> &w, const NetworkScenario &sc, double extra_interference)
{
  const Complex signal = std::conj (beam_response (k, k, w, sc));
  return signal / (sc.noise_power + extra_interference + interference (k, w, sc));
}

SubproblemScope
SubproblemScope::cloud ()
{
  SubproblemScope s;
  s.kind = ScopeKind::Cloud;
  return s;
}

SubproblemScope
SubproblemScope::edge (int e)
{
  SubproblemScope s;
  s.kind = ScopeKind::Edge;
  s.ec = e;
  return s;
}

int
SubproblemScope::entity () const
{
  switch (kind)
    {
    case ScopeKind::Network: return kWholeNetwork;
    case ScopeKind::Cloud: return kCloud;
    case ScopeKind::Edge: return ec;
    }
  return kWholeNetwork;
}

bool
SubproblemScope::owns (int k, const NetworkScenario &sc) const
{
  if (k < 0 || k >= sc.num_users ())
    return false;
  return kind == ScopeKind::Network || sc.serving[k] == entity ();
}

std::vector<int>
SubproblemScope::resolve_users (const NetworkScenario &sc) const
{
  if (kind == ScopeKind::Edge && (ec < 0 || ec >= sc.num_uav ()))
    throw std::invalid_argument ("scope references a non-existent UAV");
  if (users.empty ())
    {
      std::vector<int> out;
      for (int k = 0; k < sc.num_users (); ++k)
        if (owns (k, sc))
          out.push_back (k);
      return out;
    }
  for (int k : users)
    if (!owns (k, sc))
      throw std::invalid_argument ("scope lists user " + std::to_string (k) + " that its entity does not serve");
  std::vector<int> out (users);
  std::sort (out.begin (), out.end ());
  out.erase (std::unique (out.begin (), out.end ()), out.end ());
  return out;
}

AssembledSubproblem
assemble_subproblem (const SubproblemScope &scope, const VariableState &state, const SurrogateAnchors &anchors,
                     const NetworkScenario &sc, const AssemblyOptions &opts)
{
  state.check_dimensions (sc);
  const std::vector<int> users = scope.resolve_users (sc);
  const int n_users = static_cast<int> (users.size ());
  const int b_count = sc.num_bs ();
  const int lc = sc.bs_antennas ();
  const double sigma = std::sqrt (sc.noise_power);
  const double rate_unit = opts.rate_unit;
  const double cycle_unit = opts.cycle_unit;
  if (scope.fixed_clustering && (scope.active.rows () != b_count || scope.active.cols () != sc.num_users ()))
    throw std::invalid_argument ("fixed clustering needs a B x K activity mask");
  if (!scope.foreign_interference.empty ()
      && static_cast<int> (scope.foreign_interference.size ()) != sc.num_users ())
    throw std::invalid_argument ("foreign interference must have one entry per user");

  AssembledSubproblem out;
  ConvexSubproblem &p = out.problem;
  SubproblemLayout &lay = out.layout;
  lay.users = users;
  lay.units = opts;

  auto link_present = [&] (int b, int k) { return !scope.fixed_clustering || scope.active (b, k); };

  // Variable layout: w | r | f | q | gamma
  int coords = 0;
  for (int k : users)
    {
      const int len = sc.entity_antennas (sc.serving[k]);
      std::vector<int> idx (len, -1);
      for (int j = 0; j < len; ++j)
        if (!sc.is_central (k) || link_present (j / lc, k))
          {
            idx[j] = 2 * coords;
            ++coords;
          }
      lay.w.push_back (std::move (idx));
    }
  const int w_off = p.add_block ("w", 2 * coords);
  const int r_off = p.add_block ("r", n_users);
  const int f_off = p.add_block ("f", n_users);
  int q_count = 0;
  if (!scope.fixed_clustering)
    for (int k : users)
      if (sc.is_central (k))
        q_count += b_count;
  const int q_off = p.add_block ("q", q_count);
  const int g_off = p.add_block ("gamma", n_users);
  for (auto &idx : lay.w)
    for (int &i : idx)
      if (i >= 0)
        i += w_off;
  int next_q = q_off;
  for (int pos = 0; pos < n_users; ++pos)
    {
      const int k = users[pos];
      lay.r.push_back (r_off + pos);
      lay.f.push_back (f_off + pos);
      lay.gamma.push_back (g_off + pos);
      std::vector<int> qi (b_count, -1);
      if (!scope.fixed_clustering && sc.is_central (k))
        for (int b = 0; b < b_count; ++b)
          qi[b] = next_q++;
      lay.q.push_back (std::move (qi));
    }

  p.objective = Eigen::VectorXd::Zero (p.num_variables);
  for (int pos = 0; pos < n_users; ++pos)
    p.objective[lay.r[pos]] = sc.tasks[users[pos]].weight;

  auto hbar = [&] (int k, int entity) -> ComplexVector { return sc.channel (k, entity) / sigma; };

  // Quadratic-transform SINR residuals.
  for (int pos = 0; pos < n_users; ++pos)
    {
      const int k = users[pos];
      const Complex ubar = anchors.u[k] * sigma;
      const double u2 = std::norm (ubar);
      const double foreign = scope.foreign_interference.empty () ? 0.0 : scope.foreign_interference[k];
      Constraint c;
      c.kind = ConstraintKind::ConvexQuadratic;
      c.label = tagged ("sinr_residual", k);
      c.constant = u2 * (1.0 + foreign / sc.noise_power);
      c.linear.add (lay.gamma[pos], 1.0);
      const ComplexVector h_own = hbar (k, sc.serving[k]);
      for (std::size_t j = 0; j < lay.w[pos].size (); ++j)
        {
          const int idx = lay.w[pos][j];
          if (idx < 0)
            continue;
          const Complex a = std::conj (ubar) * h_own[static_cast<Eigen::Index> (j)];
          c.linear.add (idx, -2.0 * a.real ());
          c.linear.add (idx + 1, -2.0 * a.imag ());
        }
      if (u2 > 0.0)
        for (int other = 0; other < n_users; ++other)
          if (other != pos)
            add_response_squares (c, u2, hbar (k, sc.serving[users[other]]), lay.w[other]);
      p.constraints.push_back (std::move (c));
    }

  // Achievable rate through the SINR auxiliary.
  for (int pos = 0; pos < n_users; ++pos)
    {
      Constraint c;
      c.kind = ConstraintKind::LogRate;
      c.label = tagged ("rate", users[pos]);
      c.linear.add (lay.r[pos], 1.0);
      c.logs.push_back ({sc.bandwidth / rate_unit, lay.gamma[pos]});
      p.constraints.push_back (std::move (c));
    }

  bool any_central = false;
  for (int k : users)
    any_central = any_central || sc.is_central (k);

  if (any_central && !scope.fixed_clustering)
    {
      // beta_{b,k} ||w_{b,k}||^2 <= q_{b,k}
      for (int pos = 0; pos < n_users; ++pos)
        {
          const int k = users[pos];
          if (!sc.is_central (k))
            continue;
          for (int b = 0; b < b_count; ++b)
            {
              Constraint c;
              c.kind = ConstraintKind::ConvexQuadratic;
              c.label = tagged ("link_weight", b * sc.num_users () + k);
              add_energy_squares (c, anchors.beta (b, k), lay.w[pos], static_cast<std::size_t> (b * lc), lc);
              c.linear.add (lay.q[pos][b], -1.0);
              p.constraints.push_back (std::move (c));
            }
        }
      // Majorized bilinear fronthaul load, normalized by 4 R_b^max.
      const double cap = 4.0 * sc.fronthaul_capacity / rate_unit;
      for (int b = 0; b < b_count; ++b)
        {
          Constraint c;
          c.kind = ConstraintKind::ConvexQuadratic;
          c.label = tagged ("fronthaul", b);
          c.constant = -1.0;
          for (int pos = 0; pos < n_users; ++pos)
            {
              const int k = users[pos];
              if (!sc.is_central (k))
                continue;
              const double anchor = anchors.q_prev (b, k) - anchors.r_prev[k] / rate_unit;
              SquareTerm sq{1.0 / cap, {}};
              sq.form.add (lay.q[pos][b], 1.0);
              sq.form.add (lay.r[pos], 1.0);
              c.squares.push_back (std::move (sq));
              c.linear.add (lay.q[pos][b], -2.0 * anchor / cap);
              c.linear.add (lay.r[pos], 2.0 * anchor / cap);
              c.constant += anchor * anchor / cap;
            }
          p.constraints.push_back (std::move (c));
        }
    }
  else if (any_central)
    {
      const double cap = sc.fronthaul_capacity / rate_unit;
      for (int b = 0; b < b_count; ++b)
        {
          Constraint c;
          c.kind = ConstraintKind::Linear;
          c.label = tagged ("fronthaul", b);
          c.constant = -1.0;
          for (int pos = 0; pos < n_users; ++pos)
            if (sc.is_central (users[pos]) && scope.active (b, users[pos]))
              c.linear.add (lay.r[pos], 1.0 / cap);
          if (!c.linear.empty ())
            p.constraints.push_back (std::move (c));
        }
    }

  if (any_central)
    for (int b = 0; b < b_count; ++b)
      {
        Constraint c;
        c.kind = ConstraintKind::ConvexQuadratic;
        c.label = tagged ("bs_power", b);
        c.constant = -1.0;
        for (int pos = 0; pos < n_users; ++pos)
          if (sc.is_central (users[pos]))
            add_energy_squares (c, 1.0 / sc.bs_power_max, lay.w[pos], static_cast<std::size_t> (b * lc), lc);
        if (!c.squares.empty ())
          p.constraints.push_back (std::move (c));
      }

  for (int e = 0; e < sc.num_uav (); ++e)
    {
      Constraint c;
      c.kind = ConstraintKind::PowerTerm;
      c.label = tagged ("ec_power", e);
      const double budget = sc.uav_power_max;
      c.constant = (sc.operation_power_in_constraint ? sc.ec_operation_power : 0.0) / budget - 1.0;
      PowerSumTerm compute{sc.cpu_s * std::pow (cycle_unit, sc.cpu_mu) / budget, sc.cpu_mu, {}};
      for (int pos = 0; pos < n_users; ++pos)
        if (sc.serving[users[pos]] == e)
          {
            add_energy_squares (c, 1.0 / budget, lay.w[pos], 0, lay.w[pos].size ());
            compute.index.push_back (lay.f[pos]);
          }
      if (compute.index.empty ())
        continue;
      c.powers.push_back (std::move (compute));
      p.constraints.push_back (std::move (c));
    }

  if (any_central)
    {
      Constraint c;
      c.kind = ConstraintKind::Linear;
      c.label = "cloud_capacity";
      c.constant = -1.0;
      for (int pos = 0; pos < n_users; ++pos)
        if (sc.is_central (users[pos]))
          c.linear.add (lay.f[pos], cycle_unit / sc.cc_capacity);
      p.constraints.push_back (std::move (c));
    }
  for (int e = 0; e < sc.num_uav (); ++e)
    {
      Constraint c;
      c.kind = ConstraintKind::Linear;
      c.label = tagged ("ec_capacity", e);
      c.constant = -1.0;
      for (int pos = 0; pos < n_users; ++pos)
        if (sc.serving[users[pos]] == e)
          c.linear.add (lay.f[pos], cycle_unit / sc.ec_capacity);
      if (!c.linear.empty ())
        p.constraints.push_back (std::move (c));
    }

  // F/f + D/r <= t - Lambda (cloud) or t (edge), normalized by the right-hand side.
  for (int pos = 0; pos < n_users; ++pos)
    {
      const int k = users[pos];
      const TaskParams &task = sc.tasks[k];
      const double limit = task.max_delay_s - (sc.is_central (k) ? task.fronthaul_delay_s : 0.0);
      const double norm = limit > 0.0 ? 1.0 / limit : 1.0;
      Constraint c;
      c.kind = ConstraintKind::Hyperbolic;
      c.label = tagged ("delay", k);
      c.constant = limit > 0.0 ? -1.0 : -limit;
      c.reciprocals.push_back ({task.cycles / cycle_unit * norm, lay.f[pos]});
      c.reciprocals.push_back ({task.data_bits / rate_unit * norm, lay.r[pos]});
      p.constraints.push_back (std::move (c));
    }

  for (int pos = 0; pos < n_users; ++pos)
    {
      const int k = users[pos];
      p.constraints.push_back (lower_bound (lay.r[pos], opts.r_floor / rate_unit, tagged ("r_floor", k)));
      p.constraints.push_back (lower_bound (lay.f[pos], opts.f_floor / cycle_unit, tagged ("f_floor", k)));
      p.constraints.push_back (lower_bound (lay.gamma[pos], 0.0, tagged ("gamma_floor", k)));
      for (int b = 0; b < b_count; ++b)
        if (lay.q[pos][b] >= 0)
          p.constraints.push_back (lower_bound (lay.q[pos][b], 0.0, tagged ("q_floor", b * sc.num_users () + k)));
    }

  p.initial_point = pack (lay, state, sc);
  return out;
}

Eigen::VectorXd
pack (const SubproblemLayout &lay, const VariableState &state, const NetworkScenario &sc)
{
  int n = 0;
  for (std::size_t pos = 0; pos < lay.users.size (); ++pos)
    {
      for (int i : lay.w[pos])
        n = std::max (n, i + 2);
      n = std::max ({n, lay.r[pos] + 1, lay.f[pos] + 1, lay.gamma[pos] + 1});
      for (int i : lay.q[pos])
        n = std::max (n, i + 1);
    }
  Eigen::VectorXd x = Eigen::VectorXd::Zero (n);
  for (std::size_t pos = 0; pos < lay.users.size (); ++pos)
    {
      const int k = lay.users[pos];
      for (std::size_t j = 0; j < lay.w[pos].size (); ++j)
        if (const int idx = lay.w[pos][j]; idx >= 0)
          {
            x[idx] = state.w[k][static_cast<Eigen::Index> (j)].real ();
            x[idx + 1] = state.w[k][static_cast<Eigen::Index> (j)].imag ();
          }
      x[lay.r[pos]] = state.r[k] / lay.units.rate_unit;
      x[lay.f[pos]] = state.f[k] / lay.units.cycle_unit;
      x[lay.gamma[pos]] = state.gamma[k];
      for (int b = 0; b < sc.num_bs (); ++b)
        if (lay.q[pos][b] >= 0)
          x[lay.q[pos][b]] = state.q (b, k);
    }
  return x;
}

void
write_back (const SubproblemLayout &lay, const Eigen::VectorXd &x, const NetworkScenario &sc, VariableState &state)
{
  for (std::size_t pos = 0; pos < lay.users.size (); ++pos)
    {
      const int k = lay.users[pos];
      for (std::size_t j = 0; j < lay.w[pos].size (); ++j)
        {
          const int idx = lay.w[pos][j];
          state.w[k][static_cast<Eigen::Index> (j)] = idx >= 0 ? Complex (x[idx], x[idx + 1]) : Complex (0.0, 0.0);
        }
      state.r[k] = x[lay.r[pos]] * lay.units.rate_unit;
      state.f[k] = x[lay.f[pos]] * lay.units.cycle_unit;
      state.gamma[k] = x[lay.gamma[pos]];
      for (int b = 0; b < sc.num_bs (); ++b)
        state.q (b, k) = lay.q[pos][b] >= 0 ? x[lay.q[pos][b]] : 0.0;
    }
}

VariableState
initialize_state (const NetworkScenario &sc, std::uint64_t seed, double delta)
{
  sc.validate ();
  VariableState s = VariableState::zeros (sc);
  Rng rng (seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal (0.0, 1.0);
  const int lc = sc.bs_antennas ();
  const int k_count = sc.num_users ();

  for (int k = 0; k < k_count; ++k)
    for (Eigen::Index j = 0; j < s.w[k].size (); ++j)
      {
        const double re = normal (rng);
        const double im = normal (rng);
        s.w[k][j] = Complex (re, im);
      }

  // Each BS transmits at half its budget.
  for (int b = 0; b < sc.num_bs (); ++b)
    {
      double used = 0.0;
      for (int k = 0; k < k_count; ++k)
        if (sc.is_central (k))
          used += s.w[k].segment (b * lc, lc).squaredNorm ();
      if (used > 0.0)
        {
          const double scale = std::sqrt (0.5 * sc.bs_power_max / used);
          for (int k = 0; k < k_count; ++k)
            if (sc.is_central (k))
              s.w[k].segment (b * lc, lc) *= scale;
        }
    }

  const std::vector<int> cloud_users = sc.users_of (kCloud);
  for (int k : cloud_users)
    s.f[k] = 0.9 * sc.cc_capacity / static_cast<double> (cloud_users.size ());

  // Each UAV spends at most half of its available power on computing and half
  // of the remainder on transmission.
  for (int e = 0; e < sc.num_uav (); ++e)
    {
      const std::vector<int> mine = sc.users_of (e);
      if (mine.empty ())
        continue;
      const double available
          = sc.uav_power_max - (sc.operation_power_in_constraint ? sc.ec_operation_power : 0.0);
      double cycles = 0.9 * sc.ec_capacity;
      if (sc.cpu_s > 0.0 && available > 0.0)
        cycles = std::min (cycles, std::pow (0.5 * available / sc.cpu_s, 1.0 / sc.cpu_mu));
      const double compute_power = sc.cpu_s * std::pow (cycles, sc.cpu_mu);
      const double transmit = 0.5 * std::max (available - compute_power, 0.0);
      double used = 0.0;
      for (int k : mine)
        {
          s.f[k] = cycles / static_cast<double> (mine.size ());
          used += s.w[k].squaredNorm ();
        }
      const double scale = used > 0.0 ? std::sqrt (transmit / used) : 0.0;
      for (int k : mine)
        s.w[k] *= scale;
    }

  for (int k = 0; k < k_count; ++k)
    {
      s.gamma[k] = 0.9 * sinr (k, s, sc);
      s.r[k] = 0.9 * sc.bandwidth * std::log2 (1.0 + s.gamma[k]);
      s.u[k] = optimal_u (k, s.w, sc);
    }
  s.beta = update_weights (s.w, sc, delta);
  for (int k = 0; k < k_count; ++k)
    for (int b = 0; b < sc.num_bs (); ++b)
      s.q (b, k) = sc.is_central (k) ? s.beta (b, k) * link_power (b, k, s, sc) : 0.0;
  s.q_prev = s.q;
  s.r_prev = s.r;
  return s;
}

}  // namespace hcmec
