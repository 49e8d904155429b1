#include "hcmec/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hcmec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity ();

double
power_sum (const PowerSumTerm &p, const Eigen::VectorXd &x)
{
  double s = 0.0;
  for (int i : p.index)
    s += x[i];
  return s;
}

}  // namespace

const char *
to_string (ConstraintKind kind)
{
  switch (kind)
    {
    case ConstraintKind::Linear: return "linear";
    case ConstraintKind::ConvexQuadratic: return "convex-quadratic";
    case ConstraintKind::PowerTerm: return "power-term";
    case ConstraintKind::LogRate: return "log-rate";
    case ConstraintKind::Hyperbolic: return "hyperbolic";
    }
  return "unknown";
}

void
SparseForm::add (int i, double c)
{
  index.push_back (i);
  coef.push_back (c);
}

double
SparseForm::dot (const Eigen::VectorXd &x) const
{
  double s = 0.0;
  for (std::size_t j = 0; j < index.size (); ++j)
    s += coef[j] * x[index[j]];
  return s;
}

double
Constraint::value (const Eigen::VectorXd &x) const
{
  double v = constant + linear.dot (x);
  for (const auto &sq : squares)
    {
      const double a = sq.form.dot (x);
      v += sq.weight * a * a;
    }
  for (const auto &p : powers)
    {
      const double s = power_sum (p, x);
      if (s < 0.0)
        return kInf;
      v += p.scale * std::pow (s, p.exponent);
    }
  for (const auto &l : logs)
    {
      const double y = x[l.index];
      if (!(y > -1.0))
        return kInf;
      v -= l.scale * std::log2 (1.0 + y);
    }
  for (const auto &rc : reciprocals)
    {
      const double y = x[rc.index];
      if (!(y > 0.0))
        return kInf;
      v += rc.numerator / y;
    }
  return std::isnan (v) ? kInf : v;
}

void
Constraint::add_gradient (const Eigen::VectorXd &x, double scale, Eigen::VectorXd &grad) const
{
  for (std::size_t j = 0; j < linear.index.size (); ++j)
    grad[linear.index[j]] += scale * linear.coef[j];
  for (const auto &sq : squares)
    {
      const double factor = scale * 2.0 * sq.weight * sq.form.dot (x);
      for (std::size_t j = 0; j < sq.form.index.size (); ++j)
        grad[sq.form.index[j]] += factor * sq.form.coef[j];
    }
  for (const auto &p : powers)
    {
      const double s = power_sum (p, x);
      const double d = scale * p.scale * p.exponent * std::pow (s, p.exponent - 1.0);
      for (int i : p.index)
        grad[i] += d;
    }
  for (const auto &l : logs)
    grad[l.index] -= scale * l.scale / ((1.0 + x[l.index]) * std::numbers::ln2);
  for (const auto &rc : reciprocals)
    grad[rc.index] -= scale * rc.numerator / (x[rc.index] * x[rc.index]);
}

void
Constraint::add_hessian (const Eigen::VectorXd &x, double scale, Eigen::MatrixXd &hess) const
{
  for (const auto &sq : squares)
    {
      const auto &idx = sq.form.index;
      const auto &c = sq.form.coef;
      const double w = scale * 2.0 * sq.weight;
      for (std::size_t a = 0; a < idx.size (); ++a)
        {
          const double ca = w * c[a];
          for (std::size_t b = 0; b < idx.size (); ++b)
            hess (idx[a], idx[b]) += ca * c[b];
        }
    }
  for (const auto &p : powers)
    {
      if (p.exponent == 1.0)
        continue;
      const double s = power_sum (p, x);
      const double d = scale * p.scale * p.exponent * (p.exponent - 1.0) * std::pow (s, p.exponent - 2.0);
      for (int i : p.index)
        for (int j : p.index)
          hess (i, j) += d;
    }
  for (const auto &l : logs)
    {
      const double y = 1.0 + x[l.index];
      hess (l.index, l.index) += scale * l.scale / (y * y * std::numbers::ln2);
    }
  for (const auto &rc : reciprocals)
    {
      const double y = x[rc.index];
      hess (rc.index, rc.index) += scale * 2.0 * rc.numerator / (y * y * y);
    }
}

std::vector<int>
Constraint::support () const
{
  std::vector<int> out (linear.index);
  for (const auto &sq : squares)
    out.insert (out.end (), sq.form.index.begin (), sq.form.index.end ());
  for (const auto &p : powers)
    out.insert (out.end (), p.index.begin (), p.index.end ());
  for (const auto &l : logs)
    out.push_back (l.index);
  for (const auto &rc : reciprocals)
    out.push_back (rc.index);
  std::sort (out.begin (), out.end ());
  out.erase (std::unique (out.begin (), out.end ()), out.end ());
  return out;
}

int
Constraint::max_index () const
{
  const auto s = support ();
  return s.empty () ? -1 : s.back ();
}

Constraint
lower_bound (int index, double lower, std::string label)
{
  Constraint c;
  c.kind = ConstraintKind::Linear;
  c.label = std::move (label);
  c.constant = lower;
  c.linear.add (index, -1.0);
  c.domain_bound = true;
  return c;
}

int
ConvexSubproblem::add_block (const std::string &name, int size)
{
  const int offset = num_variables;
  blocks.push_back ({name, offset, size});
  num_variables += size;
  return offset;
}

const VariableBlock *
ConvexSubproblem::block (const std::string &name) const
{
  for (const auto &b : blocks)
    if (b.name == name)
      return &b;
  return nullptr;
}

int
ConvexSubproblem::complex_dof_count () const
{
  const VariableBlock *w = block ("w");
  return num_variables - (w ? w->size / 2 : 0);
}

void
ConvexSubproblem::validate () const
{
  if (objective.size () != num_variables)
    throw std::invalid_argument ("objective length differs from the variable count");
  if (initial_point.size () != num_variables)
    throw std::invalid_argument ("initial point length differs from the variable count");
  for (const auto &c : constraints)
    {
      if (c.max_index () >= num_variables)
        throw std::invalid_argument ("constraint '" + c.label + "' references an undeclared variable");
      for (const auto &sq : c.squares)
        if (sq.weight < 0.0)
          throw std::invalid_argument ("constraint '" + c.label + "' has a negative square weight");
      for (const auto &p : c.powers)
        if (p.exponent < 1.0 || p.scale < 0.0)
          throw std::invalid_argument ("constraint '" + c.label + "' has a non-convex power term");
      for (const auto &l : c.logs)
        if (l.scale < 0.0)
          throw std::invalid_argument ("constraint '" + c.label + "' has a non-convex log term");
      for (const auto &rc : c.reciprocals)
        if (rc.numerator < 0.0)
          throw std::invalid_argument ("constraint '" + c.label + "' has a non-convex reciprocal term");
    }
}

double
ConvexSubproblem::max_violation (const Eigen::VectorXd &x) const
{
  double worst = 0.0;
  for (const auto &c : constraints)
    worst = std::max (worst, c.value (x));
  return worst;
}

}  // namespace hcmec
