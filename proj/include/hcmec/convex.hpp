#pragma once

// Smooth convex constraint system over a real variable vector.
//
// Every constraint has the form  constant + linear . x + sum of convex terms <= 0
// where the terms are weighted squares of linear forms, powers of sums,
// negated log-rates and reciprocals. This covers all constraint kinds that
// appear in the per-iteration resource-allocation subproblem.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hcmec {

enum class ConstraintKind
{
  Linear,
  ConvexQuadratic,
  PowerTerm,
  LogRate,
  Hyperbolic,
};

const char *to_string (ConstraintKind kind);

struct SparseForm
{
  std::vector<int> index;
  std::vector<double> coef;

  void add (int i, double c);
  bool empty () const { return index.empty (); }
  double dot (const Eigen::VectorXd &x) const;
};

/// weight * (form . x)^2 with weight >= 0.
struct SquareTerm
{
  double weight = 1.0;
  SparseForm form;
};

/// scale * (sum_i x_i)^exponent with exponent >= 1; defined for a non-negative sum.
struct PowerSumTerm
{
  double scale = 1.0;
  double exponent = 1.0;
  std::vector<int> index;
};

/// -scale * log2(1 + x_index); defined for x_index > -1.
struct LogRateTerm
{
  double scale = 1.0;
  int index = 0;
};

/// numerator / x_index with numerator >= 0; defined for x_index > 0.
struct ReciprocalTerm
{
  double numerator = 0.0;
  int index = 0;
};

struct Constraint
{
  ConstraintKind kind = ConstraintKind::Linear;
  std::string label;
  double constant = 0.0;
  SparseForm linear;
  std::vector<SquareTerm> squares;
  std::vector<PowerSumTerm> powers;
  std::vector<LogRateTerm> logs;
  std::vector<ReciprocalTerm> reciprocals;
  /// Simple variable bound that keeps the remaining terms inside their
  /// domain. Never relaxed during the feasibility phase.
  bool domain_bound = false;

  /// +infinity outside the domain of any term.
  double value (const Eigen::VectorXd &x) const;
  /// grad += scale * nabla g(x)
  void add_gradient (const Eigen::VectorXd &x, double scale, Eigen::VectorXd &grad) const;
  /// hess += scale * nabla^2 g(x)
  void add_hessian (const Eigen::VectorXd &x, double scale, Eigen::MatrixXd &hess) const;
  /// Sorted, de-duplicated variable indices this constraint depends on.
  std::vector<int> support () const;
  int max_index () const;
};

/// lower - x_i <= 0, flagged as a domain bound.
Constraint lower_bound (int index, double lower, std::string label);

struct VariableBlock
{
  std::string name;
  int offset = 0;
  int size = 0;
};

/// Maximize objective . x subject to every constraint <= 0.
struct ConvexSubproblem
{
  int num_variables = 0;
  std::vector<VariableBlock> blocks;
  Eigen::VectorXd objective;
  std::vector<Constraint> constraints;
  /// Starting guess; need not be strictly feasible.
  Eigen::VectorXd initial_point;

  /// Appends a named block and returns its offset.
  int add_block (const std::string &name, int size);
  const VariableBlock *block (const std::string &name) const;
  /// Real degrees of freedom with every complex pair in the "w" block counted once.
  int complex_dof_count () const;

  /// Throws std::invalid_argument on out-of-range indices or non-convex terms.
  void validate () const;
  /// max(0, max_i g_i(x)).
  double max_violation (const Eigen::VectorXd &x) const;
};

}  // namespace hcmec
