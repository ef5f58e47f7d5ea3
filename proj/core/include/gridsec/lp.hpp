#pragma once

#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace gridsec::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { minimize, maximize };
enum class RowType { less_equal, equal, greater_equal };
enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(SolveStatus s);

/// Sparse row coefficients as (variable index, value) pairs.
using RowCoeffs = std::vector<std::pair<int, double>>;

/// A bounded-variable linear program.  Rows are stored internally as
/// two-sided activity ranges, so `a·x <= b`, `a·x = b`, `a·x >= b` and
/// `lo <= a·x <= hi` all share one representation.
class LinearProgram {
 public:
  int add_variable(std::string name, double lower, double upper, double obj_coeff = 0.0);
  int add_constraint(std::string name, RowType type, double rhs, RowCoeffs coeffs);
  int add_range(std::string name, double lo, double hi, RowCoeffs coeffs);

  void set_objective(int var, double coeff);
  void set_sense(Sense s) { sense_ = s; }
  Sense sense() const { return sense_; }

  int num_variables() const { return static_cast<int>(obj_.size()); }
  int num_constraints() const { return static_cast<int>(row_lo_.size()); }

  double lower(int v) const { return lo_[v]; }
  double upper(int v) const { return up_[v]; }
  double objective_coeff(int v) const { return obj_[v]; }
  double row_lower(int r) const { return row_lo_[r]; }
  double row_upper(int r) const { return row_up_[r]; }
  const RowCoeffs& row(int r) const { return rows_[r]; }
  const std::string& variable_name(int v) const { return var_names_[v]; }
  const std::string& row_name(int r) const { return row_names_[r]; }

 private:
  std::vector<double> lo_, up_, obj_;
  std::vector<std::string> var_names_;
  std::vector<RowCoeffs> rows_;
  std::vector<double> row_lo_, row_up_;
  std::vector<std::string> row_names_;
  Sense sense_ = Sense::minimize;
};

struct RowActivity {
  double activity = 0.0;
  bool binding = false;
};

struct LpSolution {
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<RowActivity> rows;
  /// Basic column per row in the solver's extended column space
  /// (user variables first, then one slack per row).  Recorded so
  /// reruns of identical inputs can be checked basis-for-basis.
  std::vector<int> basis;
  int iterations = 0;
};

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  /// Consecutive non-improving pivots before switching to Bland's rule.
  int stall_limit = 100;
  int max_iterations = 0;  // 0: derived from problem size
};

/// Deterministic dense bounded-variable simplex (two phases).
/// Dantzig pricing with lowest-index tie breaks; falls back to Bland's
/// rule after `stall_limit` degenerate pivots so cycling cannot occur.
LpSolution solve(const LinearProgram& lp, const SolverOptions& options = {});

/// Fixed-format MPS export, for debugging against external solvers.
void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name = "GRIDSEC");

}  // namespace gridsec::lp
