#include "gridsec/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace gridsec::lp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

void check_finite(double v, const char* what) {
  if (std::isnan(v)) throw std::invalid_argument(std::string(what) + " is NaN");
}

}  // namespace

int LinearProgram::add_variable(std::string name, double lower, double upper, double obj_coeff) {
  check_finite(lower, "variable lower bound");
  check_finite(upper, "variable upper bound");
  check_finite(obj_coeff, "objective coefficient");
  if (lower > upper) {
    throw std::invalid_argument("variable '" + name + "': lower bound " + std::to_string(lower) +
                                " exceeds upper bound " + std::to_string(upper));
  }
  lo_.push_back(lower);
  up_.push_back(upper);
  obj_.push_back(obj_coeff);
  var_names_.push_back(std::move(name));
  return num_variables() - 1;
}

int LinearProgram::add_range(std::string name, double lo, double hi, RowCoeffs coeffs) {
  check_finite(lo, "row lower bound");
  check_finite(hi, "row upper bound");
  if (lo > hi) {
    throw std::invalid_argument("row '" + name + "': lower bound exceeds upper bound");
  }
  for (const auto& [v, c] : coeffs) {
    if (v < 0 || v >= num_variables()) {
      throw std::invalid_argument("row '" + name + "' references undeclared variable " +
                                  std::to_string(v));
    }
    if (!std::isfinite(c)) {
      throw std::invalid_argument("row '" + name + "' has non-finite coefficient");
    }
  }
  rows_.push_back(std::move(coeffs));
  row_lo_.push_back(lo);
  row_up_.push_back(hi);
  row_names_.push_back(std::move(name));
  return num_constraints() - 1;
}

int LinearProgram::add_constraint(std::string name, RowType type, double rhs, RowCoeffs coeffs) {
  check_finite(rhs, "row rhs");
  switch (type) {
    case RowType::less_equal: return add_range(std::move(name), -kInf, rhs, std::move(coeffs));
    case RowType::equal: return add_range(std::move(name), rhs, rhs, std::move(coeffs));
    case RowType::greater_equal: return add_range(std::move(name), rhs, kInf, std::move(coeffs));
  }
  throw std::invalid_argument("bad row type");
}

void LinearProgram::set_objective(int var, double coeff) {
  check_finite(coeff, "objective coefficient");
  obj_.at(var) = coeff;
}

namespace {

enum class ColStatus : unsigned char { basic, at_lower, at_upper, free_nb };

// Dense bounded-variable two-phase simplex.  Column space: user variables
// [0,n), one slack per row [n,n+m), one artificial per row [n+m,n+2m).
// Every row j is scaled by sigma_j so the initial basis matrix is the
// identity; the invariant T = B^-1 * A holds across pivots.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SolverOptions& opt) : lp_(lp), opt_(opt) {
    n_ = lp.num_variables();
    m_ = lp.num_constraints();
    ncols_ = n_ + 2 * m_;
    minimize_ = lp.sense() == Sense::minimize;

    lo_.resize(ncols_);
    up_.resize(ncols_);
    cost_.assign(ncols_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp.lower(j);
      up_[j] = lp.upper(j);
      cost_[j] = minimize_ ? lp.objective_coeff(j) : -lp.objective_coeff(j);
    }
    for (int r = 0; r < m_; ++r) {
      lo_[n_ + r] = lp.row_lower(r);
      up_[n_ + r] = lp.row_upper(r);
      lo_[n_ + m_ + r] = 0.0;
      up_[n_ + m_ + r] = kInf;
    }

    max_iters_ = opt.max_iterations > 0 ? opt.max_iterations : 10000 + 100 * (n_ + m_);
  }

  LpSolution run() {
    init_tableau();
    LpSolution sol;

    if (!phase(/*phase1=*/true, sol)) return sol;
    double infeas = current_objective(phase1_cost_);
    if (infeas > std::max(opt_.feasibility_tol, opt_.feasibility_tol * scale_)) {
      sol.status = SolveStatus::infeasible;
      finalize(sol);
      return sol;
    }
    seal_artificials();

    if (!phase(/*phase1=*/false, sol)) {
      finalize(sol);
      return sol;
    }
    sol.status = SolveStatus::optimal;
    finalize(sol);
    return sol;
  }

 private:
  const LinearProgram& lp_;
  SolverOptions opt_;
  int n_ = 0, m_ = 0, ncols_ = 0;
  bool minimize_ = true;
  long max_iters_ = 0;

  std::vector<double> lo_, up_, cost_, phase1_cost_;
  std::vector<double> tableau_;  // m_ x ncols_, row-major
  std::vector<double> xb_;       // basic variable values per row
  std::vector<int> basis_;       // basic column per row
  std::vector<int> row_of_;      // column -> row index or -1
  std::vector<ColStatus> status_;
  std::vector<double> redcost_;
  double scale_ = 1.0;
  long iters_ = 0;

  double& T(int r, int c) { return tableau_[static_cast<size_t>(r) * ncols_ + c]; }

  double nonbasic_value(int j) const {
    switch (status_[j]) {
      case ColStatus::at_lower: return lo_[j];
      case ColStatus::at_upper: return up_[j];
      default: return 0.0;
    }
  }

  double column_value(int j) const {
    return status_[j] == ColStatus::basic ? xb_[row_of_[j]] : nonbasic_value(j);
  }

  void init_tableau() {
    tableau_.assign(static_cast<size_t>(m_) * ncols_, 0.0);
    status_.assign(ncols_, ColStatus::at_lower);
    row_of_.assign(ncols_, -1);
    basis_.assign(m_, -1);
    xb_.assign(m_, 0.0);
    phase1_cost_.assign(ncols_, 0.0);

    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j]) && std::isfinite(up_[j])) {
        status_[j] = (std::abs(lo_[j]) <= std::abs(up_[j])) ? ColStatus::at_lower : ColStatus::at_upper;
      } else if (std::isfinite(lo_[j])) {
        status_[j] = ColStatus::at_lower;
      } else if (std::isfinite(up_[j])) {
        status_[j] = ColStatus::at_upper;
      } else {
        status_[j] = ColStatus::free_nb;
      }
      scale_ = std::max(scale_, std::abs(nonbasic_value(j)));
    }

    for (int r = 0; r < m_; ++r) {
      double act = 0.0;
      for (const auto& [v, c] : lp_.row(r)) act += c * nonbasic_value(v);
      scale_ = std::max(scale_, std::abs(act));

      const double rl = lo_[n_ + r], ru = up_[n_ + r];
      double sigma;
      if (act > ru) {
        status_[n_ + r] = ColStatus::at_upper;
        sigma = -1.0;
      } else if (act < rl) {
        status_[n_ + r] = ColStatus::at_lower;
        sigma = 1.0;
      } else {
        sigma = -1.0;  // slack starts basic at the row activity
      }

      for (const auto& [v, c] : lp_.row(r)) T(r, v) += sigma * c;
      T(r, n_ + r) = -sigma;
      T(r, n_ + m_ + r) = 1.0;

      if (act > ru || act < rl) {
        basis_[r] = n_ + m_ + r;
        xb_[r] = act > ru ? act - ru : rl - act;
        status_[n_ + m_ + r] = ColStatus::basic;
        phase1_cost_[n_ + m_ + r] = 1.0;
      } else {
        basis_[r] = n_ + r;
        xb_[r] = act;
        status_[n_ + r] = ColStatus::basic;
        // unused artificial; pin it so it can never enter
        lo_[n_ + m_ + r] = up_[n_ + m_ + r] = 0.0;
      }
      row_of_[basis_[r]] = r;
    }
  }

  void recompute_basic_values() {
    std::fill(xb_.begin(), xb_.end(), 0.0);
    for (int j = 0; j < ncols_; ++j) {
      if (status_[j] == ColStatus::basic) continue;
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      for (int r = 0; r < m_; ++r) xb_[r] -= T(r, j) * v;
    }
  }

  void compute_reduced_costs(const std::vector<double>& c) {
    redcost_ = c;
    for (int r = 0; r < m_; ++r) {
      const double cb = c[basis_[r]];
      if (cb == 0.0) continue;
      for (int j = 0; j < ncols_; ++j) redcost_[j] -= cb * T(r, j);
    }
  }

  double current_objective(const std::vector<double>& c) const {
    double z = 0.0;
    for (int j = 0; j < ncols_; ++j) {
      if (c[j] != 0.0) z += c[j] * column_value(j);
    }
    return z;
  }

  void seal_artificials() {
    // Try to drive any basic artificial out on a degenerate pivot; a row
    // whose non-artificial entries are all zero is redundant and keeps its
    // artificial pinned at zero.
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_ + m_) continue;
      int piv = -1;
      for (int j = 0; j < n_ + m_; ++j) {
        if (status_[j] == ColStatus::basic) continue;
        if (lo_[j] == up_[j]) continue;
        if (std::abs(T(r, j)) > 1e-7) {
          piv = j;
          break;
        }
      }
      if (piv >= 0) pivot(r, piv, nonbasic_value(piv));
    }
    for (int a = n_ + m_; a < ncols_; ++a) {
      if (status_[a] != ColStatus::basic) lo_[a] = up_[a] = 0.0;
    }
  }

  // Returns false and fills sol.status when the phase aborts
  // (unbounded / iteration limit); true when the phase reaches optimality.
  bool phase(bool phase1, LpSolution& sol) {
    const std::vector<double>& c = phase1 ? phase1_cost_ : cost_;
    recompute_basic_values();
    compute_reduced_costs(c);

    bool bland = false;
    int stall = 0;
    double best_obj = current_objective(c);

    while (true) {
      if (++iters_ > max_iters_) {
        sol.status = SolveStatus::iteration_limit;
        sol.iterations = static_cast<int>(iters_);
        return false;
      }

      const int q = price(bland, phase1);
      if (q < 0) {
        sol.iterations = static_cast<int>(iters_);
        return true;  // phase optimal
      }
      const int dir = entering_direction(q);

      // Ratio test: smallest step that puts a basic variable at a bound or
      // the entering variable at its opposite bound.
      double best_step = kInf;
      int leave_row = -1;
      double leave_bound = 0.0;
      if (std::isfinite(lo_[q]) && std::isfinite(up_[q])) {
        best_step = up_[q] - lo_[q];
      }
      for (int r = 0; r < m_; ++r) {
        const double rate = -T(r, q) * dir;
        if (std::abs(rate) <= 1e-11) continue;
        const int b = basis_[r];
        const double target = rate > 0 ? up_[b] : lo_[b];
        if (!std::isfinite(target)) continue;
        double step = (target - xb_[r]) / rate;
        if (step < 0.0) step = 0.0;  // basic already at / past its bound
        if (step < best_step - 1e-12 ||
            (step < best_step + 1e-12 && leave_row >= 0 && b < basis_[leave_row])) {
          best_step = step;
          leave_row = r;
          leave_bound = target;
        }
      }

      if (!std::isfinite(best_step)) {
        sol.status = phase1 ? SolveStatus::iteration_limit : SolveStatus::unbounded;
        sol.iterations = static_cast<int>(iters_);
        return false;
      }

      if (leave_row < 0) {
        bound_flip(q, dir, best_step);
      } else {
        apply_step(q, dir, best_step, leave_row);
        pivot(leave_row, q, nonbasic_value(q) + dir * best_step, leave_bound);
      }

      const double obj = current_objective(c);
      if (obj < best_obj - std::max(1e-12, 1e-12 * std::abs(best_obj))) {
        best_obj = obj;
        stall = 0;
        bland = false;
      } else if (++stall > opt_.stall_limit) {
        bland = true;
      }
    }
  }

  int price(bool bland, bool phase1) {
    const int limit = phase1 ? ncols_ : n_ + m_;
    int best = -1;
    double best_mag = opt_.optimality_tol;
    for (int j = 0; j < limit; ++j) {
      if (status_[j] == ColStatus::basic || lo_[j] == up_[j]) continue;
      const double d = redcost_[j];
      bool eligible = false;
      switch (status_[j]) {
        case ColStatus::at_lower: eligible = d < -opt_.optimality_tol; break;
        case ColStatus::at_upper: eligible = d > opt_.optimality_tol; break;
        case ColStatus::free_nb: eligible = std::abs(d) > opt_.optimality_tol; break;
        default: break;
      }
      if (!eligible) continue;
      if (bland) return j;
      if (std::abs(d) > best_mag) {
        best_mag = std::abs(d);
        best = j;
      }
    }
    return best;
  }

  int entering_direction(int q) const {
    switch (status_[q]) {
      case ColStatus::at_lower: return +1;
      case ColStatus::at_upper: return -1;
      case ColStatus::free_nb: return redcost_[q] < 0 ? +1 : -1;
      default: return +1;
    }
  }

  void bound_flip(int q, int dir, double step) {
    if (step != 0.0) {
      for (int r = 0; r < m_; ++r) xb_[r] -= T(r, q) * dir * step;
    }
    status_[q] = dir > 0 ? ColStatus::at_upper : ColStatus::at_lower;
  }

  void apply_step(int q, int dir, double step, int leave_row) {
    if (step != 0.0) {
      for (int r = 0; r < m_; ++r) {
        if (r != leave_row) xb_[r] -= T(r, q) * dir * step;
      }
    }
  }

  void pivot(int r, int q, double entering_value, double leaving_value = 0.0) {
    const int leaving = basis_[r];
    const double piv = T(r, q);

    double* rowr = &tableau_[static_cast<size_t>(r) * ncols_];
    const double inv = 1.0 / piv;
    for (int j = 0; j < ncols_; ++j) rowr[j] *= inv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* rowi = &tableau_[static_cast<size_t>(i) * ncols_];
      const double f = rowi[q];
      if (f == 0.0) continue;
      for (int j = 0; j < ncols_; ++j) rowi[j] -= f * rowr[j];
      rowi[q] = 0.0;
    }
    const double cf = redcost_[q];
    if (cf != 0.0) {
      for (int j = 0; j < ncols_; ++j) redcost_[j] -= cf * rowr[j];
      redcost_[q] = 0.0;
    }

    basis_[r] = q;
    row_of_[q] = r;
    row_of_[leaving] = -1;
    status_[q] = ColStatus::basic;
    xb_[r] = entering_value;

    if (leaving >= n_ + m_) {
      // artificial leaves: pin it out of the problem for good
      lo_[leaving] = up_[leaving] = 0.0;
      status_[leaving] = ColStatus::at_lower;
    } else if (std::isfinite(leaving_value) && leaving_value == up_[leaving]) {
      status_[leaving] = ColStatus::at_upper;
    } else {
      status_[leaving] = ColStatus::at_lower;
    }
  }

  void finalize(LpSolution& sol) {
    if (sol.status == SolveStatus::optimal) recompute_basic_values();
    sol.x.resize(n_);
    for (int j = 0; j < n_; ++j) sol.x[j] = column_value(j);

    sol.rows.resize(m_);
    for (int r = 0; r < m_; ++r) {
      double act = 0.0;
      for (const auto& [v, c] : lp_.row(r)) act += c * sol.x[v];
      sol.rows[r].activity = act;
      const double bl = lp_.row_lower(r), bu = lp_.row_upper(r);
      sol.rows[r].binding = (std::isfinite(bl) && std::abs(act - bl) <= 1e-7) ||
                            (std::isfinite(bu) && std::abs(act - bu) <= 1e-7);
    }
    sol.basis = basis_;
    sol.iterations = static_cast<int>(iters_);

    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += lp_.objective_coeff(j) * sol.x[j];
    sol.objective = obj;
  }
};

}  // namespace

LpSolution solve(const LinearProgram& lp, const SolverOptions& options) {
  Simplex s(lp, options);
  return s.run();
}

namespace {

std::string mps_name(const std::string& base, const char* prefix, int index) {
  std::string s;
  for (char ch : base) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') s += ch;
    if (s.size() >= 8) break;
  }
  if (s.empty()) s = prefix + std::to_string(index);
  return s;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name) {
  const int n = lp.num_variables();
  const int m = lp.num_constraints();

  std::vector<std::string> rn(m), cn(n);
  for (int r = 0; r < m; ++r) rn[r] = mps_name(lp.row_name(r), "R", r);
  for (int c = 0; c < n; ++c) cn[c] = mps_name(lp.variable_name(c), "C", c);

  out << "NAME          " << name << "\n";
  if (lp.sense() == Sense::maximize) out << "OBJSENSE\n    MAX\n";
  out << "ROWS\n N  OBJ\n";
  for (int r = 0; r < m; ++r) {
    const double bl = lp.row_lower(r), bu = lp.row_upper(r);
    char t = 'L';
    if (bl == bu) t = 'E';
    else if (std::isfinite(bl) && !std::isfinite(bu)) t = 'G';
    out << ' ' << t << "  " << rn[r] << "\n";
  }

  // column-major coefficient lists
  std::vector<std::vector<std::pair<int, double>>> cols(n);
  for (int r = 0; r < m; ++r) {
    for (const auto& [v, c] : lp.row(r)) cols[v].push_back({r, c});
  }
  out << "COLUMNS\n";
  for (int c = 0; c < n; ++c) {
    if (lp.objective_coeff(c) != 0.0) {
      out << "    " << std::left << std::setw(10) << cn[c] << std::setw(10) << "OBJ"
          << num(lp.objective_coeff(c)) << "\n";
    }
    for (const auto& [r, v] : cols[c]) {
      out << "    " << std::left << std::setw(10) << cn[c] << std::setw(10) << rn[r] << num(v)
          << "\n";
    }
  }

  out << "RHS\n";
  for (int r = 0; r < m; ++r) {
    const double bl = lp.row_lower(r), bu = lp.row_upper(r);
    const double rhs = bl == bu ? bl : (std::isfinite(bu) ? bu : bl);
    if (rhs != 0.0) {
      out << "    " << std::left << std::setw(10) << "RHS" << std::setw(10) << rn[r] << num(rhs)
          << "\n";
    }
  }

  bool any_range = false;
  for (int r = 0; r < m; ++r) {
    const double bl = lp.row_lower(r), bu = lp.row_upper(r);
    if (bl != bu && std::isfinite(bl) && std::isfinite(bu)) any_range = true;
  }
  if (any_range) {
    out << "RANGES\n";
    for (int r = 0; r < m; ++r) {
      const double bl = lp.row_lower(r), bu = lp.row_upper(r);
      if (bl != bu && std::isfinite(bl) && std::isfinite(bu)) {
        out << "    " << std::left << std::setw(10) << "RNG" << std::setw(10) << rn[r]
            << num(bu - bl) << "\n";
      }
    }
  }

  out << "BOUNDS\n";
  for (int c = 0; c < n; ++c) {
    const double bl = lp.lower(c), bu = lp.upper(c);
    if (!std::isfinite(bl) && !std::isfinite(bu)) {
      out << " FR " << std::left << std::setw(10) << "BND" << cn[c] << "\n";
      continue;
    }
    if (std::isfinite(bl) && bl != 0.0) {
      out << " LO " << std::left << std::setw(10) << "BND" << std::setw(10) << cn[c] << num(bl)
          << "\n";
    } else if (!std::isfinite(bl)) {
      out << " MI " << std::left << std::setw(10) << "BND" << cn[c] << "\n";
    }
    if (std::isfinite(bu)) {
      out << " UP " << std::left << std::setw(10) << "BND" << std::setw(10) << cn[c] << num(bu)
          << "\n";
    }
  }
  out << "ENDATA\n";
}

}  // namespace gridsec::lp
