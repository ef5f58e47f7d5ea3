#include <doctest.h>

#include <random>
#include <sstream>

#include "gridsec/lp.hpp"
#include "support/lp_oracles.hpp"

using namespace gridsec;

TEST_CASE("bound-attained optimum") {
  lp::LinearProgram prob;
  prob.set_sense(lp::Sense::maximize);
  prob.add_variable("x", 0.0, 3.0, 1.0);
  const auto sol = lp::solve(prob);
  REQUIRE(sol.status == lp::SolveStatus::optimal);
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(sol.x[0] == doctest::Approx(3.0));
}

TEST_CASE("constraint-attained optimum") {
  lp::LinearProgram prob;
  const int x = prob.add_variable("x", 0.0, lp::kInf, 1.0);
  const int y = prob.add_variable("y", 0.0, lp::kInf, 1.0);
  prob.add_constraint("r", lp::RowType::greater_equal, 2.0, {{x, 1.0}, {y, 1.0}});
  const auto sol = lp::solve(prob);
  REQUIRE(sol.status == lp::SolveStatus::optimal);
  CHECK(sol.objective == doctest::Approx(2.0));
  CHECK(sol.rows[0].binding);
  CHECK(sol.rows[0].activity == doctest::Approx(2.0));
}

TEST_CASE("infeasible and unbounded are reported, never silent") {
  lp::LinearProgram infeas;
  const int x = infeas.add_variable("x", 0.0, 1.0, 1.0);
  infeas.add_constraint("r", lp::RowType::greater_equal, 5.0, {{x, 1.0}});
  CHECK(lp::solve(infeas).status == lp::SolveStatus::infeasible);

  lp::LinearProgram unbounded;
  unbounded.set_sense(lp::Sense::maximize);
  unbounded.add_variable("x", 0.0, lp::kInf, 1.0);
  CHECK(lp::solve(unbounded).status == lp::SolveStatus::unbounded);

  lp::LinearProgram free_min;
  free_min.add_variable("x", -lp::kInf, lp::kInf, 1.0);
  CHECK(lp::solve(free_min).status == lp::SolveStatus::unbounded);
}

TEST_CASE("builder validates its invariants") {
  lp::LinearProgram prob;
  CHECK_THROWS_AS(prob.add_variable("x", 2.0, 1.0), std::invalid_argument);
  prob.add_variable("x", 0.0, 1.0);
  CHECK_THROWS_AS(prob.add_constraint("r", lp::RowType::equal, 0.0, {{5, 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("equality row respects variable bounds") {
  lp::LinearProgram prob;
  const int x = prob.add_variable("x", -4.0, 4.0, 1.0);
  const int y = prob.add_variable("y", -4.0, 4.0, 2.0);
  prob.add_constraint("sum", lp::RowType::equal, 1.0, {{x, 1.0}, {y, 1.0}});
  const auto sol = lp::solve(prob);
  REQUIRE(sol.status == lp::SolveStatus::optimal);
  CHECK(sol.x[0] <= 4.0 + 1e-9);
  CHECK(sol.x[0] + sol.x[1] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(4.0 + 2.0 * -3.0));  // x=4, y=-3
}

TEST_CASE("range rows bind on the correct side") {
  lp::LinearProgram prob;
  prob.set_sense(lp::Sense::maximize);
  const int x = prob.add_variable("x", -lp::kInf, lp::kInf, 1.0);
  prob.add_range("r", -2.0, 7.0, {{x, 2.0}});
  const auto sol = lp::solve(prob);
  REQUIRE(sol.status == lp::SolveStatus::optimal);
  CHECK(sol.x[0] == doctest::Approx(3.5));
  CHECK(sol.rows[0].binding);
}

TEST_CASE("deterministic: identical input, identical solution vector") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    lp::LinearProgram prob;
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    const int n = 6;
    for (int j = 0; j < n; ++j) prob.add_variable("v" + std::to_string(j), 0.0, 5.0, coef(rng));
    for (int r = 0; r < 4; ++r) {
      lp::RowCoeffs row;
      for (int j = 0; j < n; ++j) row.push_back({j, coef(rng)});
      prob.add_constraint("c" + std::to_string(r), lp::RowType::less_equal, 5.0 + r, row);
    }
    const auto a = lp::solve(prob);
    const auto b = lp::solve(prob);
    REQUIRE(a.status == b.status);
    CHECK(a.basis == b.basis);
    for (size_t i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);
  }
}

TEST_CASE("random 10-var LPs match the textbook-simplex oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  std::uniform_real_distribution<double> rhs(0.5, 6.0);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 10, m = 6;
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m), c(n);
    for (int j = 0; j < n; ++j) c[j] = coef(rng);
    for (int r = 0; r < m; ++r) {
      b[r] = rhs(rng);
      // mostly positive rows keep the region bounded; a few general rows
      // exercise the unbounded path too
      for (int j = 0; j < n; ++j) a(r, j) = trial % 4 == 0 ? coef(rng) : pos(rng);
    }

    lp::LinearProgram prob;
    prob.set_sense(lp::Sense::maximize);
    for (int j = 0; j < n; ++j) prob.add_variable("x" + std::to_string(j), 0.0, lp::kInf, c[j]);
    for (int r = 0; r < m; ++r) {
      lp::RowCoeffs row;
      for (int j = 0; j < n; ++j) {
        if (a(r, j) != 0.0) row.push_back({j, a(r, j)});
      }
      prob.add_constraint("c" + std::to_string(r), lp::RowType::less_equal, b[r], row);
    }
    const auto mine = lp::solve(prob);
    const auto ref = oracle::tableau_simplex(a, b, c);
    if (!ref) {
      CHECK(mine.status == lp::SolveStatus::unbounded);
      continue;
    }
    REQUIRE(mine.status == lp::SolveStatus::optimal);
    CHECK(mine.objective == doctest::Approx(*ref).epsilon(1e-6));
    ++solved;
  }
  CHECK(solved > 20);  // the generator must actually exercise bounded optima
}

TEST_CASE("small bounded LPs match exhaustive vertex enumeration") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 3;
    const int m = 3;
    oracle::DenseLp ref;
    ref.c.resize(n);
    ref.a.resize(m, n);
    ref.row_lo.resize(m);
    ref.row_up.resize(m);
    ref.lo = Eigen::VectorXd::Constant(n, -1.5);
    ref.up = Eigen::VectorXd::Constant(n, 2.5);
    for (int j = 0; j < n; ++j) ref.c[j] = coef(rng);
    for (int r = 0; r < m; ++r) {
      for (int j = 0; j < n; ++j) ref.a(r, j) = coef(rng);
      const double centre = coef(rng);
      if (trial % 3 == 0) {
        ref.row_lo[r] = centre;
        ref.row_up[r] = centre;  // equality row
      } else {
        ref.row_lo[r] = centre - 1.0;
        ref.row_up[r] = centre + 1.0;
      }
    }

    lp::LinearProgram prob;
    prob.set_sense(lp::Sense::maximize);
    for (int j = 0; j < n; ++j) {
      prob.add_variable("x" + std::to_string(j), ref.lo[j], ref.up[j], ref.c[j]);
    }
    for (int r = 0; r < m; ++r) {
      lp::RowCoeffs row;
      for (int j = 0; j < n; ++j) row.push_back({j, ref.a(r, j)});
      prob.add_range("c" + std::to_string(r), ref.row_lo[r], ref.row_up[r], row);
    }

    const auto mine = lp::solve(prob);
    const auto best = oracle::enumerate_vertices(ref);
    if (!best) {
      CHECK(mine.status != lp::SolveStatus::optimal);
      continue;
    }
    REQUIRE(mine.status == lp::SolveStatus::optimal);
    CHECK(mine.objective == doctest::Approx(*best).epsilon(1e-6));
  }
}

TEST_CASE("weak duality: optimum dominates any feasible point") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 5;
    lp::LinearProgram prob;
    prob.set_sense(lp::Sense::maximize);
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) {
      c[j] = coef(rng);
      prob.add_variable("x" + std::to_string(j), -1.0, 1.0, c[j]);
    }
    Eigen::VectorXd w(n);
    for (int j = 0; j < n; ++j) w[j] = coef(rng);
    prob.add_constraint("r", lp::RowType::equal, 0.0, [&] {
      lp::RowCoeffs row;
      for (int j = 0; j < n; ++j) row.push_back({j, w[j]});
      return row;
    }());
    const auto sol = lp::solve(prob);
    REQUIRE(sol.status == lp::SolveStatus::optimal);

    // feasible points from scaled projections of random vectors
    for (int probe = 0; probe < 10; ++probe) {
      Eigen::VectorXd x(n);
      for (int j = 0; j < n; ++j) x[j] = coef(rng);
      // project onto w'x = 0 then scale into the box
      x -= w * (w.dot(x) / w.squaredNorm());
      const double scale = x.cwiseAbs().maxCoeff();
      if (scale > 1.0) x /= scale;
      CHECK(c.dot(x) <= sol.objective + 1e-7);
    }
  }
}

TEST_CASE("MPS export round-trips the structure") {
  lp::LinearProgram prob;
  prob.set_sense(lp::Sense::maximize);
  const int x = prob.add_variable("x", 0.0, 3.0, 1.0);
  const int y = prob.add_variable("y", -1.0, lp::kInf, 2.0);
  prob.add_constraint("cap", lp::RowType::less_equal, 4.0, {{x, 1.0}, {y, 1.0}});
  prob.add_range("corridor", -2.0, 2.0, {{x, 1.0}, {y, -1.0}});
  std::ostringstream os;
  lp::write_mps(prob, os, "T");
  const std::string text = os.str();
  CHECK(text.find("NAME") != std::string::npos);
  CHECK(text.find("OBJSENSE") != std::string::npos);
  CHECK(text.find("ROWS") != std::string::npos);
  CHECK(text.find("RANGES") != std::string::npos);
  CHECK(text.find("BOUNDS") != std::string::npos);
  CHECK(text.find("ENDATA") != std::string::npos);
  CHECK(text.find("cap") != std::string::npos);
}
