#include "gridsec/ptdf.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <vector>

namespace gridsec::net {

PtdfMatrix compute_ptdf(const Network& net) {
  const int n = net.num_buses();
  const int m = net.num_branches();
  const int ref = net.reference_index();
  if (m == 0) return PtdfMatrix(Eigen::MatrixXd::Zero(0, n));

  // reduced index map: bus index -> row in the (n-1)-dim system
  std::vector<int> red(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (i != ref) red[i] = next++;
  }

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(m) * 4);
  for (int k = 0; k < m; ++k) {
    const double b = 1.0 / net.branch(k).reactance;
    const int f = red[net.from_index(k)];
    const int t = red[net.to_index(k)];
    if (f >= 0) trip.push_back({f, f, b});
    if (t >= 0) trip.push_back({t, t, b});
    if (f >= 0 && t >= 0) {
      trip.push_back({f, t, -b});
      trip.push_back({t, f, -b});
    }
  }

  Eigen::SparseMatrix<double> bred(n - 1, n - 1);
  bred.setFromTriplets(trip.begin(), trip.end());
  bred.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(bred);
  lu.factorize(bred);
  if (lu.info() != Eigen::Success) {
    throw NumericalError(
        "reduced susceptance matrix is singular (disconnected network or zero reactance)");
  }

  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd rhs(n - 1);
  for (int k = 0; k < m; ++k) {
    const double b = 1.0 / net.branch(k).reactance;
    const int f = red[net.from_index(k)];
    const int t = red[net.to_index(k)];
    rhs.setZero();
    if (f >= 0) rhs[f] += b;
    if (t >= 0) rhs[t] -= b;
    const Eigen::VectorXd y = lu.solve(rhs);
    if (lu.info() != Eigen::Success) {
      throw NumericalError("PTDF back-substitution failed for branch " +
                           std::to_string(net.branch(k).id));
    }
    for (int i = 0; i < n; ++i) {
      if (i == ref) continue;
      const double v = y[red[i]];
      values(k, i) = std::abs(v) < 1e-9 ? 0.0 : v;
    }
  }

  return PtdfMatrix(std::move(values));
}

}  // namespace gridsec::net
