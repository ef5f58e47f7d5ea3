#pragma once

#include <Eigen/Dense>

#include "gridsec/network.hpp"

namespace gridsec::net {

/// Power transfer distribution factors: values(k, i) is the MW flow change
/// on branch k per 1 MW injected at bus i and withdrawn at the reference
/// bus.  The reference column is identically zero; entries below 1e-9 in
/// magnitude are stored as exact zeros.  Immutable once built.
class PtdfMatrix {
 public:
  PtdfMatrix() = default;
  explicit PtdfMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {}

  double operator()(int branch_index, int bus_index) const {
    return values_(branch_index, bus_index);
  }
  const Eigen::MatrixXd& values() const { return values_; }
  int num_branches() const { return static_cast<int>(values_.rows()); }
  int num_buses() const { return static_cast<int>(values_.cols()); }

  Eigen::VectorXd row(int branch_index) const { return values_.row(branch_index); }

  /// Branch flows (MW) for a bus injection vector (MW).
  Eigen::VectorXd flows(const Eigen::VectorXd& injections) const {
    return values_ * injections;
  }

  double flow(int branch_index, const Eigen::VectorXd& injections) const {
    return values_.row(branch_index).dot(injections);
  }

 private:
  Eigen::MatrixXd values_;
};

/// Build the PTDF matrix by factorizing the reference-reduced nodal
/// susceptance matrix once and back-solving per branch.  Throws
/// NumericalError if the reduced system is singular (disconnected network
/// or degenerate reactances).
PtdfMatrix compute_ptdf(const Network& net);

}  // namespace gridsec::net
