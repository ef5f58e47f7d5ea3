#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gridsec/network.hpp"
#include "gridsec/ptdf.hpp"

namespace gridsec::sced {

enum class DispatchStatus { optimal, infeasible };

struct DispatchSolution {
  DispatchStatus status = DispatchStatus::infeasible;
  Eigen::VectorXd p_gen;               // MW per generator
  double total_cost = 0.0;             // $
  Eigen::VectorXd control_room_flows;  // MW per branch, computed with the SE loads
  std::vector<int> binding_branches;   // branch indices with |flow| at rating
  /// Flow limits that were in the final LP; on infeasibility this is the
  /// conflicting constraint set.
  std::vector<int> active_limits;
  int lp_iterations = 0;
  int constraint_rounds = 0;  // lazy flow-limit generation rounds

  /// Bus injections (MW) implied by this dispatch and a load vector.
  Eigen::VectorXd injections(const net::Network& net, const net::LoadVector& loads) const;
};

struct ScedOptions {
  double flow_tolerance = 1e-6;  // MW slack allowed on |flow| <= rating
};

/// Cost-minimal dispatch subject to power balance, generator capacities and
/// branch flow limits over the given (possibly contaminated) loads.  Flow
/// limits are generated lazily: violated branches are added and the LP
/// re-solved until no rated branch exceeds its limit.
DispatchSolution solve_sced(const net::Network& net, const net::PtdfMatrix& ptdf,
                            const net::LoadVector& loads, const ScedOptions& options = {});

}  // namespace gridsec::sced
