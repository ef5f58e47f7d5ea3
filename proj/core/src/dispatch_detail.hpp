#pragma once

#include <vector>

#include "gridsec/sced.hpp"

namespace gridsec::sced::detail {

struct PlfscRow {
  int branch = 0;
  double flow = 0.0;
  bool binding = false;
};

// Shared dispatch LP used by both the base SCED and the CPSCED: minimizes
// production cost subject to power balance and lazily generated flow limits
// over `loads`; when `plfsc_loads` is non-null, adds explicit physical
// line-flow security constraints over that load vector for each branch in
// `plfsc_branches`.
DispatchSolution solve_dispatch(const net::Network& net, const net::PtdfMatrix& ptdf,
                                const net::LoadVector& loads,
                                const Eigen::VectorXd* plfsc_loads,
                                const std::vector<int>& plfsc_branches,
                                const ScedOptions& options, std::vector<PlfscRow>* plfsc_out);

}  // namespace gridsec::sced::detail
