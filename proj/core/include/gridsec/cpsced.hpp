#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gridsec/network.hpp"
#include "gridsec/ptdf.hpp"
#include "gridsec/rtlrta.hpp"
#include "gridsec/sced.hpp"

namespace gridsec::cpsced {

/// Reconstruction of the actual loads behind a flagged SE snapshot: the
/// worst-case deviation of the primary target is backed out on the buses
/// whose deviations exceed the start-point bound, then the set is
/// re-balanced so total estimated load equals total SE load.
struct ActualLoadEstimate {
  Eigen::VectorXd d_actual;   // MW per bus
  std::vector<int> psi;       // bus indices with |L_i - D_i| > alpha_start * D_i
  int primary_target = -1;    // branch index the reconstruction assumed
};

struct EstimateOptions {
  double alpha_cap = 0.10;  // reconstruction shift factor (attacker's bound)
  double sensitivity_eps = 1e-4;
};

ActualLoadEstimate estimate_actual_loads(const net::Network& net, const net::PtdfMatrix& ptdf,
                                         const net::LoadVector& forecast,
                                         const net::LoadVector& se_loads,
                                         const rtlrta::DetectionReport& report,
                                         const std::vector<rtlrta::AssetSignature>& signatures,
                                         const EstimateOptions& options = {},
                                         const sced::DispatchSolution* base = nullptr);

/// SCED over the contaminated loads augmented with physical line-flow
/// security constraints over the estimated actual loads.
struct CpscedSolution {
  sced::DispatchSolution dispatch;     // over the contaminated loads
  std::vector<int> activated_plfsc;    // branch indices, ascending
  std::vector<int> binding_plfsc;      // subset of activated, ascending
  Eigen::VectorXd plfsc_flows;         // MW, parallel to activated_plfsc
  int iterations = 0;                  // enhanced-EMS loop count
};

CpscedSolution solve_cpsced(const net::Network& net, const net::PtdfMatrix& ptdf,
                            const net::LoadVector& se_loads, const ActualLoadEstimate& estimate,
                            const std::vector<int>& active_branches,
                            const sced::ScedOptions& options = {});

enum class EmsStatus { clean, corrected, uncorrectable };

struct EmsIterationAudit {
  std::vector<int> active;
  std::vector<int> binding;
  double cost = 0.0;
};

struct EmsResult {
  rtlrta::DetectionReport report;
  sced::DispatchSolution sced_dispatch;  // plain SCED over the SE loads
  ActualLoadEstimate estimate;           // populated when flagged
  CpscedSolution cpsced;                 // populated when flagged
  EmsStatus status = EmsStatus::clean;
  std::vector<int> residual_violations;  // branch indices, when uncorrectable
  std::vector<EmsIterationAudit> trail;

  const sced::DispatchSolution& final_dispatch() const {
    return status == EmsStatus::clean ? sced_dispatch : cpsced.dispatch;
  }
};

struct EmsOptions {
  EstimateOptions estimate;
  sced::ScedOptions dispatch;
};

/// One enhanced-EMS pass: scan, and when an attack is flagged, estimate the
/// actual loads, solve the CPSCED, and keep activating the security
/// constraint of any rated branch whose physical flow (over the estimate)
/// still exceeds its rating, until the system is overflow-free or every
/// rated branch is constrained.
EmsResult enhanced_ems_step(const net::Network& net, const net::PtdfMatrix& ptdf,
                            const net::LoadVector& forecast, const net::LoadVector& se_loads,
                            const std::vector<rtlrta::AssetSignature>& signatures,
                            const EmsOptions& options = {}, long snapshot_id = 0,
                            const sced::DispatchSolution* base = nullptr);

}  // namespace gridsec::cpsced
