#include "gridsec/cpsced.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "dispatch_detail.hpp"
#include "gridsec/attack.hpp"

namespace gridsec::cpsced {

ActualLoadEstimate estimate_actual_loads(const net::Network& net, const net::PtdfMatrix& ptdf,
                                         const net::LoadVector& forecast,
                                         const net::LoadVector& se_loads,
                                         const rtlrta::DetectionReport& report,
                                         const std::vector<rtlrta::AssetSignature>& signatures,
                                         const EstimateOptions& options,
                                         const sced::DispatchSolution* base) {
  if (report.flagged.empty()) {
    throw std::invalid_argument("estimate_actual_loads requires a non-empty flagged set");
  }
  const Eigen::VectorXd dev = se_loads - forecast;

  // Primary target: largest NPDSB; ties go to the larger relative flow
  // wedge |PTDF_k . dev| / rating, then to the lower branch id.
  const rtlrta::AssetSignature* primary = nullptr;
  int best_npdsb = -1;
  double best_wedge = -1.0;
  for (int k : report.flagged) {
    const rtlrta::AssetSignature* sig = nullptr;
    for (const auto& s : signatures) {
      if (s.branch == k) {
        sig = &s;
        break;
      }
    }
    if (!sig) continue;
    const int score = report.npdsb_by_branch.at(sig->branch_id);
    const double wedge =
        std::abs(ptdf.row(k).dot(dev)) / net.branch(k).rating;
    const bool better =
        score > best_npdsb ||
        (score == best_npdsb &&
         (wedge > best_wedge + 1e-12 ||
          (std::abs(wedge - best_wedge) <= 1e-12 && primary &&
           net.branch(k).id < net.branch(primary->branch).id)));
    if (better) {
      best_npdsb = score;
      best_wedge = wedge;
      primary = sig;
    }
  }
  if (!primary) throw std::invalid_argument("flagged assets carry no calibrated signature");

  ActualLoadEstimate est;
  est.primary_target = primary->branch;

  attack::AttackOptions aopt;
  aopt.sensitivity_eps = options.sensitivity_eps;
  const attack::AttackVector worst = attack::worst_case_attack(
      net, ptdf, forecast, primary->branch, options.alpha_cap, {}, base, aopt);

  est.d_actual = se_loads;
  for (int i = 0; i < net.num_buses(); ++i) {
    if (std::abs(dev[i]) > primary->alpha_startpoint * forecast[i]) {
      est.psi.push_back(i);
      est.d_actual[i] = std::max(0.0, se_loads[i] - worst.deviations[i]);
    }
  }

  // Re-balance psi so total estimated load equals total SE load; spread
  // proportionally over the members.
  if (!est.psi.empty()) {
    double psi_sum = 0.0, psi_target = 0.0;
    for (int i : est.psi) {
      psi_sum += est.d_actual[i];
      psi_target += se_loads[i];
    }
    if (psi_sum > 0.0) {
      const double scale = psi_target / psi_sum;
      for (int i : est.psi) est.d_actual[i] *= scale;
    } else if (psi_target > 0.0) {
      const double share = psi_target / static_cast<double>(est.psi.size());
      for (int i : est.psi) est.d_actual[i] = share;
    }
  }
  return est;
}

CpscedSolution solve_cpsced(const net::Network& net, const net::PtdfMatrix& ptdf,
                            const net::LoadVector& se_loads, const ActualLoadEstimate& estimate,
                            const std::vector<int>& active_branches,
                            const sced::ScedOptions& options) {
  CpscedSolution out;
  out.activated_plfsc = active_branches;
  std::sort(out.activated_plfsc.begin(), out.activated_plfsc.end());

  std::vector<sced::detail::PlfscRow> rows;
  out.dispatch = sced::detail::solve_dispatch(net, ptdf, se_loads, &estimate.d_actual,
                                              out.activated_plfsc, options, &rows);
  out.plfsc_flows = Eigen::VectorXd::Zero(static_cast<int>(rows.size()));
  for (size_t j = 0; j < rows.size(); ++j) {
    out.plfsc_flows[static_cast<int>(j)] = rows[j].flow;
    if (rows[j].binding) out.binding_plfsc.push_back(rows[j].branch);
  }
  return out;
}

EmsResult enhanced_ems_step(const net::Network& net, const net::PtdfMatrix& ptdf,
                            const net::LoadVector& forecast, const net::LoadVector& se_loads,
                            const std::vector<rtlrta::AssetSignature>& signatures,
                            const EmsOptions& options, long snapshot_id,
                            const sced::DispatchSolution* base) {
  EmsResult res;
  res.report = rtlrta::scan(signatures, forecast, se_loads, snapshot_id);
  res.sced_dispatch = sced::solve_sced(net, ptdf, se_loads, options.dispatch);

  if (!res.report.attack_detected()) {
    res.status = EmsStatus::clean;
    return res;
  }

  res.estimate = estimate_actual_loads(net, ptdf, forecast, se_loads, res.report, signatures,
                                       options.estimate, base);

  std::set<int> active(res.report.flagged.begin(), res.report.flagged.end());
  const int max_iters = net.num_branches();
  for (int iter = 1; iter <= max_iters; ++iter) {
    const std::vector<int> active_list(active.begin(), active.end());
    res.cpsced = solve_cpsced(net, ptdf, se_loads, res.estimate, active_list, options.dispatch);
    res.cpsced.iterations = iter;
    res.trail.push_back({active_list, res.cpsced.binding_plfsc, res.cpsced.dispatch.total_cost});

    if (res.cpsced.dispatch.status != sced::DispatchStatus::optimal) {
      res.status = EmsStatus::uncorrectable;
      res.residual_violations = active_list;
      return res;
    }

    // check the physical flow of every rated branch against the estimate
    const Eigen::VectorXd phys =
        ptdf.flows(res.cpsced.dispatch.injections(net, res.estimate.d_actual));
    std::vector<int> newly;
    for (int k = 0; k < net.num_branches(); ++k) {
      if (!net.branch(k).rated() || active.count(k)) continue;
      if (std::abs(phys[k]) > net.branch(k).rating + options.dispatch.flow_tolerance) {
        newly.push_back(k);
      }
    }
    if (newly.empty()) {
      res.status = EmsStatus::corrected;
      return res;
    }
    active.insert(newly.begin(), newly.end());
  }

  res.status = EmsStatus::uncorrectable;
  const Eigen::VectorXd phys =
      ptdf.flows(res.cpsced.dispatch.injections(net, res.estimate.d_actual));
  for (int k = 0; k < net.num_branches(); ++k) {
    if (net.branch(k).rated() &&
        std::abs(phys[k]) > net.branch(k).rating + options.dispatch.flow_tolerance) {
      res.residual_violations.push_back(k);
    }
  }
  return res;
}

}  // namespace gridsec::cpsced
