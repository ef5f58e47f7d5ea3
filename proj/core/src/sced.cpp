#include "gridsec/sced.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "dispatch_detail.hpp"
#include "gridsec/lp.hpp"

namespace gridsec::sced {

Eigen::VectorXd DispatchSolution::injections(const net::Network& net,
                                             const net::LoadVector& loads) const {
  Eigen::VectorXd inj = -loads;
  for (int g = 0; g < net.num_generators(); ++g) {
    inj[net.bus_index(net.generator(g).bus)] += p_gen[g];
  }
  return inj;
}

namespace detail {

DispatchSolution solve_dispatch(const net::Network& net, const net::PtdfMatrix& ptdf,
                                const net::LoadVector& loads,
                                const Eigen::VectorXd* plfsc_loads,
                                const std::vector<int>& plfsc_branches,
                                const ScedOptions& options, std::vector<PlfscRow>* plfsc_out) {
  const int n = net.num_buses();
  const int ngen = net.num_generators();
  if (loads.size() != n) throw std::invalid_argument("load vector dimension mismatch");
  for (int i = 0; i < n; ++i) {
    if (loads[i] < 0.0 || !std::isfinite(loads[i])) {
      throw std::invalid_argument("loads must be finite and >= 0 (bus " +
                                  std::to_string(net.bus(i).id) + ")");
    }
  }

  DispatchSolution out;

  // Precompute each branch row restricted to generator columns and the
  // load offset PTDF_k . L, so a flow constraint is a pure p_g row.
  auto flow_row = [&](int k, const net::LoadVector& l, double& base) {
    lp::RowCoeffs coeffs;
    base = 0.0;
    for (int i = 0; i < n; ++i) base += ptdf(k, i) * l[i];
    for (int g = 0; g < ngen; ++g) {
      const double c = ptdf(k, net.bus_index(net.generator(g).bus));
      if (c != 0.0) coeffs.push_back({g, c});
    }
    return coeffs;
  };

  std::set<int> active;  // branch indices with control-room flow rows
  std::vector<int> active_order;
  const int max_rounds = net.num_branches() + 1;

  lp::LpSolution lps;
  for (int round = 0; round < max_rounds; ++round) {
    ++out.constraint_rounds;
    lp::LinearProgram prob;
    for (int g = 0; g < ngen; ++g) {
      const auto& gen = net.generator(g);
      prob.add_variable("P" + std::to_string(gen.id), gen.p_min, gen.p_max, gen.cost);
    }
    prob.add_constraint("balance", lp::RowType::equal, loads.sum(),
                        [&] {
                          lp::RowCoeffs c;
                          for (int g = 0; g < ngen; ++g) c.push_back({g, 1.0});
                          return c;
                        }());
    for (int k : active_order) {
      double base = 0.0;
      auto coeffs = flow_row(k, loads, base);
      const double r = net.branch(k).rating;
      prob.add_range("F" + std::to_string(net.branch(k).id), -r + base, r + base,
                     std::move(coeffs));
    }
    const int plfsc_row0 = prob.num_constraints();
    for (int k : plfsc_branches) {
      double base = 0.0;
      auto coeffs = flow_row(k, *plfsc_loads, base);
      const double r = net.branch(k).rating;
      prob.add_range("PLF" + std::to_string(net.branch(k).id), -r + base, r + base,
                     std::move(coeffs));
    }

    lps = lp::solve(prob);
    out.lp_iterations += lps.iterations;
    if (lps.status != lp::SolveStatus::optimal) {
      out.status = DispatchStatus::infeasible;
      out.active_limits = {active_order.begin(), active_order.end()};
      out.active_limits.insert(out.active_limits.end(), plfsc_branches.begin(),
                               plfsc_branches.end());
      return out;
    }

    out.p_gen = Eigen::Map<const Eigen::VectorXd>(lps.x.data(), ngen);
    const Eigen::VectorXd inj = out.injections(net, loads);
    out.control_room_flows = ptdf.flows(inj);

    std::vector<int> violated;
    for (int k = 0; k < net.num_branches(); ++k) {
      if (!net.branch(k).rated() || active.count(k)) continue;
      if (std::abs(out.control_room_flows[k]) > net.branch(k).rating + options.flow_tolerance) {
        violated.push_back(k);
      }
    }
    if (violated.empty()) {
      out.status = DispatchStatus::optimal;
      out.total_cost = lps.objective;
      out.binding_branches.clear();
      for (int k = 0; k < net.num_branches(); ++k) {
        if (net.branch(k).rated() &&
            std::abs(std::abs(out.control_room_flows[k]) - net.branch(k).rating) <= 1e-7) {
          out.binding_branches.push_back(k);
        }
      }
      out.active_limits = {active_order.begin(), active_order.end()};
      if (plfsc_out) {
        plfsc_out->clear();
        for (size_t j = 0; j < plfsc_branches.size(); ++j) {
          const auto& row = lps.rows[plfsc_row0 + j];
          double base = 0.0;
          for (int i = 0; i < n; ++i) {
            base += ptdf(plfsc_branches[j], i) * (*plfsc_loads)[i];
          }
          plfsc_out->push_back({plfsc_branches[j], row.activity - base, row.binding});
        }
      }
      return out;
    }
    for (int k : violated) {
      active.insert(k);
      active_order.push_back(k);
    }
  }
  // cannot happen: every round adds at least one of finitely many branches
  throw net::NumericalError("flow-limit generation failed to converge");
}

}  // namespace detail

DispatchSolution solve_sced(const net::Network& net, const net::PtdfMatrix& ptdf,
                            const net::LoadVector& loads, const ScedOptions& options) {
  return detail::solve_dispatch(net, ptdf, loads, nullptr, {}, options, nullptr);
}

}  // namespace gridsec::sced
