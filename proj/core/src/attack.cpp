#include "gridsec/attack.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "gridsec/lp.hpp"

namespace gridsec::attack {

namespace {

int flow_direction(double flow) { return flow >= 0.0 ? +1 : -1; }

}  // namespace

std::vector<int> sensitive_buses(const net::Network& net, const net::PtdfMatrix& ptdf,
                                 int target_branch, double eps) {
  std::vector<int> out;
  for (int i = 0; i < net.num_buses(); ++i) {
    if (net.bus(i).forecast_load > 0.0 && std::abs(ptdf(target_branch, i)) > eps) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<int> sensitive_buses_by_ptdf(const net::Network& net, const net::PtdfMatrix& ptdf,
                                         int target_branch, double eps) {
  std::vector<int> s = sensitive_buses(net, ptdf, target_branch, eps);
  std::stable_sort(s.begin(), s.end(), [&](int a, int b) {
    const double pa = std::abs(ptdf(target_branch, a));
    const double pb = std::abs(ptdf(target_branch, b));
    if (pa != pb) return pa < pb;
    return net.bus(a).id < net.bus(b).id;
  });
  return s;
}

AttackVector worst_case_attack(const net::Network& net, const net::PtdfMatrix& ptdf,
                               const net::LoadVector& forecast, int target_branch, double alpha,
                               const std::vector<int>& pinned,
                               const sced::DispatchSolution* base, const AttackOptions& options) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  const int n = net.num_buses();

  AttackVector out;
  out.deviations = Eigen::VectorXd::Zero(n);
  out.alpha = alpha;
  out.target_branch = target_branch;
  out.zeroed_buses = pinned;

  sced::DispatchSolution base_local;
  if (!base) {
    base_local = sced::solve_sced(net, ptdf, forecast);
    if (base_local.status != sced::DispatchStatus::optimal) {
      throw net::ValidationError("pre-attack SCED is infeasible; no operating point to attack");
    }
    base = &base_local;
  }
  out.direction_sign = flow_direction(base->control_room_flows[target_branch]);

  std::vector<char> is_pinned(n, 0);
  for (int i : pinned) is_pinned[i] = 1;

  // Objective weight per bus: the target's PTDF in the pre-attack flow
  // direction, with sub-threshold sensitivities treated as zero so only
  // sensitive buses are rewarded (non-sensitive load buses act as balance
  // capacity).
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(n);
  bool any_weight = false;
  for (int i = 0; i < n; ++i) {
    const double p = ptdf(target_branch, i);
    if (std::abs(p) > options.sensitivity_eps && net.bus(i).forecast_load > 0.0 &&
        !is_pinned[i]) {
      weight[i] = out.direction_sign * p;
      any_weight = true;
    }
  }
  if (!any_weight || alpha == 0.0) {
    out.degenerate = !any_weight;
    return out;  // zero vector: no sensitivity left to exploit
  }

  // maximize sum(weight_i * dev_i)  s.t.  sum(dev) = 0, |dev_i| <= alpha D_i
  lp::LinearProgram prob;
  prob.set_sense(lp::Sense::maximize);
  std::vector<int> var_bus;
  lp::RowCoeffs balance;
  for (int i = 0; i < n; ++i) {
    const double cap = alpha * forecast[i];
    if (cap <= 0.0 || is_pinned[i]) continue;
    const int v = prob.add_variable("d" + std::to_string(net.bus(i).id), -cap, cap, weight[i]);
    var_bus.push_back(i);
    balance.push_back({v, 1.0});
  }
  prob.add_constraint("zerosum", lp::RowType::equal, 0.0, std::move(balance));

  const lp::LpSolution sol = lp::solve(prob);
  if (sol.status != lp::SolveStatus::optimal) {
    throw net::NumericalError("attack LP did not solve to optimality: " +
                              std::string(lp::to_string(sol.status)));
  }
  for (size_t v = 0; v < var_bus.size(); ++v) out.deviations[var_bus[v]] = sol.x[v];
  out.flow_gain = sol.objective;
  return out;
}

AttackVector random_attack(const net::Network& net, const net::PtdfMatrix& ptdf,
                           const net::LoadVector& forecast, int target_branch, double alpha,
                           int d, std::uint64_t seed, const sced::DispatchSolution* base,
                           const AttackOptions& options) {
  std::vector<int> sens = sensitive_buses(net, ptdf, target_branch, options.sensitivity_eps);
  if (d < 0 || d > static_cast<int>(sens.size())) {
    throw std::invalid_argument("d = " + std::to_string(d) + " exceeds the sensitive-bus set (" +
                                std::to_string(sens.size()) + ")");
  }
  std::mt19937_64 rng(seed);
  // partial Fisher-Yates over the id-ordered sensitive set
  for (int j = 0; j < d; ++j) {
    std::uniform_int_distribution<int> pick(j, static_cast<int>(sens.size()) - 1);
    std::swap(sens[j], sens[pick(rng)]);
  }
  std::vector<int> pinned(sens.begin(), sens.begin() + d);
  std::sort(pinned.begin(), pinned.end());
  return worst_case_attack(net, ptdf, forecast, target_branch, alpha, pinned, base, options);
}

FlowAssessment assess_deviation(const net::Network& net, const net::PtdfMatrix& ptdf,
                                const net::LoadVector& forecast,
                                const Eigen::VectorXd& deviations, int target_branch) {
  FlowAssessment out;
  const net::LoadVector contaminated = (forecast + deviations).cwiseMax(0.0);
  out.dispatch = sced::solve_sced(net, ptdf, contaminated);
  out.dispatch_feasible = out.dispatch.status == sced::DispatchStatus::optimal;
  if (!out.dispatch_feasible) return out;
  out.physical_flows = ptdf.flows(out.dispatch.injections(net, forecast));
  out.control_room_flow = out.dispatch.control_room_flows[target_branch];
  out.physical_flow = out.physical_flows[target_branch];
  return out;
}

MinAlphaResult min_alpha(const net::Network& net, const net::PtdfMatrix& ptdf,
                         const net::LoadVector& forecast, int target_branch,
                         double overflow_fraction, const MinAlphaOptions& options,
                         const sced::DispatchSolution* base, const AttackOptions& attack_options) {
  if (overflow_fraction < 0.0) throw std::invalid_argument("overflow fraction must be >= 0");
  const net::Branch& target = net.branch(target_branch);
  MinAlphaResult res;
  if (!target.rated()) return res;  // unlimited rating can never overflow

  sced::DispatchSolution base_local;
  if (!base) {
    base_local = sced::solve_sced(net, ptdf, forecast);
    if (base_local.status != sced::DispatchStatus::optimal) {
      throw net::ValidationError("pre-attack SCED is infeasible");
    }
    base = &base_local;
  }

  const double required = (1.0 + overflow_fraction) * target.rating;
  const double eps = 1e-9 * target.rating;

  auto overflow_at = [&](double a) {
    const AttackVector atk =
        worst_case_attack(net, ptdf, forecast, target_branch, a, {}, base, attack_options);
    const FlowAssessment fa = assess_deviation(net, ptdf, forecast, atk.deviations, target_branch);
    return fa.dispatch_feasible ? std::abs(fa.physical_flow) : 0.0;
  };

  const double f0 = std::abs(base->control_room_flows[target_branch]);
  if (f0 >= required - eps) {
    // already at or past the threshold before any deviation
    res.vulnerable = true;
    res.alpha = 0.0;
    return res;
  }

  const double cap = options.alpha_cap;
  const double at_cap = overflow_at(cap);
  if (at_cap < required - eps) return res;  // not vulnerable within the cap

  // The wedge scales linearly in alpha, so start from the proportional
  // estimate and bracket around it.
  double lo = 0.0, hi = cap;
  const double achieved = at_cap - f0;
  double est = cap * (required - f0) / achieved;
  est = std::clamp(est, 0.0, cap);

  int probes = 0;
  double probe = est;
  while (probes < options.max_probes && (hi - lo) > options.rel_tol * std::max(hi, 1e-12)) {
    probe = std::clamp(probe, lo + (hi - lo) * 1e-3, hi - (hi - lo) * 1e-3);
    const double f = overflow_at(probe);
    ++probes;
    if (f >= required - eps) {
      hi = probe;
    } else {
      lo = probe;
    }
    probe = 0.5 * (lo + hi);
  }
  res.vulnerable = true;
  res.alpha = hi;
  return res;
}

NoiseVector gen_noise(const net::Network& net, const net::LoadVector& forecast, double alpha,
                      NoiseFamily family, std::uint64_t seed, const AttackOptions& options) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  const int n = net.num_buses();
  NoiseVector out;
  out.family = family;
  out.seed = seed;
  out.deviations = Eigen::VectorXd::Zero(n);
  if (alpha == 0.0) return out;

  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) {
    const double cap = alpha * forecast[i];
    if (cap <= 0.0) continue;
    const double scale = cap / 3.1;
    double draw = 0.0;
    // rejection resampling keeps the truncated shape free of boundary spikes
    for (int tries = 0; tries < 1000; ++tries) {
      if (family == NoiseFamily::gaussian) {
        draw = std::normal_distribution<double>(0.0, scale)(rng);
      } else {
        draw = std::cauchy_distribution<double>(0.0, scale)(rng);
      }
      if (std::abs(draw) <= cap) break;
      draw = 0.0;
    }
    out.deviations[i] = draw;
  }

  const double total = forecast.sum();
  const double budget = options.noise_balance_tol * total;
  const double s = out.deviations.sum();
  if (std::abs(s) > budget) {
    const double excess = s - (s > 0 ? budget : -budget);
    // shed the excess proportionally to each bus's remaining headroom
    double room_total = 0.0;
    Eigen::VectorXd room = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      const double cap = alpha * forecast[i];
      if (cap <= 0.0) continue;
      room[i] = excess > 0 ? out.deviations[i] + cap : cap - out.deviations[i];
      room_total += room[i];
    }
    if (room_total > 0.0) {
      for (int i = 0; i < n; ++i) {
        if (room[i] > 0.0) out.deviations[i] -= excess * room[i] / room_total;
      }
    }
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 over the concatenated identifiers
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1) + 0xBF58476D1CE4E5B9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace gridsec::attack
