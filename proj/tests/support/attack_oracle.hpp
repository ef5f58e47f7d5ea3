#pragma once

// Greedy fractional-balancing oracle for the worst-case LR attack LP:
// sort load buses by objective weight, saturate the favorable side to
// +alpha*D, the tail to -alpha*D, and let the single marginal bus absorb
// the zero-sum balance.  Independent of the production LP path.

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <vector>

#include "gridsec/network.hpp"
#include "gridsec/ptdf.hpp"

namespace oracle {

struct GreedyAttack {
  Eigen::VectorXd deviations;
  double objective = 0.0;  // sum over buses of weight_i * dev_i
};

inline GreedyAttack greedy_attack(const gridsec::net::Network& net,
                                  const gridsec::net::PtdfMatrix& ptdf, int target, double alpha,
                                  int direction_sign, const std::vector<int>& pinned = {},
                                  double sensitivity_eps = 1e-4) {
  const int n = net.num_buses();
  std::vector<char> is_pinned(n, 0);
  for (int i : pinned) is_pinned[i] = 1;

  struct Entry {
    int bus;
    double weight;
    double cap;
  };
  std::vector<Entry> entries;
  for (int i = 0; i < n; ++i) {
    const double d = net.bus(i).forecast_load;
    if (d <= 0.0 || is_pinned[i]) continue;
    const double p = ptdf(target, i);
    const double w = std::abs(p) > sensitivity_eps ? direction_sign * p : 0.0;
    entries.push_back({i, w, alpha * d});
  }

  GreedyAttack out;
  out.deviations = Eigen::VectorXd::Zero(n);
  if (entries.empty()) return out;

  std::stable_sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return net.bus(a.bus).id < net.bus(b.bus).id;
  });

  const double total = std::accumulate(entries.begin(), entries.end(), 0.0,
                                       [](double acc, const Entry& e) { return acc + e.cap; });
  // first index m with prefix(before m) + cap_m >= suffix(after m)
  double before = 0.0;
  size_t m = entries.size() - 1;
  for (size_t i = 0; i < entries.size(); ++i) {
    const double after = total - before - entries[i].cap;
    if (before + entries[i].cap >= after) {
      m = i;
      break;
    }
    before += entries[i].cap;
  }
  double after = total - before - entries[m].cap;
  for (size_t i = 0; i < m; ++i) out.deviations[entries[i].bus] = entries[i].cap;
  for (size_t i = m + 1; i < entries.size(); ++i) out.deviations[entries[i].bus] = -entries[i].cap;
  out.deviations[entries[m].bus] = after - before;

  for (const Entry& e : entries) out.objective += e.weight * out.deviations[e.bus];
  return out;
}

}  // namespace oracle
