#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gridsec/network.hpp"
#include "gridsec/ptdf.hpp"
#include "gridsec/sced.hpp"

namespace gridsec::attack {

/// Load-redistribution deviation vector: per-bus MW added to the forecast
/// loads (L = D + deviations).  Zero-sum, per-bus bounded by alpha * D_i,
/// zero at zero-injection buses and at every pinned bus.
struct AttackVector {
  Eigen::VectorXd deviations;    // MW per bus
  double alpha = 0.0;            // load shift factor used
  int target_branch = -1;        // branch index
  std::vector<int> zeroed_buses; // pinned bus indices (eta)
  int direction_sign = +1;       // sign of the target's pre-attack flow
  /// Optimal flow wedge (MW) between physical and control-room flow in the
  /// pre-attack flow direction; the LP objective value.
  double flow_gain = 0.0;
  /// Target had no usable PTDF sensitivity; a zero vector was returned.
  bool degenerate = false;
};

enum class NoiseFamily { gaussian, cauchy };

struct NoiseVector {
  Eigen::VectorXd deviations;  // MW per bus
  NoiseFamily family = NoiseFamily::gaussian;
  std::uint64_t seed = 0;
};

struct AttackOptions {
  /// |PTDF| above this marks a load bus as sensitive for the target.
  double sensitivity_eps = 1e-4;
  /// Net-load drift allowed for noise vectors, as a fraction of total load.
  double noise_balance_tol = 1e-3;
};

/// Load buses (D_i > 0) with |PTDF(target, i)| > eps, ascending bus index.
std::vector<int> sensitive_buses(const net::Network& net, const net::PtdfMatrix& ptdf,
                                 int target_branch, double eps = 1e-4);

/// Same set ordered by ascending |PTDF|, ties by bus id; the deterministic
/// pinning order used for threshold calibration.
std::vector<int> sensitive_buses_by_ptdf(const net::Network& net, const net::PtdfMatrix& ptdf,
                                         int target_branch, double eps = 1e-4);

/// Worst-case LR attack against `target_branch`: maximizes the physical
/// flow wedge in the direction of the target's pre-attack flow, subject to
/// per-bus bounds |dev_i| <= alpha * D_i, zero net deviation, and zero
/// deviation at each bus in `pinned` (dense bus indices).  `base` is the
/// clean-load dispatch used for the flow direction; computed when null.
AttackVector worst_case_attack(const net::Network& net, const net::PtdfMatrix& ptdf,
                               const net::LoadVector& forecast, int target_branch, double alpha,
                               const std::vector<int>& pinned = {},
                               const sced::DispatchSolution* base = nullptr,
                               const AttackOptions& options = {});

/// Random LR attack: pins `d` sensitive buses drawn uniformly without
/// replacement (reproducible from `seed`), then solves the worst-case LP.
AttackVector random_attack(const net::Network& net, const net::PtdfMatrix& ptdf,
                           const net::LoadVector& forecast, int target_branch, double alpha,
                           int d, std::uint64_t seed,
                           const sced::DispatchSolution* base = nullptr,
                           const AttackOptions& options = {});

struct MinAlphaResult {
  bool vulnerable = false;
  double alpha = 0.0;  // meaningful only when vulnerable
};

struct MinAlphaOptions {
  double alpha_cap = 0.10;
  double rel_tol = 1e-3;  // relative width of the final bracket
  int max_probes = 40;
};

/// Smallest load shift factor whose worst-case attack drives the target's
/// physical flow magnitude to at least (1 + overflow_fraction) * rating.
/// Uses the linearity of the attack wedge in alpha for the initial
/// estimate, then verifies and refines with bisection probes.
MinAlphaResult min_alpha(const net::Network& net, const net::PtdfMatrix& ptdf,
                         const net::LoadVector& forecast, int target_branch,
                         double overflow_fraction, const MinAlphaOptions& options = {},
                         const sced::DispatchSolution* base = nullptr,
                         const AttackOptions& attack_options = {});

/// Noise-error vector: per-bus truncated draws (sigma or scale
/// alpha * D_i / 3.1, rejection-resampled into [-alpha D_i, +alpha D_i]),
/// then shifted proportionally within bounds so the net load change stays
/// below `noise_balance_tol` of total load.
NoiseVector gen_noise(const net::Network& net, const net::LoadVector& forecast, double alpha,
                      NoiseFamily family, std::uint64_t seed, const AttackOptions& options = {});

/// Two-stage evaluation of a deviation vector: the operator dispatches on
/// the contaminated loads D + dev, then flows are recomputed against the
/// actual loads D.
struct FlowAssessment {
  sced::DispatchSolution dispatch;      // SCED over contaminated loads
  Eigen::VectorXd physical_flows;       // MW per branch over actual loads
  double control_room_flow = 0.0;       // target branch, contaminated loads
  double physical_flow = 0.0;           // target branch, actual loads
  bool dispatch_feasible = false;
};

FlowAssessment assess_deviation(const net::Network& net, const net::PtdfMatrix& ptdf,
                                const net::LoadVector& forecast,
                                const Eigen::VectorXd& deviations, int target_branch);

/// Stream-split mix for per-scenario RNG seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

}  // namespace gridsec::attack
