#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "gridsec/attack.hpp"
#include "gridsec/network.hpp"
#include "gridsec/ptdf.hpp"

namespace gridsec::rtlrta {

/// Per-asset detection signature: the expected deviation direction at each
/// sensitive bus (from one worst-case attack solve, cached), the start-point
/// shift factor, and the calibrated NPDSB threshold.  Immutable during
/// scanning; rebuild when topology or forecast changes.
struct AssetSignature {
  int branch = -1;     // branch index
  int branch_id = 0;   // case branch id
  Eigen::VectorXd reference_signs;  // -1/0/+1 per bus, nonzero only on sensitive buses
  double alpha_startpoint = 0.0;
  double alpha_5pct = 0.0;  // min shift factor for a 5% overflow; 0 when unreached
  int tnsb = 0;
  bool vulnerable = false;
  int threshold = 0;     // NPDSB flag level, meaningful when vulnerable
  int weakest_d = 0;     // largest pin count whose attack still overflows
  int weakest_npdsb = 0; // NPDSB of that weakest effective attack
};

/// Number of proper deviations at sensitive buses: buses whose deviation
/// matches the reference sign with magnitude >= alpha_startpoint * D_i.
int npdsb(const AssetSignature& sig, const net::LoadVector& forecast,
          const net::LoadVector& se_loads);

struct DetectionReport {
  long snapshot_id = 0;
  std::map<int, int> npdsb_by_branch;      // branch id -> NPDSB
  std::map<int, int> threshold_by_branch;  // branch id -> threshold
  std::vector<int> flagged;               // branch indices with NPDSB >= threshold
  double elapsed_ms = 0.0;

  bool attack_detected() const { return !flagged.empty(); }
};

/// Evaluate all signatures against one SE snapshot; flags every vulnerable
/// asset whose NPDSB reaches its threshold.
DetectionReport scan(const std::vector<AssetSignature>& signatures,
                     const net::LoadVector& forecast, const net::LoadVector& se_loads,
                     long snapshot_id = 0);

struct CalibrationRow {
  int d = 0;
  double control_room_flow = 0.0;
  double physical_flow = 0.0;
  int npdsb = 0;
  bool overflow = false;
};

struct CalibrationResult {
  AssetSignature signature;
  std::vector<CalibrationRow> rows;  // one per evaluated pin count, ascending d
};

struct CalibrationOptions {
  double alpha_cap = 0.10;
  /// threshold = floor(weakest NPDSB * margin_factor), unless overridden.
  double margin_factor = 0.98;
  std::optional<int> threshold_override;
  double sensitivity_eps = 1e-4;
  int coarse_step = 50;
};

/// Calibrate one asset: derive reference signs from the unpinned worst-case
/// attack, find the start-point shift factor, then sweep the pin count d
/// over the smallest-|PTDF| ordering (coarse steps, binary refinement) for
/// the weakest attack that still overflows the asset.
CalibrationResult calibrate_threshold(const net::Network& net, const net::PtdfMatrix& ptdf,
                                      const net::LoadVector& forecast, int target_branch,
                                      const CalibrationOptions& options = {},
                                      const sced::DispatchSolution* base = nullptr);

/// Rated branches whose worst-case attack at alpha_cap produces a physical
/// overflow; the calibration pre-screen.
std::vector<int> vulnerable_assets(const net::Network& net, const net::PtdfMatrix& ptdf,
                                   const net::LoadVector& forecast,
                                   const CalibrationOptions& options = {});

/// JSON signature cache, keyed by case fingerprint and alpha_cap; load
/// returns nothing on any mismatch.
std::string signatures_to_json(const std::vector<AssetSignature>& sigs, std::uint64_t fingerprint,
                               double alpha_cap);
std::optional<std::vector<AssetSignature>> signatures_from_json(const std::string& text,
                                                                std::uint64_t fingerprint,
                                                                double alpha_cap);

}  // namespace gridsec::rtlrta
