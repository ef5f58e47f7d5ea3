#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gridsec/cpsced.hpp"
#include "gridsec/network.hpp"
#include "gridsec/ptdf.hpp"
#include "gridsec/rtlrta.hpp"
#include "gridsec/sced.hpp"

namespace gridsec::experiment {

/// Batch-run parameters; serializable as JSON so whole experiments are
/// reproducible from one file plus the master seed.
struct ExperimentConfig {
  std::string case_path;
  double alpha_cap = 0.10;
  std::vector<int> targets;  // branch ids; empty means auto-screen
  int n_attacks = 0;
  int n_gaussian = 0;
  int n_cauchy = 0;
  std::vector<int> d_values{150, 400};
  std::uint64_t master_seed = 1;
  std::string out_dir = ".";
  std::string format = "csv";  // csv | json
  int parallel = 1;
  double margin_factor = 0.98;
  double sensitivity_eps = 1e-4;
  std::string snapshots_path;  // optional JSONL snapshot source for ems
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

/// Case with everything the experiments share: PTDF and the clean-load
/// base dispatch.  Immutable; safe to share across worker threads.
struct CaseBundle {
  net::Network network;
  net::PtdfMatrix ptdf;
  Eigen::VectorXd forecast;
  sced::DispatchSolution base;
  std::vector<std::string> parse_notes;
};

CaseBundle load_bundle(const std::string& case_path);

/// Resolve configured branch ids (or auto-screen) to branch indices.
std::vector<int> resolve_targets(const CaseBundle& bundle, const ExperimentConfig& cfg);

// --- calibrate ------------------------------------------------------------

struct CalibrateOutput {
  std::vector<rtlrta::CalibrationResult> results;
  std::vector<rtlrta::AssetSignature> signatures;
  std::string table_csv;        // Table-style rows per evaluated d
  std::string signatures_json;  // cache document
};

CalibrateOutput run_calibrate(const CaseBundle& bundle, const ExperimentConfig& cfg);

// --- separation -----------------------------------------------------------

struct ScenarioRow {
  long scenario_id = 0;
  std::string kind;  // attack | gaussian | cauchy
  int target_id = 0;
  int npdsb = 0;
  double physical_flow = 0.0;  // MW on the studied branch
  bool flagged = false;        // any-asset detection outcome for the snapshot
  bool overflow5 = false;      // attack rows: >= 5% overflow on its target
};

struct SeparationOutput {
  std::vector<ScenarioRow> rows;
  int attacks_total = 0;
  int attacks_overflowing = 0;  // >= 5% overflow on their target
  int false_negatives = 0;      // overflowing attacks whose target was not flagged
  int noise_total = 0;
  int false_positives = 0;  // noise snapshots flagged on any asset
  std::string csv;
  std::string summary_json;
};

SeparationOutput run_separation(const CaseBundle& bundle, const ExperimentConfig& cfg,
                                const std::vector<rtlrta::AssetSignature>& signatures);

// --- ems ------------------------------------------------------------------

struct EmsRow {
  long snapshot_id = 0;
  int target_id = 0;  // 0 for external snapshots
  int d = -1;
  std::string activated;  // "52-169-264"
  std::string binding;
  double sced_cost = 0.0;
  double cpsced_cost = 0.0;
  double flow_before = 0.0;  // target physical flow under the SCED dispatch
  double flow_after = 0.0;   // and under the final corrected dispatch
  std::string status;        // clean | corrected | uncorrectable
};

struct EmsOutput {
  std::vector<EmsRow> rows;
  std::vector<cpsced::EmsResult> results;
  std::string csv;
  std::string audit_jsonl;  // one audit record per snapshot
  bool any_uncorrectable = false;
};

EmsOutput run_ems(const CaseBundle& bundle, const ExperimentConfig& cfg,
                  const std::vector<rtlrta::AssetSignature>& signatures);

/// Map a function over [0, count) on `parallel` threads, preserving slot
/// order in the output no matter the scheduling.
void parallel_for(int count, int parallel, const std::function<void(int)>& fn);

}  // namespace gridsec::experiment
