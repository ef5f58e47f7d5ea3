#include "gridsec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "gridsec/attack.hpp"
#include "gridsec/case_io.hpp"

namespace gridsec::experiment {

namespace {

using json = nlohmann::json;

std::string mw(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string join_ids(const net::Network& net, const std::vector<int>& branch_indices) {
  std::string out;
  for (size_t i = 0; i < branch_indices.size(); ++i) {
    if (i) out += "-";
    out += std::to_string(net.branch(branch_indices[i]).id);
  }
  return out.empty() ? "none" : out;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw net::ParseError(std::string("config JSON parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.case_path = doc.value("case", doc.value("case_path", cfg.case_path));
    cfg.alpha_cap = doc.value("alpha_cap", cfg.alpha_cap);
    if (doc.contains("targets") && !doc["targets"].is_string()) {
      cfg.targets = doc["targets"].get<std::vector<int>>();
    }
    cfg.n_attacks = doc.value("n_attacks", cfg.n_attacks);
    cfg.n_gaussian = doc.value("n_gaussian", cfg.n_gaussian);
    cfg.n_cauchy = doc.value("n_cauchy", cfg.n_cauchy);
    if (doc.contains("d_values")) cfg.d_values = doc["d_values"].get<std::vector<int>>();
    cfg.master_seed = doc.value("seed", cfg.master_seed);
    cfg.out_dir = doc.value("out", doc.value("out_dir", cfg.out_dir));
    cfg.format = doc.value("format", cfg.format);
    cfg.parallel = doc.value("parallel", cfg.parallel);
    cfg.margin_factor = doc.value("margin_factor", cfg.margin_factor);
    cfg.sensitivity_eps = doc.value("sensitivity_eps", cfg.sensitivity_eps);
    cfg.snapshots_path = doc.value("snapshots", cfg.snapshots_path);
  } catch (const json::exception& e) {
    throw net::ParseError(std::string("config field error: ") + e.what());
  }
  if (cfg.n_attacks < 0 || cfg.n_gaussian < 0 || cfg.n_cauchy < 0) {
    throw net::ParseError("scenario counts must be >= 0");
  }
  if (cfg.parallel < 1) cfg.parallel = 1;
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["case"] = cfg.case_path;
  doc["alpha_cap"] = cfg.alpha_cap;
  doc["targets"] = cfg.targets;
  doc["n_attacks"] = cfg.n_attacks;
  doc["n_gaussian"] = cfg.n_gaussian;
  doc["n_cauchy"] = cfg.n_cauchy;
  doc["d_values"] = cfg.d_values;
  doc["seed"] = cfg.master_seed;
  doc["out"] = cfg.out_dir;
  doc["format"] = cfg.format;
  doc["parallel"] = cfg.parallel;
  doc["margin_factor"] = cfg.margin_factor;
  doc["sensitivity_eps"] = cfg.sensitivity_eps;
  if (!cfg.snapshots_path.empty()) doc["snapshots"] = cfg.snapshots_path;
  return doc.dump(2);
}

CaseBundle load_bundle(const std::string& case_path) {
  std::vector<std::string> notes;
  net::Network network = net::load_case(case_path, &notes);
  net::PtdfMatrix ptdf = net::compute_ptdf(network);
  Eigen::VectorXd forecast = network.forecast_loads();
  sced::DispatchSolution base = sced::solve_sced(network, ptdf, forecast);
  if (base.status != sced::DispatchStatus::optimal) {
    throw net::ValidationError("base-case SCED over the forecast loads is infeasible");
  }
  return CaseBundle{std::move(network), std::move(ptdf), std::move(forecast), std::move(base),
                    std::move(notes)};
}

std::vector<int> resolve_targets(const CaseBundle& bundle, const ExperimentConfig& cfg) {
  if (!cfg.targets.empty()) {
    std::vector<int> out;
    for (int id : cfg.targets) {
      int found = -1;
      for (int k = 0; k < bundle.network.num_branches(); ++k) {
        if (bundle.network.branch(k).id == id) {
          found = k;
          break;
        }
      }
      if (found < 0) throw net::ValidationError("unknown target branch id " + std::to_string(id));
      out.push_back(found);
    }
    return out;
  }
  rtlrta::CalibrationOptions copt;
  copt.alpha_cap = cfg.alpha_cap;
  copt.sensitivity_eps = cfg.sensitivity_eps;
  return rtlrta::vulnerable_assets(bundle.network, bundle.ptdf, bundle.forecast, copt);
}

void parallel_for(int count, int parallel, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(parallel, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mu);
          failed.store(true);
          if (error.empty()) error = e.what();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load()) throw std::runtime_error("scenario worker failed: " + error);
}

// --- calibrate --------------------------------------------------------------

CalibrateOutput run_calibrate(const CaseBundle& bundle, const ExperimentConfig& cfg) {
  const std::vector<int> targets = resolve_targets(bundle, cfg);

  rtlrta::CalibrationOptions copt;
  copt.alpha_cap = cfg.alpha_cap;
  copt.margin_factor = cfg.margin_factor;
  copt.sensitivity_eps = cfg.sensitivity_eps;

  CalibrateOutput out;
  out.results.resize(targets.size());
  parallel_for(static_cast<int>(targets.size()), cfg.parallel, [&](int i) {
    out.results[i] = rtlrta::calibrate_threshold(bundle.network, bundle.ptdf, bundle.forecast,
                                                 targets[i], copt, &bundle.base);
  });

  std::ostringstream csv;
  csv << "target,d,control_room_flow_mw,physical_flow_mw,npdsb,flow_limit_mw,overflow,"
         "alpha_startpoint,tnsb,threshold,vulnerable\n";
  for (const auto& res : out.results) {
    const auto& sig = res.signature;
    const double limit = bundle.network.branch(sig.branch).rated()
                             ? bundle.network.branch(sig.branch).rating
                             : -1.0;
    if (res.rows.empty()) {
      csv << sig.branch_id << ",,,,," << mw(limit) << ",," << mw(sig.alpha_startpoint) << ","
          << sig.tnsb << ",," << (sig.vulnerable ? "yes" : "no") << "\n";
    }
    for (const auto& row : res.rows) {
      csv << sig.branch_id << "," << row.d << "," << mw(row.control_room_flow) << ","
          << mw(row.physical_flow) << "," << row.npdsb << "," << mw(limit) << ","
          << (row.overflow ? 1 : 0) << "," << mw(sig.alpha_startpoint) << "," << sig.tnsb << ","
          << sig.threshold << "," << (sig.vulnerable ? "yes" : "no") << "\n";
    }
    out.signatures.push_back(sig);
  }
  out.table_csv = csv.str();
  out.signatures_json = rtlrta::signatures_to_json(
      out.signatures, net::case_fingerprint(bundle.network), cfg.alpha_cap);
  return out;
}

// --- separation --------------------------------------------------------------

SeparationOutput run_separation(const CaseBundle& bundle, const ExperimentConfig& cfg,
                                const std::vector<rtlrta::AssetSignature>& signatures) {
  SeparationOutput out;

  std::vector<const rtlrta::AssetSignature*> targets;
  for (const auto& s : signatures) {
    if (s.vulnerable) targets.push_back(&s);
  }

  attack::AttackOptions aopt;
  aopt.sensitivity_eps = cfg.sensitivity_eps;

  struct AttackResult {
    ScenarioRow row;
    bool target_flagged = false;
    bool valid = false;
  };

  long next_id = 0;

  // attack scenarios, n_attacks per vulnerable target
  for (size_t tix = 0; tix < targets.size(); ++tix) {
    const rtlrta::AssetSignature& sig = *targets[tix];
    const double rating = bundle.network.branch(sig.branch).rating;
    const double mult_lo =
        sig.alpha_5pct > 0.0 ? std::clamp(sig.alpha_5pct / cfg.alpha_cap, 0.0, 1.0) : 0.52;

    std::vector<AttackResult> results(cfg.n_attacks);
    parallel_for(cfg.n_attacks, cfg.parallel, [&](int i) {
      const std::uint64_t seed =
          attack::derive_seed(cfg.master_seed, 1000 + sig.branch_id, static_cast<std::uint64_t>(i));
      std::mt19937_64 rng(seed);
      const int d_raw =
          cfg.d_values.empty()
              ? 0
              : cfg.d_values[std::uniform_int_distribution<size_t>(0, cfg.d_values.size() - 1)(rng)];
      const int d = std::min(d_raw, sig.tnsb);
      const double mult = std::uniform_real_distribution<double>(mult_lo, 1.0)(rng);
      const double alpha = cfg.alpha_cap * mult;

      const attack::AttackVector atk =
          attack::random_attack(bundle.network, bundle.ptdf, bundle.forecast, sig.branch, alpha, d,
                                rng(), &bundle.base, aopt);
      const attack::FlowAssessment fa = attack::assess_deviation(
          bundle.network, bundle.ptdf, bundle.forecast, atk.deviations, sig.branch);
      if (!fa.dispatch_feasible) return;  // leave slot invalid

      const rtlrta::DetectionReport report =
          rtlrta::scan(signatures, bundle.forecast, bundle.forecast + atk.deviations, i);

      AttackResult& r = results[i];
      r.valid = true;
      r.row.kind = "attack";
      r.row.target_id = sig.branch_id;
      r.row.npdsb = report.npdsb_by_branch.at(sig.branch_id);
      r.row.physical_flow = fa.physical_flow;
      r.row.flagged = report.attack_detected();
      r.row.overflow5 = std::abs(fa.physical_flow) >= 1.05 * rating;
      r.target_flagged =
          std::find(report.flagged.begin(), report.flagged.end(), sig.branch) !=
          report.flagged.end();
    });

    for (auto& r : results) {
      if (!r.valid) continue;
      r.row.scenario_id = next_id++;
      ++out.attacks_total;
      if (r.row.overflow5) {
        ++out.attacks_overflowing;
        if (!r.target_flagged) ++out.false_negatives;
      }
      out.rows.push_back(r.row);
    }
  }

  // noise scenarios, shared across targets (one dispatch per vector)
  struct NoiseResult {
    Eigen::VectorXd physical_flows;
    bool dispatch_ok = false;
    bool flagged = false;
    rtlrta::DetectionReport report;
  };
  const int n_noise = cfg.n_gaussian + cfg.n_cauchy;
  std::vector<NoiseResult> noise(n_noise);
  parallel_for(n_noise, cfg.parallel, [&](int i) {
    const bool gaussian = i < cfg.n_gaussian;
    const std::uint64_t seed = attack::derive_seed(cfg.master_seed, gaussian ? 1 : 2,
                                                   static_cast<std::uint64_t>(i));
    const attack::NoiseVector nv = attack::gen_noise(
        bundle.network, bundle.forecast, cfg.alpha_cap,
        gaussian ? attack::NoiseFamily::gaussian : attack::NoiseFamily::cauchy, seed, aopt);
    NoiseResult& r = noise[i];
    r.report = rtlrta::scan(signatures, bundle.forecast, bundle.forecast + nv.deviations, i);
    r.flagged = r.report.attack_detected();
    const attack::FlowAssessment fa = attack::assess_deviation(
        bundle.network, bundle.ptdf, bundle.forecast, nv.deviations, 0);
    r.dispatch_ok = fa.dispatch_feasible;
    if (fa.dispatch_feasible) r.physical_flows = fa.physical_flows;
  });

  for (int i = 0; i < n_noise; ++i) {
    ++out.noise_total;
    if (noise[i].flagged) ++out.false_positives;
    const std::string kind = i < cfg.n_gaussian ? "gaussian" : "cauchy";
    const long scenario_id = next_id++;
    for (const auto* sigp : targets) {
      ScenarioRow row;
      row.scenario_id = scenario_id;
      row.kind = kind;
      row.target_id = sigp->branch_id;
      row.npdsb = noise[i].report.npdsb_by_branch.at(sigp->branch_id);
      row.physical_flow = noise[i].dispatch_ok ? noise[i].physical_flows[sigp->branch] : 0.0;
      row.flagged = noise[i].flagged;
      row.overflow5 = false;
      out.rows.push_back(row);
    }
  }

  std::ostringstream csv;
  csv << "scenario_id,kind,target,npdsb,physical_flow_mw,flagged\n";
  for (const auto& r : out.rows) {
    csv << r.scenario_id << "," << r.kind << "," << r.target_id << "," << r.npdsb << ","
        << mw(r.physical_flow) << "," << (r.flagged ? 1 : 0) << "\n";
  }
  out.csv = csv.str();

  json summary;
  summary["attacks_total"] = out.attacks_total;
  summary["attacks_overflowing_5pct"] = out.attacks_overflowing;
  summary["false_negatives"] = out.false_negatives;
  summary["noise_total"] = out.noise_total;
  summary["false_positives"] = out.false_positives;
  out.summary_json = summary.dump(2);
  return out;
}

// --- ems ---------------------------------------------------------------------

namespace {

struct EmsSnapshot {
  long snapshot_id = 0;
  int target_id = 0;
  int target_branch = -1;
  int d = -1;
  Eigen::VectorXd se_loads;
};

std::vector<EmsSnapshot> battery_snapshots(const CaseBundle& bundle, const ExperimentConfig& cfg,
                                           const std::vector<rtlrta::AssetSignature>& signatures) {
  attack::AttackOptions aopt;
  aopt.sensitivity_eps = cfg.sensitivity_eps;
  std::vector<EmsSnapshot> out;
  long id = 0;
  for (const auto& sig : signatures) {
    if (!sig.vulnerable) continue;
    for (size_t j = 0; j < cfg.d_values.size(); ++j) {
      const int d = std::min(cfg.d_values[j], sig.tnsb);
      const std::uint64_t seed = attack::derive_seed(cfg.master_seed, 2000 + sig.branch_id, j);
      const attack::AttackVector atk =
          attack::random_attack(bundle.network, bundle.ptdf, bundle.forecast, sig.branch,
                                cfg.alpha_cap, d, seed, &bundle.base, aopt);
      EmsSnapshot snap;
      snap.snapshot_id = id++;
      snap.target_id = sig.branch_id;
      snap.target_branch = sig.branch;
      snap.d = d;
      snap.se_loads = bundle.forecast + atk.deviations;
      out.push_back(std::move(snap));
    }
  }
  return out;
}

std::vector<EmsSnapshot> file_snapshots(const CaseBundle& bundle, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw net::ParseError("cannot open snapshot file " + path);
  std::vector<EmsSnapshot> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
      EmsSnapshot snap;
      snap.snapshot_id = doc.value("snapshot_id", lineno - 1);
      snap.se_loads = Eigen::VectorXd::Zero(bundle.network.num_buses());
      if (doc.at("loads").is_array()) {
        const auto arr = doc["loads"].get<std::vector<double>>();
        if (static_cast<int>(arr.size()) != bundle.network.num_buses()) {
          throw net::ParseError("snapshot line " + std::to_string(lineno) +
                                ": loads array length mismatch");
        }
        for (int i = 0; i < bundle.network.num_buses(); ++i) snap.se_loads[i] = arr[i];
      } else {
        snap.se_loads = bundle.forecast;
        for (const auto& [key, val] : doc["loads"].items()) {
          snap.se_loads[bundle.network.bus_index(std::stoi(key))] = val.get<double>();
        }
      }
      out.push_back(std::move(snap));
    } catch (const json::exception& e) {
      throw net::ParseError("snapshot line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

EmsOutput run_ems(const CaseBundle& bundle, const ExperimentConfig& cfg,
                  const std::vector<rtlrta::AssetSignature>& signatures) {
  const std::vector<EmsSnapshot> snaps =
      cfg.snapshots_path.empty() ? battery_snapshots(bundle, cfg, signatures)
                                 : file_snapshots(bundle, cfg.snapshots_path);

  cpsced::EmsOptions eopt;
  eopt.estimate.alpha_cap = cfg.alpha_cap;
  eopt.estimate.sensitivity_eps = cfg.sensitivity_eps;

  EmsOutput out;
  out.rows.resize(snaps.size());
  out.results.resize(snaps.size());
  std::vector<std::string> audits(snaps.size());

  parallel_for(static_cast<int>(snaps.size()), cfg.parallel, [&](int i) {
    const EmsSnapshot& snap = snaps[i];
    cpsced::EmsResult res =
        cpsced::enhanced_ems_step(bundle.network, bundle.ptdf, bundle.forecast, snap.se_loads,
                                  signatures, eopt, snap.snapshot_id, &bundle.base);

    EmsRow row;
    row.snapshot_id = snap.snapshot_id;
    row.target_id = snap.target_id;
    row.d = snap.d;
    row.sced_cost = res.sced_dispatch.status == sced::DispatchStatus::optimal
                        ? res.sced_dispatch.total_cost
                        : std::nan("");

    const int tb = snap.target_branch;
    if (res.sced_dispatch.status == sced::DispatchStatus::optimal && tb >= 0) {
      row.flow_before =
          bundle.ptdf.flow(tb, res.sced_dispatch.injections(bundle.network, bundle.forecast));
    }
    switch (res.status) {
      case cpsced::EmsStatus::clean:
        row.status = "clean";
        row.cpsced_cost = row.sced_cost;
        row.flow_after = row.flow_before;
        row.activated = "none";
        row.binding = "none";
        break;
      case cpsced::EmsStatus::corrected:
      case cpsced::EmsStatus::uncorrectable: {
        row.status = res.status == cpsced::EmsStatus::corrected ? "corrected" : "uncorrectable";
        row.cpsced_cost = res.cpsced.dispatch.status == sced::DispatchStatus::optimal
                              ? res.cpsced.dispatch.total_cost
                              : std::nan("");
        row.activated = join_ids(bundle.network, res.cpsced.activated_plfsc);
        row.binding = join_ids(bundle.network, res.cpsced.binding_plfsc);
        if (res.cpsced.dispatch.status == sced::DispatchStatus::optimal && tb >= 0) {
          row.flow_after = bundle.ptdf.flow(
              tb, res.cpsced.dispatch.injections(bundle.network, bundle.forecast));
        }
        break;
      }
    }

    json audit;
    audit["snapshot_id"] = snap.snapshot_id;
    audit["status"] = row.status;
    json rep;
    rep["flagged"] = [&] {
      std::vector<int> ids;
      for (int k : res.report.flagged) ids.push_back(bundle.network.branch(k).id);
      return ids;
    }();
    json npdsb_obj = json::object(), thr_obj = json::object();
    for (const auto& [bid, v] : res.report.npdsb_by_branch) npdsb_obj[std::to_string(bid)] = v;
    for (const auto& [bid, v] : res.report.threshold_by_branch) thr_obj[std::to_string(bid)] = v;
    rep["npdsb"] = std::move(npdsb_obj);
    rep["thresholds"] = std::move(thr_obj);
    rep["elapsed_ms"] = res.report.elapsed_ms;
    audit["detection"] = std::move(rep);
    if (res.status != cpsced::EmsStatus::clean) {
      audit["estimate"] = {{"psi_size", res.estimate.psi.size()},
                           {"primary_target",
                            bundle.network.branch(res.estimate.primary_target).id}};
      json trail = json::array();
      for (const auto& it : res.trail) {
        trail.push_back({{"active", join_ids(bundle.network, it.active)},
                         {"binding", join_ids(bundle.network, it.binding)},
                         {"cost", it.cost}});
      }
      audit["iterations"] = std::move(trail);
    }
    audit["sced_cost"] = row.sced_cost;
    audit["cpsced_cost"] = row.cpsced_cost;
    if (!res.residual_violations.empty()) {
      audit["residual_violations"] = [&] {
        std::vector<int> ids;
        for (int k : res.residual_violations) ids.push_back(bundle.network.branch(k).id);
        return ids;
      }();
    }
    audits[i] = audit.dump();

    out.rows[i] = std::move(row);
    out.results[i] = std::move(res);
  });

  std::ostringstream csv;
  csv << "snapshot_id,target,d,activated,binding,sced_cost,cpsced_cost,"
         "target_physical_before_mw,target_physical_after_mw,status\n";
  for (const auto& r : out.rows) {
    if (r.status == "uncorrectable") out.any_uncorrectable = true;
    csv << r.snapshot_id << "," << r.target_id << "," << r.d << "," << r.activated << ","
        << r.binding << "," << mw(r.sced_cost) << "," << mw(r.cpsced_cost) << ","
        << mw(r.flow_before) << "," << mw(r.flow_after) << "," << r.status << "\n";
  }
  out.csv = csv.str();

  std::ostringstream jl;
  for (const auto& a : audits) jl << a << "\n";
  out.audit_jsonl = jl.str();
  return out;
}

}  // namespace gridsec::experiment
