#include "gridsec/rtlrta.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>

namespace gridsec::rtlrta {

int npdsb(const AssetSignature& sig, const net::LoadVector& forecast,
          const net::LoadVector& se_loads) {
  if (forecast.size() != se_loads.size() || forecast.size() != sig.reference_signs.size()) {
    throw std::invalid_argument("npdsb: load vector dimensions do not match the signature");
  }
  int count = 0;
  for (int i = 0; i < forecast.size(); ++i) {
    const double ref = sig.reference_signs[i];
    if (ref == 0.0) continue;
    const double dev = se_loads[i] - forecast[i];
    if (dev == 0.0) continue;
    const double sign = dev > 0 ? 1.0 : -1.0;
    if (sign == ref && std::abs(dev) >= sig.alpha_startpoint * forecast[i]) ++count;
  }
  return count;
}

DetectionReport scan(const std::vector<AssetSignature>& signatures,
                     const net::LoadVector& forecast, const net::LoadVector& se_loads,
                     long snapshot_id) {
  const auto t0 = std::chrono::steady_clock::now();
  DetectionReport report;
  report.snapshot_id = snapshot_id;
  for (const AssetSignature& sig : signatures) {
    const int value = npdsb(sig, forecast, se_loads);
    report.npdsb_by_branch[sig.branch_id] = value;
    if (sig.vulnerable) {
      report.threshold_by_branch[sig.branch_id] = sig.threshold;
      if (value >= sig.threshold) report.flagged.push_back(sig.branch);
    }
  }
  std::sort(report.flagged.begin(), report.flagged.end());
  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

namespace {

AssetSignature base_signature(const net::Network& net, const net::PtdfMatrix& ptdf,
                              const net::LoadVector& forecast, int target_branch,
                              const CalibrationOptions& options,
                              const sced::DispatchSolution* base) {
  AssetSignature sig;
  sig.branch = target_branch;
  sig.branch_id = net.branch(target_branch).id;
  sig.reference_signs = Eigen::VectorXd::Zero(net.num_buses());

  attack::AttackOptions aopt;
  aopt.sensitivity_eps = options.sensitivity_eps;
  const std::vector<int> sens =
      attack::sensitive_buses(net, ptdf, target_branch, options.sensitivity_eps);
  sig.tnsb = static_cast<int>(sens.size());

  const attack::AttackVector worst = attack::worst_case_attack(
      net, ptdf, forecast, target_branch, options.alpha_cap, {}, base, aopt);
  for (int i : sens) {
    const double v = worst.deviations[i];
    sig.reference_signs[i] = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
  }
  return sig;
}

}  // namespace

std::vector<int> vulnerable_assets(const net::Network& net, const net::PtdfMatrix& ptdf,
                                   const net::LoadVector& forecast,
                                   const CalibrationOptions& options) {
  const sced::DispatchSolution base = sced::solve_sced(net, ptdf, forecast);
  if (base.status != sced::DispatchStatus::optimal) {
    throw net::ValidationError("base SCED is infeasible; cannot screen assets");
  }
  attack::AttackOptions aopt;
  aopt.sensitivity_eps = options.sensitivity_eps;

  std::vector<int> out;
  for (int k = 0; k < net.num_branches(); ++k) {
    if (!net.branch(k).rated()) continue;
    const attack::AttackVector atk =
        attack::worst_case_attack(net, ptdf, forecast, k, options.alpha_cap, {}, &base, aopt);
    if (atk.degenerate) continue;
    const attack::FlowAssessment fa =
        attack::assess_deviation(net, ptdf, forecast, atk.deviations, k);
    if (fa.dispatch_feasible && std::abs(fa.physical_flow) > net.branch(k).rating) {
      out.push_back(k);
    }
  }
  return out;
}

CalibrationResult calibrate_threshold(const net::Network& net, const net::PtdfMatrix& ptdf,
                                      const net::LoadVector& forecast, int target_branch,
                                      const CalibrationOptions& options,
                                      const sced::DispatchSolution* base) {
  sced::DispatchSolution base_local;
  if (!base) {
    base_local = sced::solve_sced(net, ptdf, forecast);
    if (base_local.status != sced::DispatchStatus::optimal) {
      throw net::ValidationError("base SCED is infeasible; cannot calibrate");
    }
    base = &base_local;
  }

  CalibrationResult result;
  result.signature = base_signature(net, ptdf, forecast, target_branch, options, base);
  AssetSignature& sig = result.signature;

  if (!net.branch(target_branch).rated()) return result;  // not vulnerable

  attack::AttackOptions aopt;
  aopt.sensitivity_eps = options.sensitivity_eps;
  attack::MinAlphaOptions mopt;
  mopt.alpha_cap = options.alpha_cap;

  const attack::MinAlphaResult start =
      attack::min_alpha(net, ptdf, forecast, target_branch, 0.0, mopt, base, aopt);
  if (!start.vulnerable) return result;
  sig.alpha_startpoint = start.alpha;

  const attack::MinAlphaResult five =
      attack::min_alpha(net, ptdf, forecast, target_branch, 0.05, mopt, base, aopt);
  sig.alpha_5pct = five.vulnerable ? five.alpha : 0.0;

  const std::vector<int> order =
      attack::sensitive_buses_by_ptdf(net, ptdf, target_branch, options.sensitivity_eps);
  const double rating = net.branch(target_branch).rating;

  std::map<int, CalibrationRow> rows;
  auto evaluate = [&](int d) -> const CalibrationRow& {
    auto it = rows.find(d);
    if (it != rows.end()) return it->second;
    const std::vector<int> pinned(order.begin(), order.begin() + d);
    const attack::AttackVector atk = attack::worst_case_attack(
        net, ptdf, forecast, target_branch, options.alpha_cap, pinned, base, aopt);
    const attack::FlowAssessment fa =
        attack::assess_deviation(net, ptdf, forecast, atk.deviations, target_branch);
    CalibrationRow row;
    row.d = d;
    row.control_room_flow = fa.control_room_flow;
    row.physical_flow = fa.physical_flow;
    row.overflow = fa.dispatch_feasible && std::abs(fa.physical_flow) > rating;
    row.npdsb = npdsb(sig, forecast, forecast + atk.deviations);
    return rows.emplace(d, row).first->second;
  };

  // coarse ascent in d, then binary refinement of the last overflowing d
  const int tnsb = sig.tnsb;
  if (!evaluate(0).overflow) return result;  // inconsistent with min_alpha; treat as safe

  int lo = 0;          // overflows
  int hi = tnsb;       // pin everything: no attack freedom on sensitive buses
  for (int d = options.coarse_step; d < tnsb; d += options.coarse_step) {
    if (evaluate(d).overflow) {
      lo = d;
    } else {
      hi = d;
      break;
    }
  }
  if (hi == tnsb) {
    const auto& full = evaluate(tnsb);
    if (full.overflow) {
      // cannot happen for a feasible base case; refuse to calibrate
      throw net::NumericalError("asset overflows with every sensitive bus pinned");
    }
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (evaluate(mid).overflow) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  sig.vulnerable = true;
  sig.weakest_d = lo;
  sig.weakest_npdsb = evaluate(lo).npdsb;
  if (options.threshold_override) {
    sig.threshold = *options.threshold_override;
  } else {
    sig.threshold = std::max(1, static_cast<int>(std::floor(sig.weakest_npdsb * options.margin_factor)));
  }

  result.rows.reserve(rows.size());
  for (const auto& [d, row] : rows) result.rows.push_back(row);
  return result;
}

namespace {
using json = nlohmann::json;
}

std::string signatures_to_json(const std::vector<AssetSignature>& sigs, std::uint64_t fingerprint,
                               double alpha_cap) {
  json doc;
  doc["schema"] = 1;
  doc["case_fingerprint"] = fingerprint;
  doc["alpha_cap"] = alpha_cap;
  json arr = json::array();
  for (const auto& s : sigs) {
    json js;
    js["branch"] = s.branch;
    js["branch_id"] = s.branch_id;
    js["alpha_startpoint"] = s.alpha_startpoint;
    js["alpha_5pct"] = s.alpha_5pct;
    js["tnsb"] = s.tnsb;
    js["vulnerable"] = s.vulnerable;
    js["threshold"] = s.threshold;
    js["weakest_d"] = s.weakest_d;
    js["weakest_npdsb"] = s.weakest_npdsb;
    json signs = json::object();
    for (int i = 0; i < s.reference_signs.size(); ++i) {
      if (s.reference_signs[i] != 0.0) {
        signs[std::to_string(i)] = s.reference_signs[i] > 0 ? 1 : -1;
      }
    }
    js["reference_signs"] = std::move(signs);
    js["num_buses"] = static_cast<int>(s.reference_signs.size());
    arr.push_back(std::move(js));
  }
  doc["signatures"] = std::move(arr);
  return doc.dump(2);
}

std::optional<std::vector<AssetSignature>> signatures_from_json(const std::string& text,
                                                                std::uint64_t fingerprint,
                                                                double alpha_cap) {
  json doc;
  try {
    doc = json::parse(text);
    if (doc.value("schema", 0) != 1) return std::nullopt;
    if (doc.value("case_fingerprint", std::uint64_t{0}) != fingerprint) return std::nullopt;
    if (doc.value("alpha_cap", -1.0) != alpha_cap) return std::nullopt;
    std::vector<AssetSignature> out;
    for (const auto& js : doc.at("signatures")) {
      AssetSignature s;
      s.branch = js.at("branch").get<int>();
      s.branch_id = js.at("branch_id").get<int>();
      s.alpha_startpoint = js.at("alpha_startpoint").get<double>();
      s.alpha_5pct = js.value("alpha_5pct", 0.0);
      s.tnsb = js.at("tnsb").get<int>();
      s.vulnerable = js.at("vulnerable").get<bool>();
      s.threshold = js.at("threshold").get<int>();
      s.weakest_d = js.value("weakest_d", 0);
      s.weakest_npdsb = js.value("weakest_npdsb", 0);
      s.reference_signs = Eigen::VectorXd::Zero(js.at("num_buses").get<int>());
      for (const auto& [key, val] : js.at("reference_signs").items()) {
        s.reference_signs[std::stoi(key)] = val.get<int>();
      }
      out.push_back(std::move(s));
    }
    return out;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

}  // namespace gridsec::rtlrta
