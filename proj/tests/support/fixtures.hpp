#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "gridsec/case_io.hpp"
#include "gridsec/network.hpp"
#include "gridsec/ptdf.hpp"
#include "gridsec/sced.hpp"

namespace fixtures {

inline std::filesystem::path path(const std::string& name) {
  return std::filesystem::path(GRIDSEC_FIXTURE_DIR) / name;
}

inline gridsec::net::Network load(const std::string& name) {
  return gridsec::net::load_case(path(name));
}

/// Random connected meshed case for property tests: spanning tree plus
/// chords, loads on most buses, a few generators, every branch rated with
/// comfortable slack over its base-case flow (so SCED is feasible and every
/// target is well-defined).
inline gridsec::net::Network random_network(std::mt19937_64& rng, int nbus) {
  using namespace gridsec;
  std::uniform_real_distribution<double> xdist(0.05, 0.3);
  std::uniform_real_distribution<double> load(10.0, 100.0);
  std::uniform_real_distribution<double> cost(5.0, 50.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<net::Bus> buses(nbus);
  double total_load = 0.0;
  for (int i = 0; i < nbus; ++i) {
    buses[i].id = i + 1;
    if (unit(rng) < 0.65) {
      buses[i].forecast_load = std::round(load(rng) * 10.0) / 10.0;
      total_load += buses[i].forecast_load;
    }
  }

  std::vector<net::Branch> branches;
  int bid = 1;
  for (int i = 1; i < nbus; ++i) {
    net::Branch br;
    br.id = bid++;
    br.from_bus = std::uniform_int_distribution<int>(1, i)(rng);
    br.to_bus = i + 1;
    br.reactance = xdist(rng);
    branches.push_back(br);
  }
  const int chords = std::max(2, nbus / 3);
  for (int c = 0; c < chords; ++c) {
    net::Branch br;
    br.id = bid++;
    br.from_bus = std::uniform_int_distribution<int>(1, nbus)(rng);
    br.to_bus = std::uniform_int_distribution<int>(1, nbus)(rng);
    if (br.from_bus == br.to_bus) continue;
    br.reactance = xdist(rng);
    branches.push_back(br);
  }

  std::vector<net::Generator> gens;
  int gid = 1;
  double cap = 0.0;
  for (int i = 0; i < nbus; ++i) {
    if (unit(rng) < 0.3) {
      net::Generator g;
      g.id = gid++;
      g.bus = i + 1;
      g.p_max = std::round(load(rng) * 30.0) / 10.0;
      g.cost = std::round(cost(rng) * 10.0) / 10.0;
      cap += g.p_max;
      gens.push_back(g);
    }
  }
  // slack unit at the reference keeps every draw feasible
  net::Generator slack;
  slack.id = gid;
  slack.bus = 1;
  slack.p_max = std::max(50.0, 1.3 * total_load - cap);
  slack.cost = 60.0;
  gens.push_back(slack);

  net::Network unrated(buses, branches, gens, /*reference=*/1);

  // rate every branch against its unconstrained base-case flow
  const net::PtdfMatrix ptdf = net::compute_ptdf(unrated);
  const sced::DispatchSolution base = sced::solve_sced(unrated, ptdf, unrated.forecast_loads());
  for (size_t k = 0; k < branches.size(); ++k) {
    branches[k].rating = 2.0 * std::abs(base.control_room_flows[static_cast<int>(k)]) + 50.0;
  }
  return net::Network(buses, branches, gens, 1);
}

/// Nine-bus two-region case: cheap generation in buses 1-4, load pocket in
/// 5-9, two import ties.  Tie 2-5 is rated below its free flow so the base
/// dispatch congests it; tie 4-8 (the attack target) keeps a few percent of
/// margin, so a worst-case LR attack overflows it only once alpha crosses a
/// strictly positive start point.  Returns the target branch index via
/// `target`.
inline gridsec::net::Network vulnerable_nine_bus(int* target = nullptr) {
  using namespace gridsec;
  std::vector<net::Bus> buses(9);
  const double loads[9] = {0, 0, 40, 0, 60, 70, 50, 40, 60};
  for (int i = 0; i < 9; ++i) {
    buses[i].id = i + 1;
    buses[i].forecast_load = loads[i];
  }
  std::vector<net::Generator> gens{
      {1, 1, 0.0, 400.0, 10.0},
      {2, 7, 0.0, 200.0, 45.0},
      {3, 9, 0.0, 100.0, 55.0},
  };
  std::vector<net::Branch> branches{
      {1, 1, 2, 0.06, net::kUnlimitedRating},  // region A ring
      {2, 2, 3, 0.08, net::kUnlimitedRating},
      {3, 3, 4, 0.07, net::kUnlimitedRating},
      {4, 4, 1, 0.06, net::kUnlimitedRating},
      {5, 5, 6, 0.09, net::kUnlimitedRating},  // region B ring
      {6, 6, 7, 0.08, net::kUnlimitedRating},
      {7, 7, 8, 0.10, net::kUnlimitedRating},
      {8, 8, 9, 0.09, net::kUnlimitedRating},
      {9, 9, 5, 0.08, net::kUnlimitedRating},
      {10, 2, 5, 0.08, net::kUnlimitedRating},  // tie: the target
      {11, 4, 8, 0.12, net::kUnlimitedRating},  // tie: backup
  };
  net::Network unrated(buses, branches, gens, 1);
  const net::PtdfMatrix ptdf0 = net::compute_ptdf(unrated);
  const sced::DispatchSolution free_flow =
      sced::solve_sced(unrated, ptdf0, unrated.forecast_loads());
  branches[9].rating = 0.93 * std::abs(free_flow.control_room_flows[9]);

  net::Network capped(buses, branches, gens, 1);
  const net::PtdfMatrix ptdf1 = net::compute_ptdf(capped);
  const sced::DispatchSolution congested =
      sced::solve_sced(capped, ptdf1, capped.forecast_loads());
  branches[10].rating = 1.05 * std::abs(congested.control_room_flows[10]);
  for (int k = 0; k < 9; ++k) {
    branches[k].rating = 2.5 * std::abs(congested.control_room_flows[k]) + 30.0;
  }
  if (target) *target = 10;
  return net::Network(buses, branches, gens, 1);
}

}  // namespace fixtures
