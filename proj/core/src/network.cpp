#include "gridsec/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace gridsec::net {

Network::Network(std::vector<Bus> buses, std::vector<Branch> branches,
                 std::vector<Generator> generators, int reference_bus_id, double base_mva)
    : buses_(std::move(buses)),
      branches_(std::move(branches)),
      generators_(std::move(generators)),
      reference_bus_id_(reference_bus_id),
      base_mva_(base_mva) {
  id_index_.reserve(buses_.size());
  for (int i = 0; i < num_buses(); ++i) id_index_.push_back({buses_[i].id, i});
  std::sort(id_index_.begin(), id_index_.end());
  for (size_t i = 1; i < id_index_.size(); ++i) {
    if (id_index_[i].first == id_index_[i - 1].first) {
      throw ValidationError("duplicate bus id " + std::to_string(id_index_[i].first));
    }
  }

  if (!has_bus(reference_bus_id_)) {
    throw ValidationError("reference bus " + std::to_string(reference_bus_id_) +
                          " not present in case");
  }
  reference_index_ = bus_index(reference_bus_id_);

  std::stable_sort(generators_.begin(), generators_.end(),
                   [](const Generator& a, const Generator& b) { return a.id < b.id; });

  from_index_.resize(branches_.size());
  to_index_.resize(branches_.size());
  for (int k = 0; k < num_branches(); ++k) {
    const Branch& br = branches_[k];
    if (!has_bus(br.from_bus) || !has_bus(br.to_bus)) {
      throw ValidationError("branch " + std::to_string(br.id) + " references unknown bus");
    }
    from_index_[k] = bus_index(br.from_bus);
    to_index_[k] = bus_index(br.to_bus);
  }

  gens_at_bus_.resize(buses_.size());
  for (int g = 0; g < num_generators(); ++g) {
    if (!has_bus(generators_[g].bus)) {
      throw ValidationError("generator " + std::to_string(generators_[g].id) +
                            " references unknown bus " + std::to_string(generators_[g].bus));
    }
    gens_at_bus_[bus_index(generators_[g].bus)].push_back(g);
  }

  for (auto& b : buses_) b.zero_injection = false;
  total_load_ = 0.0;
  for (int i = 0; i < num_buses(); ++i) {
    total_load_ += buses_[i].forecast_load;
    buses_[i].zero_injection = buses_[i].forecast_load == 0.0 && gens_at_bus_[i].empty();
  }
  total_p_max_ = 0.0;
  for (const auto& g : generators_) total_p_max_ += g.p_max;

  validate();
}

void Network::validate() const {
  for (const Bus& b : buses_) {
    if (!(b.forecast_load >= 0.0) || !std::isfinite(b.forecast_load)) {
      throw ValidationError("bus " + std::to_string(b.id) + ": forecast load must be >= 0, got " +
                            std::to_string(b.forecast_load));
    }
  }
  for (const Branch& br : branches_) {
    if (br.from_bus == br.to_bus) {
      throw ValidationError("branch " + std::to_string(br.id) + ": from and to bus coincide");
    }
    if (!(br.reactance > 0.0) || !std::isfinite(br.reactance)) {
      throw ValidationError("branch " + std::to_string(br.id) + ": reactance must be > 0");
    }
    if (!(br.rating > 0.0)) {
      throw ValidationError("branch " + std::to_string(br.id) + ": rating must be positive");
    }
  }
  for (const Generator& g : generators_) {
    if (!(0.0 <= g.p_min && g.p_min <= g.p_max) || !std::isfinite(g.p_max)) {
      throw ValidationError("generator " + std::to_string(g.id) +
                            ": requires 0 <= p_min <= p_max");
    }
    if (!(g.cost >= 0.0) || !std::isfinite(g.cost)) {
      throw ValidationError("generator " + std::to_string(g.id) + ": cost must be finite and >= 0");
    }
  }

  // connectivity over in-service branches (BFS from the reference bus)
  std::vector<std::vector<int>> adj(buses_.size());
  for (int k = 0; k < num_branches(); ++k) {
    adj[from_index_[k]].push_back(to_index_[k]);
    adj[to_index_[k]].push_back(from_index_[k]);
  }
  std::vector<char> seen(buses_.size(), 0);
  std::vector<int> queue{reference_index_};
  seen[reference_index_] = 1;
  size_t head = 0;
  while (head < queue.size()) {
    const int u = queue[head++];
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  if (queue.size() != buses_.size()) {
    int unreached = 0;
    for (int i = 0; i < num_buses(); ++i) {
      if (!seen[i]) {
        unreached = buses_[i].id;
        break;
      }
    }
    throw ValidationError("network is not connected: bus " + std::to_string(unreached) +
                          " unreachable from reference bus " + std::to_string(reference_bus_id_));
  }

  if (total_p_max_ < total_load_) {
    throw ValidationError("total generation capacity " + std::to_string(total_p_max_) +
                          " MW is below total forecast load " + std::to_string(total_load_) +
                          " MW");
  }
}

bool Network::has_bus(int bus_id) const {
  auto it = std::lower_bound(id_index_.begin(), id_index_.end(), std::make_pair(bus_id, -1));
  return it != id_index_.end() && it->first == bus_id;
}

int Network::bus_index(int bus_id) const {
  auto it = std::lower_bound(id_index_.begin(), id_index_.end(), std::make_pair(bus_id, -1));
  if (it == id_index_.end() || it->first != bus_id) {
    throw ValidationError("unknown bus id " + std::to_string(bus_id));
  }
  return it->second;
}

LoadVector Network::forecast_loads() const {
  LoadVector d(num_buses());
  for (int i = 0; i < num_buses(); ++i) d[i] = buses_[i].forecast_load;
  return d;
}

namespace {

void fnv_mix(std::uint64_t& h, const void* data, size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

void fnv_double(std::uint64_t& h, double v) { fnv_mix(h, &v, sizeof v); }
void fnv_int(std::uint64_t& h, int v) { fnv_mix(h, &v, sizeof v); }

}  // namespace

std::uint64_t case_fingerprint(const Network& net) {
  std::uint64_t h = 1469598103934665603ULL;
  fnv_int(h, net.num_buses());
  fnv_int(h, net.num_branches());
  fnv_int(h, net.num_generators());
  fnv_int(h, net.reference_bus_id());
  for (const auto& b : net.buses()) {
    fnv_int(h, b.id);
    fnv_double(h, b.forecast_load);
  }
  for (const auto& br : net.branches()) {
    fnv_int(h, br.id);
    fnv_int(h, br.from_bus);
    fnv_int(h, br.to_bus);
    fnv_double(h, br.reactance);
    fnv_double(h, std::isfinite(br.rating) ? br.rating : -1.0);
  }
  for (const auto& g : net.generators()) {
    fnv_int(h, g.id);
    fnv_int(h, g.bus);
    fnv_double(h, g.p_min);
    fnv_double(h, g.p_max);
    fnv_double(h, g.cost);
  }
  return h;
}

}  // namespace gridsec::net
