#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridsec::net {

/// Rating sentinel for branches the source case marks as unconstrained
/// (MATPOWER uses RATE_A = 0 for "no limit").
inline constexpr double kUnlimitedRating = std::numeric_limits<double>::infinity();

struct Bus {
  int id = 0;
  double forecast_load = 0.0;  // MW
  bool zero_injection = false; // derived: no load and no generator
};

struct Branch {
  int id = 0;      // 1-based position in the source case
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;  // per-unit, > 0
  double rating = kUnlimitedRating;  // MW

  bool rated() const { return std::isfinite(rating); }
};

struct Generator {
  int id = 0;
  int bus = 0;
  double p_min = 0.0;  // MW
  double p_max = 0.0;  // MW
  double cost = 0.0;   // $/MWh, linear
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-bus MW values aligned with Network bus indices.
using LoadVector = Eigen::VectorXd;

/// Immutable validated grid model.  Construction checks every structural
/// invariant (unique ids, one reference bus, connectivity over in-service
/// branches, positive reactances, adequate generation capacity) and throws
/// ValidationError with a diagnostic when one fails.  Instances are safe to
/// share across threads.
class Network {
 public:
  Network(std::vector<Bus> buses, std::vector<Branch> branches,
          std::vector<Generator> generators, int reference_bus_id,
          double base_mva = 100.0);

  int num_buses() const { return static_cast<int>(buses_.size()); }
  int num_branches() const { return static_cast<int>(branches_.size()); }
  int num_generators() const { return static_cast<int>(generators_.size()); }

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<Generator>& generators() const { return generators_; }

  const Bus& bus(int index) const { return buses_[index]; }
  const Branch& branch(int index) const { return branches_[index]; }
  const Generator& generator(int index) const { return generators_[index]; }

  int reference_bus_id() const { return reference_bus_id_; }
  int reference_index() const { return reference_index_; }
  double base_mva() const { return base_mva_; }

  /// Bus id -> dense index; throws ValidationError for unknown ids.
  int bus_index(int bus_id) const;
  bool has_bus(int bus_id) const;

  /// Branch endpoints as dense bus indices.
  int from_index(int branch_index) const { return from_index_[branch_index]; }
  int to_index(int branch_index) const { return to_index_[branch_index]; }

  /// Generator indices attached to a bus (dense bus index).
  const std::vector<int>& generators_at(int bus_index) const {
    return gens_at_bus_[bus_index];
  }

  LoadVector forecast_loads() const;
  double total_load() const { return total_load_; }
  double total_p_max() const { return total_p_max_; }

 private:
  void validate() const;

  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::vector<Generator> generators_;
  int reference_bus_id_ = 0;
  int reference_index_ = -1;
  double base_mva_ = 100.0;

  std::vector<int> from_index_, to_index_;
  std::vector<std::vector<int>> gens_at_bus_;
  std::vector<std::pair<int, int>> id_index_;  // sorted (bus id, index)
  double total_load_ = 0.0;
  double total_p_max_ = 0.0;
};

/// FNV-1a digest of the structural content, used to key signature caches.
std::uint64_t case_fingerprint(const Network& net);

}  // namespace gridsec::net
