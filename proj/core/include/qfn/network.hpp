#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qfn/common.hpp"

namespace qfn {

enum class TopologyKind { star, line, ring, tree, mesh, single_hop };

TopologyKind topology_from_string(const std::string& s);
std::string to_string(TopologyKind k);

// Node 0 is the coordinator, node n+1 is worker n.
class NetworkModel {
 public:
  NetworkModel() = default;
  NetworkModel(int num_workers, std::vector<std::array<int, 3>> edges);  // (a, b, hop multiplier)

  static NetworkModel make(TopologyKind kind, int num_workers, int stretch = 1, bool coordinator_at_end = true);

  int num_workers() const { return n_workers_; }
  int num_nodes() const { return n_workers_ + 1; }
  static int coordinator() { return 0; }
  static int worker(int n) { return n + 1; }
  int dist(int a, int b) const { return dist_.at(static_cast<std::size_t>(a) * num_nodes() + b); }
  int dist_to_worker(int n) const { return dist(0, worker(n)); }
  int diameter() const;  // coordinator-centric
  const std::vector<std::array<int, 3>>& edges() const { return edges_; }
  std::string kind_name;

 private:
  int n_workers_ = 0;
  std::vector<std::array<int, 3>> edges_;
  std::vector<int> dist_;
};

enum class EprClass { boundary_distribution = 0, result_return = 1, reflection_ancilla = 2, control_distribution = 3 };
constexpr int kEprClasses = 4;
std::string to_string(EprClass c);

struct ResourceLedger {
  std::uint64_t u_ini_calls = 0;
  std::uint64_t leaf_queries = 0;
  std::vector<std::uint64_t> worker_queries;
  std::array<std::uint64_t, kEprClasses> epr{};
  std::map<std::string, int> peak_qubits;
  std::vector<std::string> sync_events;  // zero-cost classical signals, in order

  std::uint64_t epr_total() const;
  void note_qubits(const std::string& processor, int count);
  void add_worker_queries(int n, std::uint64_t q);
};

// epr[cls] += n_qubits * dist(from, to)
void charge_teleport(ResourceLedger& ledger, const NetworkModel& net, int from, int to, int n_qubits, EprClass cls);

struct EprTerms {
  std::uint64_t boundary_result = 0;  // U_ini traffic
  std::uint64_t reflection = 0;       // reflection ancilla round trips
  std::uint64_t control = 0;          // control-qubit distribution
  std::uint64_t total() const { return boundary_result + reflection + control; }
};

// Closed-form EPR for one A_dist run with coordinator precision t and local boundary sizes
// |V_B,n|; every per-worker term is weighted by dist(c, n) when a network is given.
EprTerms closed_form_epr_terms(int n_p, int t, const std::vector<int>& local_boundary_sizes,
                               const NetworkModel* net = nullptr);
// Per-worker single-hop load
std::uint64_t per_worker_epr(int n_p, int t, int local_boundary_size);

}  // namespace qfn
