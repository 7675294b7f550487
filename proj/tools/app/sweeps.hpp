#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "runspec.hpp"

namespace qfn::app {

// Runs f(0..n-1) on up to `jobs` threads. Results are written by index, so the merge order is
// independent of scheduling. The first exception is rethrown after all threads join.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(jobs));
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// ---- query sweep: a_dist vs the classical-communication benchmark ----

struct QueryPoint {
  int num_vars = 0;
  int n_b = 0;  // boundary bits
  int r = 0;    // bits per worker
  int n_g = 2;
};

// |V| = 8..13 with r = 2, |V| = 14..20 with r = 3, two workers, b = |V| - 2r
std::vector<QueryPoint> query_sweep_points(const std::vector<int>& num_vars);
std::vector<int> default_query_vars();
PrecisionParams query_sweep_params();  // N_p = 1, delta = 0.25, t_max = 16

struct QueryRow {
  QueryPoint pt;
  PrecisionParams params;
  int t_c = 0;
  std::vector<int> t_n;
  bool simulated = false;
  std::uint64_t u_ini_sim = 0, u_ini_closed = 0;
  std::uint64_t leaf_sim = 0, leaf_closed = 0;
  std::uint64_t epr_sim = 0, epr_closed = 0;
  std::uint64_t bench_queries = 0, bench_repetitions = 0;
  double ratio = 0.0;  // benchmark / a_dist leaf queries
};

QueryRow run_query_point(const QueryPoint& pt, const PrecisionParams& params, std::uint64_t seed, bool simulate);
Tables query_table(const std::vector<QueryRow>& rows);

// ---- topology and diameter sweeps ----

struct NetworkPoint {
  std::string sweep;  // "topology" or "diameter"
  TopologyKind topo = TopologyKind::star;
  int stretch = 1;
  int n_b = 2;
  int n_g = 6;
  int reach = -1;
};

struct NetworkRow {
  NetworkPoint pt;
  PrecisionParams params;
  int diameter = 0;
  int num_vars = 0;
  int t_c = 0;
  bool uniform = false;  // all coordinator-worker distances equal
  bool simulated = false;
  std::uint64_t epr_sim = 0, epr_closed = 0, epr_single_hop = 0, epr_bound = 0;
  std::uint64_t leaf_sim = 0, leaf_closed = 0;
};

std::vector<TopologyKind> sweep_topologies();  // line, ring, tree, mesh, star
// |V_B| = 2..8, N_G = 6, one variable per worker, N_p = 1, delta = 0.25
std::vector<NetworkPoint> topology_sweep_points(const std::vector<int>& n_b);
PrecisionParams topology_sweep_params();
// |V_B| = 5, N_G = 8, one variable per worker reading two boundary bits, stretched to each diameter
std::vector<NetworkPoint> diameter_sweep_points(const std::vector<int>& diameters);
PrecisionParams diameter_sweep_params();  // N_p = 1, delta = 0.25, t_max = 2 with clamping
int base_diameter(TopologyKind k, int n_g);

NetworkRow run_network_point(const NetworkPoint& pt, const PrecisionParams& params, std::uint64_t seed,
                             bool simulate);
Tables network_table(const std::vector<NetworkRow>& rows);

// ---- policy sweep ----
Tables policy_table(const std::vector<HierSweepRow>& rows, const PrecisionParams& params);

}  // namespace qfn::app
