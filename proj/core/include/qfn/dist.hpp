#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfn/decompose.hpp"
#include "qfn/fgraph.hpp"
#include "qfn/network.hpp"
#include "qfn/primitives.hpp"

namespace qfn {

enum class SimMode { compact, faithful };
enum class Readout { sample, most_probable, correct };  // correct = follow the success branch

SimMode sim_mode_from_string(const std::string& s);
Readout readout_from_string(const std::string& s);
std::string to_string(SimMode m);
std::string to_string(Readout r);

struct DistRunConfig {
  const FactorGraph* graph = nullptr;  // binary variables, factor values >= 0, local sums <= 1
  BoundarySplit split;
  NetworkModel network;  // must have split.num_parts() workers
  PrecisionParams params;
  Readout readout = Readout::most_probable;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::compact;
  int max_qubits = kDefaultMaxQubits;  // faithful mode width cap
  bool keep_aux = true;  // coordinator aux sectors; false drops them (clean masses are unaffected)
};

// Runs the split check and builds a config over the given graph with a network of the matching size.
DistRunConfig make_config(const FactorGraph& g, const std::vector<int>& boundary, const PrecisionParams& params,
                          TopologyKind topo = TopologyKind::single_hop, int stretch = 1);

struct DistResult {
  std::uint64_t z_key = 0;  // z_max,p,c read out
  std::string z_bits;
  double value = 0.0;           // z_dec(z_key)
  std::uint64_t correct_key = 0;  // top of the support of the coordinator value distribution
  bool success = false;           // z_key == correct_key
  ResourceLedger ledger;
  int t_c = 0;
  std::vector<int> t_n;
  bool t_clamped = false;
  double p_min_c = 0.0;
  std::vector<double> p_min_n;
  std::vector<double> weights;   // class weights of psi_ini on q_p,c
  std::vector<double> marginal;  // final q_p,c marginal
  double correct_mass = 0.0;     // marginal[correct_key]
  double clean_correct_mass = 0.0;  // correct output with clean workspace
  std::vector<double> p_z;       // per test, along the correct prefix
  double optimal_branch_overlap = 0.0;  // mass of psi_ini on the optimal boundary branch with value correct_key
  double max_norm_error = 0.0;
  std::uint64_t closed_u_ini_calls = 0;
  std::uint64_t closed_leaf_queries = 0;
  std::uint64_t closed_epr = 0;  // topology weighted
  std::uint64_t closed_epr_single_hop = 0;
};

// ---- closed forms ----
std::uint64_t closed_form_u_ini_calls(int n_p, int t_c);
// C_distr = N_p^2 (2^(t_c+2)-2) sum_n (2^(t_n+2)-2)
std::uint64_t closed_form_c_distr(int n_p, int t_c, const std::vector<int>& t_n);
std::vector<int> local_boundary_sizes(const FactorGraph& g, const BoundarySplit& s);

// t values and p_min of a configuration (throws ResourceOverflow under the reject policy)
struct PrecisionPlan {
  int t_c = 0;
  std::vector<int> t_n;
  double p_min_c = 0.0;
  std::vector<double> p_min_n;
  bool clamped = false;
};
PrecisionPlan plan_precision(const FactorGraph& g, const BoundarySplit& s, const PrecisionParams& params);

// Largest N_p-bit value not exceeding the best sum of floored local maxima (fgraph enumeration only).
std::uint64_t reference_z_key(const FactorGraph& g, const BoundarySplit& s, int n_p);

// Class weights of psi_ini on q_p,c together with the optimal-branch overlap diagnostic.
struct IniDistribution {
  std::vector<double> weights;
  double optimal_branch_overlap = 0.0;
};
IniDistribution u_ini_distribution(const DistRunConfig& cfg);

DistResult a_dist(const DistRunConfig& cfg);

struct ConfigResult {
  Assignment x;                // binary assignment of cfg.graph
  std::vector<DistResult> runs;  // 2|V|+1 runs in invocation order
  double joint_clean_mass = 1.0;  // product of clean-correct masses of the runs
  bool joint_success = true;
  std::uint64_t leaf_queries = 0;
};
ConfigResult a_dist_config(const DistRunConfig& cfg);

struct BenchmarkResult {
  ResourceLedger ledger;
  std::uint64_t repetitions = 0;  // R
  std::uint64_t boundary_assignments = 0;
};
// Repetitions R: smallest R with (1 - f^R)^(|X| N_G) >= (1-delta)^(2 N_p), f = 1 - (1-delta)^(2 N_p).
std::uint64_t benchmark_repetitions(std::uint64_t boundary_assignments, int n_g, int n_p, double delta);
BenchmarkResult classical_comm_benchmark(const DistRunConfig& cfg);

// Instance families used by the sweeps
DistRunConfig star_config(const StarInstance& inst, const PrecisionParams& params, TopologyKind topo,
                          int stretch = 1);

}  // namespace qfn
