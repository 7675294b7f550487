#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "qfn/decompose.hpp"
#include "qfn/fgraph.hpp"
#include "qfn/primitives.hpp"

namespace qfn {

struct ExecutionPolicy {
  std::string name;
  std::set<int> measured;  // L_M
  bool is_measured(int level) const { return measured.count(level) > 0; }
};

// coherent, hybrid_root, hybrid_level1, hybrid_all (all internal levels of a depth-L tree)
ExecutionPolicy policy_from_name(const std::string& name, int levels);
std::vector<std::string> policy_names();

struct NodeCost {
  int t = 0;                // t at this node (coherent internal node or leaf)
  double p_min = 1.0;
  bool measured = false;
  bool clamped = false;
  std::uint64_t n_inv = 0;  // N_inv
  std::uint64_t c_eff = 0;  // internal nodes
  std::uint64_t c_leaf = 0; // leaves
  std::uint64_t n_epr = 0;  // one execution of the node's primitive (0 when measured)
};

struct HierCostReport {
  std::vector<NodeCost> nodes;  // indexed like DecompTree::nodes
  std::uint64_t c_hier = 0;
  std::uint64_t n_epr_hier = 0;
  std::uint64_t n_exec = 0;
  double success_lower_bound = 1.0;  // (1-delta)^(2 N_p N_exec)
  double precision_bound = 0.0;      // |T| 2^-N_p
  bool clamped = false;
};

HierCostReport cost_model(const FactorGraph& g, const DecompTree& tree, const ExecutionPolicy& policy,
                          const PrecisionParams& params);

struct HierRunResult {
  std::uint64_t z_key = 0;
  std::uint64_t correct_key = 0;
  double value = 0.0;                 // z_dec(correct_key)
  std::vector<double> marginal;       // root output distribution
  double success_mass = 0.0;          // exact lower bound on the probability of the correct output
  std::uint64_t queries = 0;          // instrumented leaf queries
  std::uint64_t epr = 0;              // instrumented coherent EPR (single hop)
  std::uint64_t evaluations = 0;      // node evaluations performed by the simulator
};

enum class HierMode { cost_model, statevector };

struct HierExecution {
  HierCostReport report;
  HierRunResult run;  // filled in statevector mode
  bool simulated = false;
};

HierExecution execute(const FactorGraph& g, const DecompTree& tree, const ExecutionPolicy& policy,
                      const PrecisionParams& params, HierMode mode);

// Fixed parameters of the policy sweep: N_p = 1, delta = 0.2, t_max = 2 with clamping.
PrecisionParams policy_sweep_params();

struct HierSweepRow {
  PolicyFamilyPoint point;
  int num_vars = 0;
  std::string policy;
  HierExecution exec;
  double query_multiplier = 0.0;  // vs coherent at the same point
  double epr_multiplier = 0.0;
};

// The four policies at one path point; multipliers are relative to the coherent row.
std::vector<HierSweepRow> policy_sweep_point(const PolicyFamilyPoint& pt, const PrecisionParams& params,
                                          bool statevector = true, std::uint64_t seed = 1);
std::vector<HierSweepRow> policy_sweep(const PrecisionParams& params, bool statevector = true,
                                  std::uint64_t seed = 1);
std::string hier_csv_header();
std::string hier_csv_row(const HierSweepRow& r, const PrecisionParams& params);

}  // namespace qfn
