#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qfn/fgraph.hpp"
#include "qfn/primitives.hpp"

namespace qfn {

struct Partition {
  std::vector<int> internal;        // V_n
  std::vector<int> factors;         // F_n
  std::vector<int> local_boundary;  // V_B,n = V_B ∩ scopes of F_n
  std::vector<int> context;         // variables outside the split region read by F_n
};

struct BoundarySplit {
  std::vector<int> boundary;  // V_B, sorted
  std::vector<Partition> parts;
  std::vector<int> resident;  // factors whose scope avoids every partition (evaluated at the coordinator)
  int num_parts() const { return static_cast<int>(parts.size()); }
};

// number of qubits / assignments of a variable set (card 1 variables cost 0 qubits)
int qubits_of(const FactorGraph& g, const std::vector<int>& vars);
std::uint64_t assignments_of(const FactorGraph& g, const std::vector<int>& vars);

BoundarySplit split(const FactorGraph& g, const std::vector<int>& boundary);
// split of a region (vars, factors); variables outside `vars` are treated as fixed context
BoundarySplit split_region(const FactorGraph& g, const std::vector<int>& vars, const std::vector<int>& factors,
                           const std::vector<int>& boundary);

struct SeparatorResult {
  std::vector<int> boundary;
  bool budget_exhausted = false;
  bool found = false;  // a separator with >= target components was found
  std::uint64_t expansions = 0;
};

SeparatorResult suggest_boundary(const FactorGraph& g, int target_parts, std::uint64_t seed = 0,
                                 std::uint64_t budget = 200000);
SeparatorResult suggest_boundary_region(const FactorGraph& g, const std::vector<int>& vars,
                                        const std::vector<int>& factors, int target_parts, std::uint64_t seed = 0,
                                        std::uint64_t budget = 200000);

struct QubitReport {
  int coordinator = 0;
  std::vector<int> workers;
  double p_min_c = 1.0;
  std::vector<double> p_min_n;
  int t_c = 0;
  std::vector<int> t_n;
  bool clamped = false;
  // breakdown of the coordinator count
  int q_b = 0, q_cen = 0, q_loc = 0, q_baux = 0, q_st_copies = 0, q_misc = 3;
};

// p_min,c = (1-delta)^(2 N_p N_G) / |X_VB|
double p_min_coordinator(const FactorGraph& g, const BoundarySplit& s, const PrecisionParams& params);
QubitReport qubit_requirements(const FactorGraph& g, const BoundarySplit& s, const PrecisionParams& params);

struct TreeNode {
  int level = 0;
  std::vector<int> index;  // multi-index (k_1, ..., k_level), 1-based
  int parent = -1;
  std::vector<int> vars;      // variables of this subgraph
  std::vector<int> factors;   // factors of this subgraph
  std::vector<int> context;   // outside variables read by the factors
  std::vector<int> boundary;  // internal boundary V_B^(l+1) (internal nodes)
  std::vector<int> resident;  // factors with scope inside boundary ∪ context
  std::vector<int> children;
  bool trivial = false;       // uniform-depth extension node
  int coordinator_qubits = 0;
  int worker_qubits = 0;
  bool is_leaf() const { return children.empty(); }
};

struct DecompTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int levels = 0;               // L
  std::vector<int> level_nodes(int level) const;
  std::vector<int> leaves() const;
};

struct Budgets {
  int coordinator_max = 64;
  int worker_max = 64;
};

// Qubit needs of a region run as a single-partition instance (used as the leaf test).
std::pair<int, int> region_qubit_needs(const FactorGraph& g, const std::vector<int>& vars,
                                       const std::vector<int>& context, const PrecisionParams& params);

DecompTree build_tree(const FactorGraph& g, const Budgets& budgets, const PrecisionParams& params,
                      std::uint64_t seed = 0);

// Chooser returns the internal boundary of a node, or nullopt to make it a leaf.
using BoundaryChooser = std::function<std::optional<std::vector<int>>(const TreeNode&)>;
DecompTree build_tree_with(const FactorGraph& g, const BoundaryChooser& choose, const PrecisionParams& params);

struct PolicyFamilyInstance {
  FactorGraph graph;  // binary, normalized
  DecompTree tree;
  int b0 = 0, b1 = 0, s0 = 1, s1 = 1, r = 1;
};

PolicyFamilyInstance policy_family_instance(int b0, int b1, int s0, int s1, int r, std::uint64_t seed = 1);

// (b0, b1, S0, S1, r) for |V| = 8..20
struct PolicyFamilyPoint {
  int b0, b1, s0, s1, r;
  int num_vars() const { return b0 + s0 * (b1 + s1 * r); }
};
std::vector<PolicyFamilyPoint> policy_family_path();

// Boundary-star family: n_b boundary bits, n_g workers each holding a chain of r bits.
// Worker n reads boundary bits n*stride .. n*stride+reach-1 (mod n_b); reach < 0 means all bits.
struct StarInstance {
  FactorGraph graph;  // binary, normalized
  std::vector<int> boundary;
};
StarInstance star_boundary_instance(int n_b, int n_g, int r, std::uint64_t seed = 1, int reach = -1, int stride = 1);

std::string tree_to_json(const FactorGraph& g, const DecompTree& t);
DecompTree tree_from_json(const FactorGraph& g, const std::string& text);
std::string split_to_json(const FactorGraph& g, const BoundarySplit& s);

}  // namespace qfn
