#include <cmath>
#include <optional>

#include "doctest.h"
#include "qfn/dist.hpp"
#include "qfn/hier.hpp"

using namespace qfn;

namespace {

PrecisionParams params16() {
  PrecisionParams p;
  p.n_p = 1;
  p.delta = 0.25;
  p.t_max = 16;
  return p;
}

// root split on the given boundary, every child a leaf
DecompTree one_level(const FactorGraph& g, const std::vector<int>& boundary, const PrecisionParams& p) {
  return build_tree_with(
      g,
      [&](const TreeNode& n) -> std::optional<std::vector<int>> {
        if (n.level == 0) return boundary;
        return std::nullopt;
      },
      p);
}

}  // namespace

TEST_CASE("policy names") {
  CHECK(policy_names().size() == 4);
  CHECK(policy_from_name("coherent", 2).measured.empty());
  CHECK(policy_from_name("hybrid_root", 2).measured == std::set<int>{0});
  CHECK(policy_from_name("hybrid_level1", 2).measured == std::set<int>{1});
  CHECK(policy_from_name("hybrid_all", 2).measured == std::set<int>{0, 1});
  CHECK_THROWS_AS(policy_from_name("greedy", 2), ConfigError);
}

TEST_CASE("a one-level coherent tree reproduces the flat distributed costs") {
  StarInstance inst = star_boundary_instance(2, 2, 2, 4);
  PrecisionParams p = params16();
  DecompTree t = one_level(inst.graph, inst.boundary, p);
  REQUIRE(t.levels == 1);
  HierCostReport rep = cost_model(inst.graph, t, policy_from_name("coherent", t.levels), p);
  BoundarySplit s = split(inst.graph, inst.boundary);
  PrecisionPlan plan = plan_precision(inst.graph, s, p);
  CHECK(rep.c_hier == closed_form_c_distr(p.n_p, plan.t_c, plan.t_n));
  CHECK(rep.n_epr_hier == closed_form_epr_terms(p.n_p, plan.t_c, local_boundary_sizes(inst.graph, s)).total());
  CHECK(rep.n_exec == 1);
  CHECK(rep.success_lower_bound == doctest::Approx(std::pow(0.75, 2)));
}

TEST_CASE("a measured level enumerates its boundary") {
  StarInstance inst = star_boundary_instance(3, 2, 1, 4);
  PrecisionParams p = params16();
  DecompTree t = one_level(inst.graph, inst.boundary, p);
  HierCostReport rep = cost_model(inst.graph, t, policy_from_name("hybrid_root", t.levels), p);
  CHECK(rep.nodes[0].measured);
  CHECK(rep.nodes[0].c_eff == 8);
  CHECK(rep.n_epr_hier == 0);
  // every leaf runs once per boundary assignment
  std::uint64_t leaf_sum = 0;
  for (int l : t.leaves()) leaf_sum += rep.nodes[l].c_leaf;
  CHECK(rep.c_hier == 8 * leaf_sum);
}

TEST_CASE("a single-leaf tree has no level to measure") {
  StarInstance inst = star_boundary_instance(1, 1, 2, 4);
  PrecisionParams p = params16();
  DecompTree t = build_tree_with(
      inst.graph, [](const TreeNode&) -> std::optional<std::vector<int>> { return std::nullopt; }, p);
  REQUIRE(t.nodes.size() == 1);
  const std::uint64_t c = cost_model(inst.graph, t, policy_from_name("coherent", t.levels), p).c_hier;
  CHECK(cost_model(inst.graph, t, policy_from_name("hybrid_all", t.levels), p).c_hier == c);
  CHECK_THROWS_AS(cost_model(inst.graph, t, policy_from_name("hybrid_root", t.levels), p), ConfigError);
}

TEST_CASE("statevector execution matches the cost model on the policy path") {
  PrecisionParams p = policy_sweep_params();
  for (const auto& row : policy_sweep_point(policy_family_path().front(), p)) {
    CHECK(row.exec.simulated);
    CHECK(row.exec.run.queries == row.exec.report.c_hier);
    CHECK(row.exec.run.epr == row.exec.report.n_epr_hier);
    if (row.policy == "coherent") {
      CHECK(row.query_multiplier == 1.0);
      CHECK(row.epr_multiplier == 1.0);
    }
    if (row.policy == "hybrid_all") CHECK(row.exec.report.n_epr_hier == 0);
    CHECK(row.exec.report.precision_bound > 0.0);
  }
}

TEST_CASE("unclamped runs keep at least the guaranteed success mass") {
  PolicyFamilyInstance inst = policy_family_instance(5, 0, 1, 1, 3, 3);
  PrecisionParams p = params16();
  for (const auto& name : policy_names()) {
    HierExecution e = execute(inst.graph, inst.tree, policy_from_name(name, inst.tree.levels), p, HierMode::statevector);
    CHECK(!e.report.clamped);
    CHECK(e.run.success_mass >= e.report.success_lower_bound - 1e-12);
  }
}
