#include <algorithm>
#include <set>

#include "doctest.h"
#include "qfn/decompose.hpp"

using namespace qfn;

namespace {

void check_split_covers(const FactorGraph& g, const BoundarySplit& s) {
  std::set<int> vars(s.boundary.begin(), s.boundary.end());
  std::vector<int> factor_owner(g.num_factors(), 0);
  for (const auto& p : s.parts) {
    for (int v : p.internal) CHECK(vars.insert(v).second);  // internals disjoint from each other and V_B
    for (int f : p.factors) ++factor_owner[f];
    for (int v : p.local_boundary) CHECK(std::binary_search(s.boundary.begin(), s.boundary.end(), v));
  }
  for (int f : s.resident) ++factor_owner[f];
  CHECK(static_cast<int>(vars.size()) == g.num_vars());
  for (int c : factor_owner) CHECK(c == 1);
}

}  // namespace

TEST_CASE("Markowitz split on assets 3 and 7 gives three partitions") {
  FactorGraph g = markowitz_fixture();
  // ids are 1-based, split takes indices
  BoundarySplit s = split(g, {2, 6});
  CHECK(s.num_parts() == 3);
  CHECK(s.boundary == std::vector<int>{2, 6});
  check_split_covers(g, s);
  // the two unary boundary factors live at the coordinator
  CHECK(s.resident.size() >= 2);
}

TEST_CASE("boundary ids are validated") {
  FactorGraph g = markowitz_fixture();
  CHECK_THROWS(split(g, {42}));
}

TEST_CASE("suggested separators produce valid splits") {
  FactorGraph g = markowitz_fixture();
  SeparatorResult r = suggest_boundary(g, 2, 7);
  REQUIRE(r.found);
  BoundarySplit s = split(g, r.boundary);
  CHECK(s.num_parts() >= 2);
  check_split_covers(g, s);
}

TEST_CASE("qubit report is consistent with its breakdown") {
  FactorGraph g = markowitz_fixture();
  BoundarySplit s = split(g, {2, 6});
  PrecisionParams p;
  p.t_max = 16;
  QubitReport q = qubit_requirements(g, s, p);
  CHECK(q.workers.size() == 3);
  CHECK(q.t_n.size() == 3);
  CHECK(q.coordinator == q.q_b + q.q_cen + q.q_loc + q.q_baux + q.q_st_copies + q.q_misc);
  CHECK(q.p_min_c == doctest::Approx(p_min_coordinator(g, s, p)));
  CHECK(q.t_c == t_count(q.p_min_c, p.delta));
}

TEST_CASE("star instances") {
  StarInstance inst = star_boundary_instance(3, 2, 2, 5);
  CHECK(inst.graph.num_vars() == 3 + 2 * 2);
  CHECK(inst.boundary.size() == 3);
  BoundarySplit s = split(inst.graph, inst.boundary);
  CHECK(s.num_parts() == 2);
  for (const auto& p : s.parts) {
    CHECK(p.internal.size() == 2);
    CHECK(p.local_boundary.size() == 3);
  }
  // reach 1 restricts each worker to one boundary bit
  StarInstance narrow = star_boundary_instance(3, 2, 1, 5, 1);
  for (const auto& p : split(narrow.graph, narrow.boundary).parts) CHECK(p.local_boundary.size() == 1);
}

TEST_CASE("policy path covers 8 to 20 variables") {
  auto path = policy_family_path();
  REQUIRE(path.size() == 13);
  for (std::size_t i = 0; i < path.size(); ++i) CHECK(path[i].num_vars() == 8 + static_cast<int>(i));
}

TEST_CASE("built trees nest and respect the leaf budget") {
  FactorGraph g = normalize(markowitz_fixture()).graph;
  PrecisionParams p;
  p.t_max = 16;
  Budgets b;
  b.coordinator_max = 40;
  b.worker_max = 24;
  DecompTree t = build_tree(g, b, p, 3);
  REQUIRE(!t.nodes.empty());
  CHECK(static_cast<int>(t.nodes[0].vars.size()) == g.num_vars());
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const TreeNode& n = t.nodes[i];
    std::set<int> seen;
    for (int c : n.children) {
      CHECK(t.nodes[c].parent == static_cast<int>(i));
      CHECK(t.nodes[c].level == n.level + 1);
      for (int v : t.nodes[c].vars) {
        CHECK(std::binary_search(n.vars.begin(), n.vars.end(), v));
        CHECK(!std::binary_search(n.boundary.begin(), n.boundary.end(), v));
        CHECK(seen.insert(v).second);
      }
    }
  }
  for (int leaf : t.leaves()) CHECK(t.nodes[leaf].level <= t.levels);
}

TEST_CASE("tree JSON round trip") {
  PolicyFamilyInstance inst = policy_family_instance(5, 1, 1, 1, 3, 2);
  const std::string a = tree_to_json(inst.graph, inst.tree);
  CHECK(tree_to_json(inst.graph, tree_from_json(inst.graph, a)) == a);
  CHECK_THROWS(tree_from_json(inst.graph, "{\"nodes\": 3}"));
}
