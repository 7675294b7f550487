#include <cmath>

#include "doctest.h"
#include "qfn/dist.hpp"

using namespace qfn;

namespace {

PrecisionParams small_params() {
  PrecisionParams p;
  p.n_p = 1;
  p.delta = 0.25;
  p.t_max = 16;
  return p;
}

}  // namespace

TEST_CASE("closed forms on hand-evaluated cases") {
  CHECK(closed_form_u_ini_calls(1, 2) == 14);
  CHECK(closed_form_u_ini_calls(2, 0) == 4);
  // 1^2 * 14 * (14 + 14)
  CHECK(closed_form_c_distr(1, 2, {2, 2}) == 392);
  CHECK(closed_form_c_distr(2, 2, {2, 2}) == 4 * 392);
  CHECK(closed_form_c_distr(1, 0, {0}) == 4);
}

TEST_CASE("benchmark repetitions") {
  // f = 1 - 0.75^2 = 0.4375, one assignment and one worker: R = 1
  CHECK(benchmark_repetitions(1, 1, 1, 0.25) == 1);
  // (1 - 0.4375^3)^8 = 0.497 < 0.5625 <= (1 - 0.4375^4)^8 = 0.742
  CHECK(benchmark_repetitions(4, 2, 1, 0.25) == 4);
}

TEST_CASE("simulated counters match the closed forms") {
  StarInstance inst = star_boundary_instance(2, 2, 2, 3);
  DistRunConfig cfg = star_config(inst, small_params(), TopologyKind::line);
  DistResult r = a_dist(cfg);
  CHECK(r.ledger.u_ini_calls == r.closed_u_ini_calls);
  CHECK(r.ledger.leaf_queries == r.closed_leaf_queries);
  CHECK(r.ledger.epr_total() == r.closed_epr);
  CHECK(r.closed_u_ini_calls == closed_form_u_ini_calls(1, r.t_c));
  CHECK(r.closed_leaf_queries == closed_form_c_distr(1, r.t_c, r.t_n));
}

TEST_CASE("one-bit local boundaries cost six EPR pairs per U_ini call") {
  StarInstance inst = star_boundary_instance(1, 2, 1, 4);
  DistResult r = a_dist(star_config(inst, small_params(), TopologyKind::single_hop));
  const auto traffic = r.ledger.epr[static_cast<int>(EprClass::boundary_distribution)] +
                       r.ledger.epr[static_cast<int>(EprClass::result_return)];
  CHECK(traffic == 6 * r.ledger.u_ini_calls);
}

TEST_CASE("all-zero objective returns the zero key") {
  FactorGraph g;
  g.add_variable(2);
  g.add_variable(2);
  g.add_variable(2);
  g.add_factor({0, 1}, {0, 0, 0, 0});
  g.add_factor({1, 2}, {0, 0, 0, 0});
  DistRunConfig cfg = make_config(g, {1}, small_params());
  DistResult r = a_dist(cfg);
  CHECK(r.z_key == 0);
  CHECK(r.correct_key == 0);
  CHECK(r.success);
  CHECK(r.correct_mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("faithful and compact simulation agree") {
  StarInstance inst = star_boundary_instance(1, 2, 1, 9);
  PrecisionParams p = small_params();
  DistRunConfig a = star_config(inst, p, TopologyKind::line);
  a.readout = Readout::correct;
  DistRunConfig b = a;
  b.mode = SimMode::faithful;
  DistResult ra = a_dist(a), rb = a_dist(b);
  CHECK(ra.ledger.u_ini_calls == rb.ledger.u_ini_calls);
  CHECK(ra.ledger.leaf_queries == rb.ledger.leaf_queries);
  CHECK(ra.ledger.epr == rb.ledger.epr);
  REQUIRE(ra.marginal.size() == rb.marginal.size());
  for (std::size_t k = 0; k < ra.marginal.size(); ++k) CHECK(std::fabs(ra.marginal[k] - rb.marginal[k]) < 1e-9);
  CHECK(std::fabs(ra.clean_correct_mass - rb.clean_correct_mass) < 1e-9);
}

TEST_CASE("topology changes EPR only") {
  StarInstance inst = star_boundary_instance(2, 3, 1, 2);
  PrecisionParams p = small_params();
  DistRunConfig a = star_config(inst, p, TopologyKind::star);
  DistRunConfig b = star_config(inst, p, TopologyKind::line, 2);
  a.readout = b.readout = Readout::correct;
  DistResult ra = a_dist(a), rb = a_dist(b);
  CHECK(ra.ledger.leaf_queries == rb.ledger.leaf_queries);
  CHECK(ra.marginal == rb.marginal);
  CHECK(ra.ledger.epr_total() < rb.ledger.epr_total());
  CHECK(rb.ledger.epr_total() <= static_cast<std::uint64_t>(b.network.diameter()) * rb.closed_epr_single_hop);
}

TEST_CASE("benchmark pays R times every boundary assignment") {
  StarInstance inst = star_boundary_instance(2, 2, 1, 6);
  PrecisionParams p = small_params();
  DistRunConfig cfg = star_config(inst, p, TopologyKind::single_hop);
  BenchmarkResult b = classical_comm_benchmark(cfg);
  PrecisionPlan plan = plan_precision(inst.graph, cfg.split, p);
  std::uint64_t per_assignment = 0;
  for (int tn : plan.t_n) per_assignment += (4u << tn) - 2;
  CHECK(b.boundary_assignments == 4);
  CHECK(b.repetitions == benchmark_repetitions(4, 2, 1, 0.25));
  CHECK(b.ledger.leaf_queries == b.repetitions * 4 * per_assignment);
}

TEST_CASE("configuration recovery makes 2|V|+1 invocations") {
  StarInstance inst = star_boundary_instance(1, 2, 1, 11);
  DistRunConfig cfg = star_config(inst, small_params(), TopologyKind::single_hop);
  cfg.readout = Readout::correct;
  ConfigResult c = a_dist_config(cfg);
  CHECK(c.runs.size() == 2 * static_cast<std::size_t>(inst.graph.num_vars()) + 1);
  CHECK(c.x.size() == static_cast<std::size_t>(inst.graph.num_vars()));
  std::uint64_t total = 0;
  for (const auto& r : c.runs) total += r.ledger.leaf_queries;
  CHECK(total == c.leaf_queries);
  // the recovered assignment reaches the floored optimum certified by the first run
  if (c.joint_success) CHECK(inst.graph.evaluate(c.x) >= z_dec(c.runs.front().correct_key, 1) - 1e-12);
}

TEST_CASE("split mismatch with the network is rejected") {
  StarInstance inst = star_boundary_instance(1, 2, 1, 1);
  DistRunConfig cfg = star_config(inst, small_params(), TopologyKind::single_hop);
  cfg.network = NetworkModel::make(TopologyKind::line, 3);
  CHECK_THROWS_AS(a_dist(cfg), ConfigError);
}
