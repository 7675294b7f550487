#include "doctest.h"
#include "qfn/network.hpp"

using namespace qfn;

TEST_CASE("coordinator distances per topology") {
  auto line = NetworkModel::make(TopologyKind::line, 5);
  for (int n = 0; n < 5; ++n) CHECK(line.dist_to_worker(n) == n + 1);
  CHECK(line.diameter() == 5);

  auto star = NetworkModel::make(TopologyKind::star, 5, 3);
  for (int n = 0; n < 5; ++n) CHECK(star.dist_to_worker(n) == 3);
  CHECK(star.diameter() == 3);
  CHECK(star.dist(NetworkModel::worker(0), NetworkModel::worker(1)) == 6);

  auto ring = NetworkModel::make(TopologyKind::ring, 8);
  CHECK(ring.dist_to_worker(0) == 1);
  CHECK(ring.dist_to_worker(3) == 4);
  CHECK(ring.dist_to_worker(7) == 1);
  CHECK(ring.diameter() == 4);

  CHECK(NetworkModel::make(TopologyKind::tree, 8).diameter() == 3);
  CHECK(NetworkModel::make(TopologyKind::mesh, 8).diameter() == 2);
  CHECK(NetworkModel::make(TopologyKind::single_hop, 8).diameter() == 1);
}

TEST_CASE("stretch scales every distance") {
  for (TopologyKind k : {TopologyKind::line, TopologyKind::ring, TopologyKind::tree, TopologyKind::mesh}) {
    auto a = NetworkModel::make(k, 8, 1), b = NetworkModel::make(k, 8, 3);
    for (int u = 0; u < a.num_nodes(); ++u)
      for (int v = 0; v < a.num_nodes(); ++v) CHECK(b.dist(u, v) == 3 * a.dist(u, v));
  }
}

TEST_CASE("distances are a metric") {
  auto net = NetworkModel::make(TopologyKind::mesh, 12, 2);
  const int n = net.num_nodes();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      CHECK(net.dist(a, b) == net.dist(b, a));
      CHECK((net.dist(a, b) == 0) == (a == b));
      for (int c = 0; c < n; ++c) CHECK(net.dist(a, c) <= net.dist(a, b) + net.dist(b, c));
    }
}

TEST_CASE("centered line halves the reach") {
  auto net = NetworkModel::make(TopologyKind::line, 6, 1, false);
  CHECK(net.diameter() == 3);
}

TEST_CASE("invalid networks") {
  CHECK_THROWS_AS(NetworkModel::make(TopologyKind::line, 3, 0), ConfigError);
  CHECK_THROWS_AS(NetworkModel(2, {{0, 1, 1}}), ConfigError);  // worker 1 unreachable
  CHECK_THROWS_AS(NetworkModel(1, {{0, 0, 1}}), ConfigError);
  CHECK_THROWS_AS(topology_from_string("hypercube"), ConfigError);
}

TEST_CASE("teleport charges qubits times hop distance") {
  ResourceLedger led;
  auto single = NetworkModel::make(TopologyKind::single_hop, 3);
  charge_teleport(led, single, 0, NetworkModel::worker(1), 3, EprClass::boundary_distribution);
  CHECK(led.epr_total() == 3);
  auto line = NetworkModel::make(TopologyKind::line, 4);
  charge_teleport(led, line, NetworkModel::worker(3), 0, 2, EprClass::result_return);
  CHECK(led.epr[static_cast<int>(EprClass::result_return)] == 8);
  CHECK(led.epr_total() == 11);
}

TEST_CASE("closed-form EPR on a hand-evaluated case") {
  // n_p = 1, t = 2: 14 U_ini calls, 6 reflections, 2 tests
  CHECK(per_worker_epr(1, 2, 1) == 14 * 3 + 6 * 2 + 2 * 2);
  CHECK(per_worker_epr(1, 2, 2) == 14 * 5 + 6 * 2 + 2 * 2);
  EprTerms e = closed_form_epr_terms(1, 2, {1, 2});
  CHECK(e.boundary_result == 112);
  CHECK(e.reflection == 24);
  CHECK(e.control == 8);
  CHECK(e.total() == 144);
  // weighting by distance on a line of two workers
  auto line = NetworkModel::make(TopologyKind::line, 2);
  CHECK(closed_form_epr_terms(1, 2, {1, 2}, &line).total() == 58 + 2 * 86);
  CHECK(closed_form_epr_terms(1, 2, {}).total() == 0);
}

TEST_CASE("closed-form EPR grows at least linearly in n_p") {
  for (int t = 0; t < 5; ++t)
    for (int b = 0; b < 4; ++b) {
      const auto one = per_worker_epr(1, t, b);
      const auto two = per_worker_epr(2, t, b);
      CHECK(two >= 2 * one);
    }
}
