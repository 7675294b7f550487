#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "qfn/fgraph.hpp"

using namespace qfn;

namespace {

// plain enumeration, written independently of the library
double eval_by_hand(const FactorGraph& g, const Assignment& x) {
  double s = 0;
  for (const auto& f : g.factors()) {
    std::size_t idx = 0;
    for (int v : f.scope) idx = idx * g.cardinality(v) + x[v];
    s += f.table[idx];
  }
  return s;
}

template <class Fn>
void all_assignments(const FactorGraph& g, Fn fn) {
  Assignment x(g.num_vars(), 0);
  while (true) {
    fn(x);
    int v = g.num_vars() - 1;
    while (v >= 0 && ++x[v] == g.cardinality(v)) x[v--] = 0;
    if (v < 0) return;
  }
}

}  // namespace

TEST_CASE("factor tables are mixed radix with the first scope variable most significant") {
  FactorGraph g;
  int a = g.add_variable(2, 10);
  int b = g.add_variable(3, 20);
  g.add_factor({a, b}, {0, 1, 2, 3, 4, 5});
  CHECK(g.evaluate({1, 2}) == 5);
  CHECK(g.evaluate({0, 1}) == 1);
  CHECK(g.index_of(20) == 1);
  CHECK(g.index_of(99) == -1);
  CHECK(g.config_count() == 6);
}

TEST_CASE("malformed graphs and assignments are rejected") {
  FactorGraph g;
  int a = g.add_variable(2);
  CHECK_THROWS_AS(g.add_factor({a}, {1.0}), ConfigError);
  CHECK_THROWS_AS(g.add_factor({a, a}, {0, 0, 0, 0}), ConfigError);
  g.add_factor({a}, {0.0, 1.0});
  CHECK_THROWS_AS(g.evaluate({2}), InvalidAssignment);
  CHECK_THROWS_AS(g.evaluate({0, 0}), InvalidAssignment);
}

TEST_CASE("brute force maximum agrees with hand enumeration and picks the smallest maximizer") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    RandomGraphSpec s;
    s.num_vars = 5;
    s.max_cardinality = 3;
    FactorGraph g = random_graph(s, seed);
    double best = -1e300;
    Assignment arg;
    all_assignments(g, [&](const Assignment& x) {
      double v = eval_by_hand(g, x);
      CHECK(g.evaluate(x) == doctest::Approx(v).epsilon(1e-14));
      if (v > best) {
        best = v;
        arg = x;
      }
    });
    MaxResult m = brute_force_max(g);
    CHECK(m.value == doctest::Approx(best).epsilon(1e-14));
    CHECK(m.argmax == arg);
  }
}

TEST_CASE("brute force refuses instances above the cap") {
  RandomGraphSpec s;
  s.num_vars = 12;
  FactorGraph g = random_graph(s, 3);
  CHECK_THROWS_AS(brute_force_max(g, 100), InstanceTooLarge);
}

TEST_CASE("fix_variable slices tables and keeps indices") {
  FactorGraph g;
  int a = g.add_variable(2), b = g.add_variable(2);
  g.add_factor({a, b}, {1, 2, 3, 4});
  FactorGraph h = g.fix_variable(a, 1);
  CHECK(h.cardinality(a) == 1);
  CHECK(h.evaluate({0, 0}) == 3);
  CHECK(h.evaluate({0, 1}) == 4);
  CHECK(brute_force_max(h).value == 4);
}

TEST_CASE("normalization is affine, binary, bounded and preserves the maximizer") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 40; ++i) {
    RandomGraphSpec s;
    s.num_vars = 2 + i % 4;
    s.max_cardinality = 2 + i % 4;
    s.num_factors = 3 + i % 3;
    s.max_scope = 1 + i % 3;
    FactorGraph g = random_graph(s, rng());
    Normalized nz = normalize(g);
    CHECK(nz.graph.is_binary());
    double gmax = -1e300;
    all_assignments(g, [&](const Assignment& x) {
      const double v = eval_by_hand(g, x);
      gmax = std::max(gmax, v);
      Assignment xb = nz.record.encode(x);
      auto back = nz.record.decode(xb);
      REQUIRE(back.has_value());
      CHECK(*back == x);
      const double vn = eval_by_hand(nz.graph, xb);
      CHECK(vn >= -1e-15);
      CHECK(vn <= 1.0 + 1e-12);
      CHECK(std::fabs(nz.record.recover(vn) - v) <= 1e-12);
    });
    MaxResult mb = brute_force_max(nz.graph);
    auto x = nz.record.decode(mb.argmax);
    REQUIRE(x.has_value());
    CHECK(std::fabs(eval_by_hand(g, *x) - gmax) <= 1e-12);
  }
}

TEST_CASE("binary encoding widths follow ceil(log2 cardinality)") {
  FactorGraph g;
  g.add_variable(1);
  g.add_variable(2);
  g.add_variable(3);
  g.add_variable(5);
  g.add_factor({1, 2}, std::vector<double>(6, 0.5));
  g.add_factor({3}, {0, 1, 2, 3, 4});
  Normalized nz = normalize(g);
  CHECK(nz.record.bits == std::vector<int>{0, 1, 2, 3});
  CHECK(nz.graph.num_vars() == 6);
  // unused codes of the 3-symbol variable are flagged invalid
  CHECK(nz.record.valid[2] == std::vector<bool>{true, true, true, false});
}

TEST_CASE("constant objective normalizes without dividing by zero") {
  FactorGraph g;
  g.add_variable(2);
  g.add_factor({0}, {0.7, 0.7});
  Normalized nz = normalize(g);
  CHECK(nz.record.recover(nz.graph.evaluate({0})) == doctest::Approx(0.7));
}

TEST_CASE("JSON round trip keeps ids, scopes and tables") {
  RandomGraphSpec s;
  s.max_cardinality = 3;
  FactorGraph g = random_graph(s, 11);
  FactorGraph h = graph_from_json(graph_to_json(g));
  REQUIRE(h.num_vars() == g.num_vars());
  REQUIRE(h.num_factors() == g.num_factors());
  for (int v = 0; v < g.num_vars(); ++v) {
    CHECK(h.id(v) == g.id(v));
    CHECK(h.cardinality(v) == g.cardinality(v));
  }
  for (int f = 0; f < g.num_factors(); ++f) {
    CHECK(h.factor(f).scope == g.factor(f).scope);
    CHECK(h.factor(f).table == g.factor(f).table);
  }
  CHECK_THROWS_AS(graph_from_json("{\"variables\":[{\"id\":1,\"cardinality\":2}],\"factors\":[{\"scope\":[7],"
                                  "\"table\":[0,1]}]}"),
                  ConfigError);
  CHECK_THROWS_AS(graph_from_json("not json"), ConfigError);
}

TEST_CASE("Markowitz fixture has nine assets, eight covariance pairs and four group constraints") {
  FactorGraph g = markowitz_fixture();
  CHECK(g.num_vars() == 9);
  CHECK(g.num_factors() == 9 + 8 + 4);
  CHECK(markowitz_pairs().size() == 8);
  CHECK(markowitz_groups().size() == 4);
  // empty portfolio satisfies every group bound and scores zero
  CHECK(g.evaluate(Assignment(9, 0)) == 0.0);
  // all assets selected violates the group upper bounds
  CHECK(g.evaluate(Assignment(9, 1)) < 0.0);
}

TEST_CASE("random graphs are deterministic per seed") {
  RandomGraphSpec s;
  CHECK(graph_to_json(random_graph(s, 5)) == graph_to_json(random_graph(s, 5)));
  CHECK(graph_to_json(random_graph(s, 5)) != graph_to_json(random_graph(s, 6)));
}

TEST_CASE("conditioned maximum fixes outside variables") {
  FactorGraph g;
  int a = g.add_variable(2), b = g.add_variable(2);
  g.add_factor({a, b}, {0.1, 0.2, 0.9, 0.3});
  MaxResult m = conditioned_max(g, {0}, {b}, {1, 0});
  CHECK(m.value == doctest::Approx(0.9));
  m = conditioned_max(g, {0}, {b}, {0, 0});
  CHECK(m.value == doctest::Approx(0.2));
}
