#include "app/runspec.hpp"
#include "app/sweeps.hpp"
#include "doctest.h"

using namespace qfn;
using namespace qfn::app;

namespace {

json small_instance() {
  return json::parse(R"({
    "variables": [{"id": 5, "cardinality": 3}, {"id": 6, "cardinality": 2}, {"id": 9, "cardinality": 2}],
    "factors": [
      {"scope": [5, 6], "table": [0.1, 0.4, 0.3, 0.2, 0.0, 0.6]},
      {"scope": [6, 9], "table": [0.5, 0.1, 0.2, 0.3]}
    ]})");
}

}  // namespace

TEST_CASE("unknown keys are rejected") {
  CHECK_NOTHROW(check_keys(json{{"a", 1}}, {"a", "b"}, "run"));
  CHECK_THROWS_AS(check_keys(json{{"c", 1}}, {"a", "b"}, "run"), ConfigError);
  CHECK_THROWS_AS(parse_params(json{{"n_q", 2}}), ConfigError);
}

TEST_CASE("network specs") {
  NetworkSpec a = parse_network("line");
  CHECK(a.kind == TopologyKind::line);
  CHECK(a.stretch == 1);
  NetworkSpec b = parse_network(json{{"kind", "star"}, {"stretch", 3}});
  CHECK(b.build(4).diameter() == 3);
  NetworkSpec c = parse_network(json{{"topology", "line"}, {"coordinator", "center"}});
  CHECK(!c.coordinator_at_end);
  CHECK_THROWS_AS(parse_network(json{{"kind", "line"}, {"coordinator", "left"}}), ConfigError);
  CHECK_THROWS_AS(parse_network("torus"), ConfigError);
}

TEST_CASE("precision params parse over a base") {
  PrecisionParams base;
  base.t_max = 5;
  PrecisionParams p = parse_params(json{{"n_p", 2}, {"delta", 0.1}, {"t_policy", "clamp"}, {"t_rule", "corrected"}}, base);
  CHECK(p.n_p == 2);
  CHECK(p.delta == 0.1);
  CHECK(p.t_max == 5);
  CHECK(p.t_policy == TPolicy::clamp);
  CHECK(p.t_rule == TRule::corrected);
  CHECK(parse_params(params_to_json(p)).t_rule == TRule::corrected);
}

TEST_CASE("inline instances are normalized and boundary ids mapped to bits") {
  json spec{{"instance", small_instance()}, {"boundary", {5}}};
  Problem p = load_problem(spec, 1);
  CHECK(p.original.num_vars() == 3);
  CHECK(p.graph.num_vars() == 4);  // the ternary variable takes two bits
  REQUIRE(p.record.has_value());
  CHECK(p.boundary_given);
  CHECK(p.boundary.size() == 2);
  CHECK(map_boundary_ids(p, {6}).size() == 1);
  CHECK_THROWS_AS(map_boundary_ids(p, {7}), ConfigError);
}

TEST_CASE("decoded assignments recover the original objective") {
  Problem p = load_problem(json{{"instance", small_instance()}}, 1);
  const MaxResult bin = brute_force_max(p.graph);
  auto x = decode_assignment(p, bin.argmax);
  REQUIRE(x.has_value());
  CHECK(recover_value(p, bin.value) == doctest::Approx(p.original.evaluate(*x)).epsilon(1e-12));
  CHECK(p.original.evaluate(*x) == doctest::Approx(brute_force_max(p.original).value).epsilon(1e-12));
}

TEST_CASE("problem sources are exclusive") {
  json both{{"instance", small_instance()}, {"generator", {{"kind", "markowitz"}}}};
  CHECK_THROWS_AS(load_problem(both, 1), ConfigError);
  CHECK_THROWS_AS(load_problem(json::object(), 1), ConfigError);
  CHECK_THROWS_AS(load_problem(json{{"generator", {{"kind", "nope"}}}}, 1), ConfigError);
}

TEST_CASE("star generator arrives normalized with its boundary") {
  Problem p = load_problem(json{{"generator", {{"kind", "star"}, {"n_b", 2}, {"n_g", 2}, {"r", 1}}}}, 4);
  CHECK(!p.record.has_value());
  CHECK(p.boundary.size() == 2);
  CHECK(p.graph.num_vars() == 4);
}

TEST_CASE("parallel sweeps produce identical tables") {
  auto pts = query_sweep_points({8, 9, 10});
  PrecisionParams params = query_sweep_params();
  auto run = [&](int jobs) {
    std::vector<QueryRow> rows(pts.size());
    parallel_for(pts.size(), jobs, [&](std::size_t i) { rows[i] = run_query_point(pts[i], params, 1, true); });
    return query_table(rows).csv();
  };
  const std::string one = run(1);
  CHECK(one == run(4));
  CHECK(one.find("num_vars,n_b,r") == 0);
}

TEST_CASE("empty tables still carry the header") {
  Tables t = network_table({});
  CHECK(t.csv().rfind(t.header, 0) == 0);
  CHECK(t.rows.empty());
}

TEST_CASE("exceptions inside parallel_for propagate") {
  CHECK_THROWS_AS(parallel_for(8, 3,
                               [](std::size_t i) {
                                 if (i == 5) throw ConfigError("boom");
                               }),
                  ConfigError);
}
