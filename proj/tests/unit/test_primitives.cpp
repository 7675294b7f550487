#include <cmath>
#include <random>

#include "doctest.h"
#include "qfn/primitives.hpp"

using namespace qfn;

TEST_CASE("t(c, delta) on hand-evaluated points") {
  // -log2(0.25 * 1)/2 - 1/2 = 0.5
  CHECK(t_count(1.0, 0.25) == 1);
  // -log2(0.125)/2 - 1/2 = 1 exactly
  CHECK(t_count(0.5, 0.25) == 1);
  // (13 + log2 5)/2 - 1/2 = 7.16
  CHECK(t_count(std::ldexp(1.0, -13), 0.2) == 8);
  CHECK(t_count(std::ldexp(1.0, -13), 0.2, TRule::corrected) == 8);
  // (2 + 2)/2 = 2 without the offset, 1.5 -> 2 with it
  CHECK(t_count(0.25, 0.25) == 2);
  CHECK(t_count(0.25, 0.25, TRule::corrected) == 2);
  // -log2(0.9)/2 - 1/2 < 0 clamps to zero
  CHECK(t_count(1.0, 0.9) == 0);
  CHECK_THROWS_AS(t_count(0.0, 0.1), ConfigError);
}

TEST_CASE("t is nonincreasing in c and delta, and the corrected rule is never smaller") {
  for (double d : {0.05, 0.1, 0.2, 0.3}) {
    int prev = 1 << 20;
    for (int e = 20; e >= 0; --e) {
      const double c = std::ldexp(1.0, -e);
      const int t = t_count(c, d);
      CHECK(t <= prev);
      CHECK(t_count(c, d, TRule::corrected) >= t);
      CHECK(t_count(c, d, TRule::corrected) <= t + 1);
      prev = t;
    }
  }
}

TEST_CASE("t_max policy rejects or clamps") {
  PrecisionParams p;
  p.delta = 0.2;
  p.t_max = 2;
  CHECK_THROWS_AS(t_checked(1e-4, p, "node"), ResourceOverflow);
  p.t_policy = TPolicy::clamp;
  bool clamped = false;
  CHECK(t_checked(1e-4, p, "node", &clamped) == 2);
  CHECK(clamped);
}

TEST_CASE("parameter validation") {
  PrecisionParams p;
  p.n_p = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.n_p = 1;
  p.delta = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_THROWS_AS(t_rule_from_string("other"), ConfigError);
  CHECK(t_policy_from_string("clamp") == TPolicy::clamp);
}

TEST_CASE("fixed point helpers") {
  CHECK(z_dec(std::vector<int>{1, 0, 1}) == 0.625);
  CHECK(z_dec(5, 3) == 0.625);
  CHECK(floor_key(0.624, 3) == 4);
  CHECK(floor_key(0.625, 3) == 5);
  CHECK(floor_key(1.0, 3) == 7);
  CHECK(floor_key(-0.1, 3) == 0);
  CHECK(key_string(6, 3) == "110");
  // prefix "1" then candidate bit 1 then zeros
  CHECK(threshold_key(1, 2, 3) == 6);
  CHECK(threshold_key(0, 1, 2) == 2);
}

TEST_CASE("compact engine counters follow 2^(t+2)-2 preparations per test") {
  for (int n_p = 1; n_p <= 3; ++n_p)
    for (int t = 0; t <= 4; ++t) {
      std::vector<double> w(std::size_t{1} << n_p, 0.0);
      w.back() = 0.5;
      w[0] = 0.5;
      int begins = 0, ends = 0;
      std::uint64_t refl = 0;
      CompactOptions opt;
      opt.hooks.on_test_begin = [&](int) { ++begins; };
      opt.hooks.on_test_end = [&](int) { ++ends; };
      opt.hooks.on_reflection = [&] { ++refl; };
      CompactResult r = compact_max(w, n_p, t, opt);
      CHECK(r.prep_calls == std::uint64_t(n_p) * ((4u << t) - 2));
      CHECK(r.reflections == std::uint64_t(n_p) * ((2u << t) - 2));
      CHECK(refl == r.reflections);
      CHECK(begins == n_p);
      CHECK(ends == n_p);
    }
}

TEST_CASE("all weight on key 0 yields the all-zero output exactly") {
  std::vector<double> w(4, 0.0);
  w[0] = 1.0;
  CompactResult r = compact_max(w, 2, 3);
  CHECK(r.marginal[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.clean_correct() == doctest::Approx(1.0).epsilon(1e-14));
  for (double pz : r.p_z) CHECK(pz == 0.0);
}

TEST_CASE("compact engine is a probability-preserving map") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 20; ++i) {
    const int n_p = 1 + i % 3;
    std::vector<double> w(std::size_t{1} << n_p);
    double s = 0;
    for (double& x : w) s += (x = u(rng) < 0.3 ? 0.0 : u(rng));
    if (s == 0) continue;
    for (double& x : w) x /= s;
    CompactResult r = compact_max(w, n_p, 1 + i % 4);
    double tot = 0;
    for (double m : r.marginal) tot += m;
    CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.max_norm_error < 1e-12);
    CHECK(r.clean_correct() <= r.marginal[r.correct_key] + 1e-12);
  }
}

TEST_CASE("compact engine reproduces the gate-level U_max exactly") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + trial % 2, n_p = 1 + trial % 2, t = 1 + trial % 3;
    std::vector<double> f(std::size_t{1} << n);
    for (double& x : f) x = u(rng);
    UMaxSpec spec;
    spec.n_bits = n;
    spec.n_p = n_p;
    spec.t = t;
    spec.f = [f](std::uint64_t, std::uint64_t y) { return f[y]; };
    RegisterLayout lay;
    add_umax_registers(lay, spec);
    QuantumState s(lay);
    std::uint64_t queries = 0;
    u_max_circuit(spec, &queries).apply(s);

    CompactResult c = compact_max(uniform_weights(f, n_p), n_p, t);
    auto gate = s.probabilities(spec.p);
    for (std::size_t k = 0; k < gate.size(); ++k) CHECK(std::fabs(gate[k] - c.marginal[k]) < 1e-10);
    // clean mass: every workspace register back at zero
    double clean = 0;
    for (std::uint64_t i = 0; i < s.amplitudes().size(); ++i) {
      if (s.reg_value(i, spec.st) || s.reg_value(i, spec.sr) || s.reg_value(i, spec.aux)) continue;
      if (s.reg_value(i, spec.p) == c.correct_key) clean += std::norm(s.amplitude(i));
    }
    CHECK(std::fabs(clean - c.clean_correct()) < 1e-10);
    CHECK(queries == c.prep_calls);
  }
}

TEST_CASE("dropping aux sectors leaves clean masses unchanged") {
  std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  CompactOptions keep, drop;
  drop.keep_aux = false;
  CompactResult a = compact_max(w, 2, 2, keep), b = compact_max(w, 2, 2, drop);
  for (std::size_t k = 0; k < 4; ++k) CHECK(a.clean_mass[k] == doctest::Approx(b.clean_mass[k]).epsilon(1e-12));
}

TEST_CASE("compact engine input validation") {
  CHECK_THROWS_AS(compact_max({0.5, 0.5, 0.0}, 2, 1), ConfigError);
  CHECK_THROWS_AS(compact_max({0.5, 0.6}, 1, 1), ConfigError);
  CHECK_THROWS_AS(compact_max({-0.5, 1.5}, 1, 1), ConfigError);
}
