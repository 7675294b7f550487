#include <cmath>
#include <random>

#include "doctest.h"
#include "qfn/qsim.hpp"

using namespace qfn;

namespace {

QuantumState fresh(RegisterLayout lay) {
  QuantumState s(std::move(lay));
  s.amplitudes()[0] = 1.0;
  return s;
}

void randomize(QuantumState& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double n = 0;
  for (auto& a : s.amplitudes()) {
    a = cplx(nd(rng), nd(rng));
    n += std::norm(a);
  }
  for (auto& a : s.amplitudes()) a /= std::sqrt(n);
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("register layout is contiguous with bit 1 most significant") {
  RegisterLayout lay;
  lay.add("a", 2);
  lay.add("b", 3, 0);
  CHECK(lay.total_qubits() == 5);
  CHECK(lay.get("b").offset == 2);
  CHECK(lay.qubit("b", 1) == 4);
  CHECK(lay.qubit("b", 3) == 2);
  CHECK_THROWS_AS(lay.add("a", 1), ConfigError);
  CHECK_THROWS(lay.get("zz"));
}

TEST_CASE("engine cap raises a resource error naming the layout") {
  RegisterLayout lay;
  lay.add("big", 10);
  lay.add("other", 5);
  try {
    QuantumState s(lay, 12);
    FAIL("expected overflow");
  } catch (const ResourceOverflow& e) {
    CHECK(std::string(e.what()).find("big") != std::string::npos);
  }
}

TEST_CASE("hadamard on all qubits gives the uniform state and is self inverse") {
  RegisterLayout lay;
  lay.add("r", 3);
  QuantumState s = fresh(lay);
  s.apply_hadamard_all("r");
  for (auto a : s.amplitudes()) CHECK(std::abs(a - cplx(1 / std::sqrt(8.0))) < 1e-14);
  s.apply_hadamard_all("r");
  CHECK(std::abs(s.amplitude(0) - 1.0) < 1e-14);
}

TEST_CASE("QFT followed by its inverse is the identity, and QFT of |0> is uniform") {
  RegisterLayout lay;
  lay.add("x", 1);
  lay.add("r", 4);
  QuantumState s(lay);
  randomize(s, 3);
  auto before = s.amplitudes();
  s.apply_qft("r");
  CHECK(std::fabs(s.norm() - 1) < 1e-12);
  s.apply_qft_inverse("r");
  CHECK(max_diff(before, s.amplitudes()) < 1e-12);

  QuantumState z = fresh(lay);
  z.apply_qft("r");
  auto p = z.probabilities("r");
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 16));
}

TEST_CASE("QFT maps a basis state to the expected phases") {
  RegisterLayout lay;
  lay.add("r", 3);
  QuantumState s(lay);
  const std::uint64_t j = 5;
  s.amplitudes()[0] = 0.0;
  s.amplitudes()[j] = 1.0;
  s.apply_qft("r");
  for (std::uint64_t k = 0; k < 8; ++k) {
    cplx want = std::polar(1 / std::sqrt(8.0), 2 * M_PI * double(j * k) / 8);
    CHECK(std::abs(s.amplitude(k) - want) < 1e-12);
  }
}

TEST_CASE("controls restrict operations to the matching block") {
  RegisterLayout lay;
  lay.add("c", 1);
  lay.add("t", 1);
  QuantumState s = fresh(lay);
  Controls c = Controls{}.with(lay.qubit("c", 1));
  s.apply_x(lay.qubit("t", 1), c);
  CHECK(std::abs(s.amplitude(0) - 1.0) < 1e-14);  // control off: nothing happens
  s.apply_x(lay.qubit("c", 1));
  s.apply_x(lay.qubit("t", 1), c);
  CHECK(std::abs(s.amplitude(3) - 1.0) < 1e-14);
}

TEST_CASE("reflection about zero flips every component except |0>") {
  RegisterLayout lay;
  lay.add("r", 2);
  QuantumState s(lay);
  randomize(s, 9);
  auto a = s.amplitudes();
  s.reflect_zero({"r"});
  CHECK(std::abs(s.amplitude(0) - a[0]) < 1e-14);
  for (int i = 1; i < 4; ++i) CHECK(std::abs(s.amplitude(i) + a[i]) < 1e-14);
}

TEST_CASE("phase oracle and involution act on the selected register") {
  RegisterLayout lay;
  lay.add("a", 2);
  lay.add("b", 1);
  QuantumState s(lay);
  randomize(s, 2);
  auto a = s.amplitudes();
  s.apply_phase_oracle("a", [](std::uint64_t v) { return v == 2; });
  for (std::uint64_t i = 0; i < 8; ++i) {
    const bool hit = s.reg_value(i, "a") == 2;
    CHECK(std::abs(s.amplitude(i) - (hit ? -a[i] : a[i])) < 1e-14);
  }
  const std::uint64_t bb = s.reg_mask("b");
  s.apply_involution([bb](std::uint64_t i) { return i ^ bb; });
  s.apply_involution([bb](std::uint64_t i) { return i ^ bb; });
  s.apply_phase_oracle("a", [](std::uint64_t v) { return v == 2; });
  CHECK(max_diff(a, s.amplitudes()) < 1e-14);
}

TEST_CASE("measurement is seeded and collapses onto the outcome") {
  RegisterLayout lay;
  lay.add("r", 3);
  QuantumState s1(lay), s2(lay);
  randomize(s1, 4);
  randomize(s2, 4);
  auto o1 = s1.measure("r", 77), o2 = s2.measure("r", 77);
  CHECK(o1 == o2);
  CHECK(s1.project_probability("r", o1) == doctest::Approx(1.0));
}

TEST_CASE("circuits apply adjoints in reverse order") {
  RegisterLayout lay;
  lay.add("r", 3);
  QuantumState s(lay);
  randomize(s, 5);
  auto a = s.amplitudes();
  Circuit c;
  c.add([](QuantumState& st, const Controls& k, bool adj) {
    if (adj)
      st.apply_qft_inverse("r", k);
    else
      st.apply_qft("r", k);
  });
  c.add([](QuantumState& st, const Controls& k, bool) { st.apply_h(0, k); });
  c.apply(s);
  c.apply(s, {}, true);
  CHECK(max_diff(a, s.amplitudes()) < 1e-12);
}

TEST_CASE("state dump labels nonzero amplitudes by register") {
  RegisterLayout lay;
  lay.add("r", 2);
  QuantumState s = fresh(lay);
  s.apply_x(0);
  std::string d = s.dump();
  CHECK(d.find("r=") != std::string::npos);
}
