#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "qfn/decompose.hpp"
#include "qfn/dist.hpp"
#include "qfn/fgraph.hpp"
#include "qfn/hier.hpp"
#include "qfn/network.hpp"
#include "qfn/primitives.hpp"
#include "qfn/qsim.hpp"
#include "sweeps.hpp"

namespace qfn::app {

namespace {

// ---- pinned tolerances ----
constexpr double kStateTol = 1e-12;      // exact-zero state, dirty output mass
constexpr double kSpectralTol = 1e-10;   // <psi|U_AA|psi> = 1 - 2 p_z
constexpr double kAffineTol = 1e-12;     // normalization recovery
constexpr double kMassSlack = 1e-12;     // floating slack on probability lower bounds
constexpr double kBandSlack = 0.10;      // query band widening
constexpr double kMultiplierTol = 0.01;  // hier multipliers
constexpr double kCrossTol = 1e-9;       // faithful vs compact marginals

// reference anchors
constexpr double kBandLo = 1.37, kBandHi = 302.0;
constexpr std::uint64_t kStarAt24 = 17280, kLineAt24 = 9720;
constexpr double kQueryMult[3] = {4.27, 2.55e3, 1.17e4};  // hybrid_root, hybrid_level1, hybrid_all
constexpr double kEprMult[2] = {3.49, 0.236};             // hybrid_root, hybrid_level1

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---- independent oracles ----

// t from the rule stated in the contract, evaluated here without the library
int oracle_t(double c, double delta, bool corrected = false) {
  double x = -0.5 * std::log2(delta * c) - (corrected ? 0.0 : 0.5);
  int t = static_cast<int>(std::ceil(x - 1e-12));
  return std::max(0, t);
}

std::uint64_t oracle_floor_key(double v, int n_p) {
  double k = std::floor(v * std::ldexp(1.0, n_p) + 1e-12);
  k = std::max(0.0, std::min(k, std::ldexp(1.0, n_p) - 1));
  return static_cast<std::uint64_t>(k);
}

double oracle_factor(const FactorGraph& g, const Factor& f, const std::vector<int>& x) {
  std::size_t idx = 0;
  for (int v : f.scope) idx = idx * static_cast<std::size_t>(g.cardinality(v)) + static_cast<std::size_t>(x[v]);
  return f.table[idx];
}

// Calls fn(x) for every assignment of g (variable 0 most significant).
template <class Fn>
void for_each_assignment(const FactorGraph& g, Fn fn) {
  std::vector<int> x(g.num_vars(), 0);
  while (true) {
    fn(x);
    int v = g.num_vars() - 1;
    while (v >= 0 && ++x[v] == g.cardinality(v)) x[v--] = 0;
    if (v < 0) break;
  }
}

struct OracleMax {
  double g_max = -1e300;
  std::vector<int> argmax;
  std::uint64_t z_key = 0;  // largest N_p-bit value not above resident + sum of floored local maxima
};

OracleMax oracle_max(const FactorGraph& g, const BoundarySplit& s, int n_p) {
  OracleMax o;
  std::vector<int> factor_part(g.num_factors(), -1);
  for (int n = 0; n < s.num_parts(); ++n)
    for (int f : s.parts[n].factors) factor_part[f] = n;
  std::map<std::vector<int>, std::vector<double>> best;  // boundary assignment -> per-part max, then resident
  for_each_assignment(g, [&](const std::vector<int>& x) {
    std::vector<double> part(s.num_parts() + 1, 0.0);
    double total = 0.0;
    for (int f = 0; f < g.num_factors(); ++f) {
      double v = oracle_factor(g, g.factor(f), x);
      total += v;
      part[factor_part[f] < 0 ? s.num_parts() : factor_part[f]] += v;
    }
    if (total > o.g_max) {
      o.g_max = total;
      o.argmax = x;
    }
    std::vector<int> xb;
    for (int v : s.boundary) xb.push_back(x[v]);
    auto it = best.find(xb);
    if (it == best.end()) {
      best.emplace(xb, part);
    } else {
      for (int n = 0; n < s.num_parts(); ++n) it->second[n] = std::max(it->second[n], part[n]);
    }
  });
  for (const auto& [xb, part] : best) {
    double sum = part[s.num_parts()];
    for (int n = 0; n < s.num_parts(); ++n) sum += oracle_floor_key(part[n], n_p) * std::ldexp(1.0, -n_p);
    o.z_key = std::max(o.z_key, oracle_floor_key(sum, n_p));
  }
  return o;
}

// weighted shortest hop distances from the coordinator, recomputed from the edge list
std::vector<int> oracle_distances(const NetworkModel& net) {
  const int n = net.num_nodes();
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (const auto& e : net.edges()) {
    adj[e[0]].push_back({e[1], e[2]});
    adj[e[1]].push_back({e[0], e[2]});
  }
  std::vector<int> d(n, 1 << 29);
  using Item = std::pair<int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  d[0] = 0;
  q.push({0, 0});
  while (!q.empty()) {
    auto [dv, v] = q.top();
    q.pop();
    if (dv != d[v]) continue;
    for (auto [u, w] : adj[v])
      if (dv + w < d[u]) {
        d[u] = dv + w;
        q.push({d[u], u});
      }
  }
  return d;
}

// closed forms re-derived term by term
std::uint64_t oracle_u_ini(int n_p, int t) { return static_cast<std::uint64_t>(n_p) * ((std::uint64_t{4} << t) - 2); }

std::uint64_t oracle_c_distr(int n_p, int t_c, const std::vector<int>& t_n) {
  std::uint64_t s = 0;
  for (int t : t_n) s += (std::uint64_t{4} << t) - 2;
  return static_cast<std::uint64_t>(n_p) * n_p * ((std::uint64_t{4} << t_c) - 2) * s;
}

// per-worker load of one run; summed with hop weights by the caller
std::uint64_t oracle_worker_epr(int n_p, int t, int vb_n) {
  const std::uint64_t np = static_cast<std::uint64_t>(n_p);
  const std::uint64_t traffic = np * ((std::uint64_t{4} << t) - 2) * (2 * static_cast<std::uint64_t>(vb_n) + np);
  const std::uint64_t refl = np * ((std::uint64_t{2} << t) - 2) * 2;
  const std::uint64_t ctrl = np * static_cast<std::uint64_t>(t) * 2;
  return traffic + refl + ctrl;
}

std::uint64_t oracle_epr(int n_p, int t, const std::vector<int>& vb, const std::vector<int>* dist = nullptr) {
  std::uint64_t s = 0;
  for (std::size_t n = 0; n < vb.size(); ++n)
    s += oracle_worker_epr(n_p, t, vb[n]) * (dist ? static_cast<std::uint64_t>((*dist)[n + 1]) : 1);
  return s;
}

// Applies a dense unitary to a register (other qubits untouched), respecting controls.
void apply_dense(QuantumState& s, const std::string& reg, const Eigen::MatrixXcd& u, const Controls& c, bool adj) {
  const Register& r = s.layout().get(reg);
  const std::uint64_t dim = pow2(r.width);
  const std::uint64_t rmask = s.reg_mask(reg);
  auto& a = s.amplitudes();
  Eigen::VectorXcd in(dim), out;
  const Eigen::MatrixXcd m = adj ? Eigen::MatrixXcd(u.adjoint()) : u;
  for (std::uint64_t base = 0; base < a.size(); ++base) {
    if (base & rmask) continue;
    if (!c.match(base)) continue;
    for (std::uint64_t k = 0; k < dim; ++k) in[k] = a[base | (k << r.offset)];
    out = m * in;
    for (std::uint64_t k = 0; k < dim; ++k) a[base | (k << r.offset)] = out[k];
  }
}

Eigen::MatrixXcd haar_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = cplx(nd(rng), nd(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    cplx d = rr(j, j);
    q.col(j) *= std::abs(d) > 0 ? d / std::abs(d) : cplx(1.0);
  }
  return q;
}

// ---- criterion bodies ----

using Log = std::function<void(const std::string&)>;

CriterionResult c1_counters(const AcceptanceOptions& opt) {
  CriterionResult r;
  int configs = 0, mismatches = 0, faithful = 0;
  const double deltas[3] = {0.1, 0.2, 0.25};
  std::string first_bad;
  for (int n_p = 1; n_p <= 3; ++n_p)
    for (int n_g = 1; n_g <= 3; ++n_g)
      for (int n_b = 0; n_b <= 2; ++n_b)
        for (double delta : deltas) {
          const double pmin_c = std::pow(1.0 - delta, 2.0 * n_p * n_g) / std::ldexp(1.0, n_b);
          const int t_c = oracle_t(pmin_c, delta);
          const int t_n = oracle_t(0.5, delta);  // one bit per worker
          if (t_c > 4 || t_n > 4) continue;
          StarInstance inst = star_boundary_instance(n_b, n_g, 1, opt.seed + configs);
          PrecisionParams pp;
          pp.n_p = n_p;
          pp.delta = delta;
          DistRunConfig cfg = star_config(inst, pp, TopologyKind::single_hop);
          cfg.readout = Readout::correct;
          // a few small configurations also go through the gate-level simulator
          const bool gate = n_p == 1 && n_g <= 2 && n_b <= 1 && delta == 0.25;
          std::vector<SimMode> modes{SimMode::compact};
          if (gate) modes.push_back(SimMode::faithful);
          std::vector<int> vb(n_g, n_b);
          const std::uint64_t want_u = oracle_u_ini(n_p, t_c);
          const std::uint64_t want_q = oracle_c_distr(n_p, t_c, std::vector<int>(n_g, t_n));
          const std::uint64_t want_e = oracle_epr(n_p, t_c, vb);
          for (SimMode m : modes) {
            cfg.mode = m;
            DistResult d = a_dist(cfg);
            const bool ok = d.ledger.u_ini_calls == want_u && d.ledger.leaf_queries == want_q &&
                            d.ledger.epr_total() == want_e && d.t_c == t_c;
            if (m == SimMode::faithful) ++faithful;
            if (!ok) {
              ++mismatches;
              if (first_bad.empty())
                first_bad = fmt("N_p=%d N_G=%d |V_B|=%d delta=%g %s: u %llu/%llu q %llu/%llu epr %llu/%llu", n_p, n_g,
                                n_b, delta, to_string(m).c_str(), (unsigned long long)d.ledger.u_ini_calls,
                                (unsigned long long)want_u, (unsigned long long)d.ledger.leaf_queries,
                                (unsigned long long)want_q, (unsigned long long)d.ledger.epr_total(),
                                (unsigned long long)want_e);
            }
          }
          ++configs;
        }
  r.pass = configs >= 20 && mismatches == 0;
  r.details.push_back(fmt("%d configurations (%d also gate-level), %d counter mismatches", configs, faithful, mismatches));
  if (!first_bad.empty()) r.details.push_back("first mismatch: " + first_bad);
  return r;
}

struct PhaseTestOutcome {
  double zero_dev = 0.0;
  double clean = 0.0;
  double dirty_out1 = 0.0;
  double oracle_clean = 0.0;
};

PhaseTestOutcome run_phase_test(int n, const std::vector<bool>& marked, int t) {
  RegisterLayout lay;
  lay.add("q_t", n);
  lay.add("q_est", std::max(t, 1));
  lay.add("q_out", 1);
  lay.add("q_aux", 1);
  QuantumState s(lay, 24);
  s.amplitudes()[0] = 1.0;
  Circuit prep = default_state_prep("q_t");
  Circuit uaa = build_uaa(prep, {"q_t"}, [marked](QuantumState& st, const Controls& c) {
    st.apply_phase_oracle("q_t", [&marked](std::uint64_t v) { return static_cast<bool>(marked[v]); }, c);
  });
  PhaseTestRegs regs;
  regs.est = "q_est";
  regs.target = {"q_t"};
  regs.out_qubit = lay.qubit("q_out", 1);
  regs.aux_qubit = lay.qubit("q_aux", 1);
  // t = 0 still allocates one estimation qubit; the test then runs with a single U_o power
  phase_test_circuit(prep, uaa, regs).apply(s);

  PhaseTestOutcome o;
  const std::uint64_t ws = s.reg_mask("q_t") | s.reg_mask("q_est");
  const std::uint64_t ob = pow2(regs.out_qubit), ab = pow2(regs.aux_qubit);
  for (std::uint64_t i = 0; i < s.amplitudes().size(); ++i) {
    const double p = std::norm(s.amplitudes()[i]);
    const cplx want = i == 0 ? cplx(1.0) : cplx(0.0);
    o.zero_dev = std::max(o.zero_dev, std::abs(s.amplitudes()[i] - want));
    if ((i & ob) && !(i & ab) && !(i & ws)) o.clean += p;
    if ((i & ob) && (i & ws)) o.dirty_out1 += p;
  }
  // eigenphases +-2 theta, sin^2 theta = p; P(est = 0) is the Fejer kernel at E = 2^t'
  std::size_t cnt = 0;
  for (bool b : marked) cnt += b;
  const double p = static_cast<double>(cnt) / marked.size();
  const double theta = std::asin(std::sqrt(p));
  const double e = std::ldexp(1.0, std::max(t, 1));
  const double phi = 2.0 * theta;
  cplx acc = 0.0;
  for (int k = 0; k < static_cast<int>(e); ++k) acc += std::polar(1.0, k * phi);
  const double p0 = std::norm(acc / e);
  o.oracle_clean = (1.0 - p0) * (1.0 - p0);
  return o;
}

CriterionResult c2_phase_test(const AcceptanceOptions& opt) {
  CriterionResult r;
  std::mt19937_64 rng(opt.seed ^ 0x2222);
  const double deltas[4] = {0.1, 0.2, 0.25, 0.3};
  int zero_inst = 0, pos_inst = 0, zero_bad = 0, dirty_bad = 0, oracle_bad = 0;
  int below_standard = 0, below_corrected = 0;
  double worst_ratio = 1e9;
  std::string worst;
  for (int inst = 0; inst < 60; ++inst) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const std::uint64_t dim = pow2(n);
    const double delta = deltas[rng() % 4];
    std::vector<bool> marked(dim, false);
    std::size_t cnt = 0;
    if (inst % 6 != 0) {  // every sixth instance has p = 0
      cnt = 1 + rng() % (dim - 1);
      std::vector<std::uint64_t> idx(dim);
      for (std::uint64_t i = 0; i < dim; ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t k = 0; k < cnt; ++k) marked[idx[k]] = true;
    }
    const double p_min = 1.0 / static_cast<double>(dim);
    const double bound = (1.0 - delta) * (1.0 - delta);
    for (int rule = 0; rule < 2; ++rule) {
      const int t = t_count(p_min, delta, rule ? TRule::corrected : TRule::standard);
      PhaseTestOutcome o = run_phase_test(n, marked, t);
      if (cnt == 0) {
        if (rule == 0) ++zero_inst;
        if (o.zero_dev > kStateTol) ++zero_bad;
        continue;
      }
      if (rule == 0) ++pos_inst;
      if (o.dirty_out1 > kStateTol) ++dirty_bad;
      if (std::fabs(o.clean - o.oracle_clean) > 1e-10) ++oracle_bad;
      if (o.clean + kMassSlack < bound) {
        (rule ? below_corrected : below_standard)++;
      }
      if (rule == 0 && o.clean / bound < worst_ratio) {
        worst_ratio = o.clean / bound;
        worst = fmt("n=%d p=%g delta=%g t=%d clean=%.4f bound=%.4f", n, double(cnt) / dim, delta, t, o.clean, bound);
      }
    }
  }
  r.pass = zero_inst + pos_inst >= 50 && zero_bad == 0 && dirty_bad == 0 && below_standard == 0;
  r.details.push_back(fmt("%d instances (%d with p = 0); exact-zero violations %d; dirty output-1 violations %d",
                          zero_inst + pos_inst, zero_inst, zero_bad, dirty_bad));
  r.details.push_back(fmt("clean mass vs analytic Fejer-kernel oracle: %d mismatches", oracle_bad));
  r.details.push_back(fmt("standard t rule: %d/%d instances below (1-delta)^2; worst %s", below_standard, pos_inst,
                          worst.c_str()));
  r.details.push_back(fmt("info: corrected t rule (no -1/2 offset): %d/%d below (1-delta)^2", below_corrected, pos_inst));
  if (oracle_bad) r.pass = false;
  return r;
}

CriterionResult c3_spectral(const AcceptanceOptions& opt) {
  CriterionResult r;
  std::mt19937_64 rng(opt.seed ^ 0x3333);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  int pairs = 0;
  for (; pairs < 120; ++pairs) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const int dim = 1 << n;
    Eigen::MatrixXcd u = haar_unitary(dim, rng);
    std::vector<double> f(dim);
    for (double& v : f) v = u01(rng);
    const double z = pairs % 10 == 0 ? 1.5 : u01(rng);  // some thresholds mark nothing
    RegisterLayout lay;
    lay.add("q", n);
    QuantumState s(lay, 24);
    s.amplitudes()[0] = 1.0;
    Circuit prep;
    prep.add([u](QuantumState& st, const Controls& c, bool adj) { apply_dense(st, "q", u, c, adj); });
    prep.apply(s);
    const std::vector<cplx> psi = s.amplitudes();
    double p_z = 0.0;
    for (int i = 0; i < dim; ++i)
      if (f[i] >= z) p_z += std::norm(psi[i]);
    Circuit uaa = build_uaa(prep, {"q"}, [f, z](QuantumState& st, const Controls& c) {
      st.apply_phase_oracle("q", [&](std::uint64_t v) { return f[v] >= z; }, c);
    });
    uaa.apply(s);
    cplx ip = 0.0;
    for (int i = 0; i < dim; ++i) ip += std::conj(psi[i]) * s.amplitudes()[i];
    worst = std::max(worst, std::abs(ip - cplx(1.0 - 2.0 * p_z, 0.0)));
  }
  r.pass = pairs >= 100 && worst <= kSpectralTol;
  r.details.push_back(fmt("%d (Haar state, threshold) pairs; max |<psi|U_AA|psi> - (1 - 2 p_z)| = %.3e", pairs, worst));
  return r;
}

// random normalized instance with at most max_bits binary variables and a split found by search
struct RandomDistInstance {
  FactorGraph graph;
  std::vector<int> boundary;
};

RandomDistInstance random_dist_instance(std::mt19937_64& rng, int max_bits) {
  while (true) {
    RandomGraphSpec gs;
    gs.num_vars = 3 + static_cast<int>(rng() % 6);
    gs.max_cardinality = 2 + static_cast<int>(rng() % 2);
    gs.num_factors = gs.num_vars + static_cast<int>(rng() % 3);
    gs.max_scope = 2;
    gs.connected = rng() % 2;
    Normalized nz = normalize(random_graph(gs, rng()));
    if (nz.graph.num_vars() > max_bits || nz.graph.num_vars() < 2) continue;
    RandomDistInstance inst;
    inst.graph = std::move(nz.graph);
    SeparatorResult sep = suggest_boundary(inst.graph, 2 + static_cast<int>(rng() % 2), rng());
    if (sep.found) inst.boundary = sep.boundary;
    if (split(inst.graph, inst.boundary).num_parts() == 0) continue;
    return inst;
  }
}

CriterionResult c4_end_to_end(const AcceptanceOptions& opt) {
  CriterionResult r;
  std::mt19937_64 rng(opt.seed ^ 0x4444);
  const double delta = 0.1;
  int n = 0, key_bad = 0, mass_bad = 0, gap_bad = 0, overlap_bad = 0, clean_bad = 0, cross = 0, cross_bad = 0;
  double worst_mass_ratio = 1e9;
  for (; n < 100; ++n) {
    RandomDistInstance inst = random_dist_instance(rng, 10);
    PrecisionParams pp;
    pp.n_p = 1 + static_cast<int>(rng() % 3);
    pp.delta = delta;
    DistRunConfig cfg = make_config(inst.graph, inst.boundary, pp);
    cfg.readout = Readout::correct;
    cfg.seed = opt.seed + n;
    DistResult d = a_dist(cfg);
    OracleMax o = oracle_max(inst.graph, cfg.split, pp.n_p);
    const double bound = std::pow(1.0 - delta, 2.0 * pp.n_p);
    const double mass = o.z_key < d.marginal.size() ? d.marginal[o.z_key] : 0.0;
    if (d.correct_key != o.z_key) ++key_bad;
    if (mass + kMassSlack < bound) ++mass_bad;
    if (d.clean_correct_mass + kMassSlack < bound) ++clean_bad;
    worst_mass_ratio = std::min(worst_mass_ratio, mass / bound);
    const double gap = o.g_max - z_dec(o.z_key, pp.n_p);
    const double gap_bound = (cfg.split.num_parts() + 1) * std::ldexp(1.0, -pp.n_p);
    if (gap < -1e-12 || gap > gap_bound + 1e-12) ++gap_bad;
    for (double pz : d.p_z)
      if (pz > 1e-13 && pz + 1e-12 < d.p_min_c) ++overlap_bad;
    if (cross < 4) {
      DistRunConfig fc = cfg;
      fc.mode = SimMode::faithful;
      fc.max_qubits = 16;
      try {
        DistResult fd = a_dist(fc);
        double diff = 0.0;
        for (std::size_t k = 0; k < d.marginal.size(); ++k)
          diff = std::max(diff, std::fabs(d.marginal[k] - fd.marginal[k]));
        if (diff > kCrossTol || fd.ledger.leaf_queries != d.ledger.leaf_queries) ++cross_bad;
        ++cross;
      } catch (const ResourceOverflow&) {
      }
    }
  }
  r.pass = key_bad == 0 && mass_bad == 0 && gap_bad == 0 && overlap_bad == 0 && cross_bad == 0;
  r.details.push_back(fmt("%d instances (delta = 0.1, N_p <= 3, |V| <= 10)", n));
  r.details.push_back(fmt("z_max,p,c vs brute force: %d mismatches; gap bound violations %d", key_bad, gap_bad));
  r.details.push_back(fmt("mass on correct output below (1-delta)^(2N_p): %d (min ratio %.4f); clean-branch shortfalls %d",
                          mass_bad, worst_mass_ratio, clean_bad));
  r.details.push_back(fmt("p_z > 0 below p_min,c: %d; faithful cross-checks %d, mismatches %d", overlap_bad, cross,
                          cross_bad));
  return r;
}

CriterionResult c5_topology(const AcceptanceOptions& opt) {
  CriterionResult r;
  const PrecisionParams kp = topology_sweep_params();
  int bound_bad = 0, eq_bad = 0, closed_bad = 0, order_bad = 0, mono_bad = 0, checks = 0, invariance_bad = 0;
  // topology family, instrumented and cost-model
  std::vector<NetworkPoint> pts = topology_sweep_points({2, 3, 4, 5, 6, 7, 8});
  std::vector<NetworkRow> rows(pts.size());
  parallel_for(pts.size(), opt.jobs, [&](std::size_t i) { rows[i] = run_network_point(pts[i], kp, opt.seed, true); });
  std::map<int, std::map<TopologyKind, std::uint64_t>> by_b;
  std::map<int, std::uint64_t> leaf_by_b;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const NetworkRow& row = rows[i];
    StarInstance inst = star_boundary_instance(row.pt.n_b, row.pt.n_g, 1, opt.seed, row.pt.reach);
    DistRunConfig cfg = star_config(inst, kp, row.pt.topo, row.pt.stretch);
    std::vector<int> d = oracle_distances(cfg.network);
    const int diam = *std::max_element(d.begin() + 1, d.end());
    std::vector<int> vb = local_boundary_sizes(inst.graph, cfg.split);
    const double pmin = std::pow(1.0 - kp.delta, 2.0 * kp.n_p * row.pt.n_g) / std::ldexp(1.0, row.pt.n_b);
    const int t = oracle_t(pmin, kp.delta);
    const std::uint64_t single = oracle_epr(kp.n_p, t, vb);
    const std::uint64_t weighted = oracle_epr(kp.n_p, t, vb, &d);
    ++checks;
    if (row.epr_sim != weighted || row.epr_closed != weighted) ++closed_bad;
    if (row.epr_sim > static_cast<std::uint64_t>(diam) * single) ++bound_bad;
    bool uniform = std::all_of(d.begin() + 1, d.end(), [&](int x) { return x == diam; });
    if (uniform && row.epr_sim != static_cast<std::uint64_t>(diam) * single) ++eq_bad;
    by_b[row.pt.n_b][row.pt.topo] = row.epr_closed;
    auto [it, fresh] = leaf_by_b.emplace(row.pt.n_b, row.leaf_sim);
    if (!fresh && it->second != row.leaf_sim) ++invariance_bad;
  }
  std::string first_order;
  for (const auto& [b, m] : by_b) {
    const auto topo = sweep_topologies();  // line, ring, tree, mesh, star
    for (std::size_t k = 0; k + 1 < topo.size(); ++k)
      if (!(m.at(topo[k]) > m.at(topo[k + 1]))) {
        ++order_bad;
        if (first_order.empty())
          first_order = fmt("|V_B|=%d: %s %llu vs %s %llu", b, to_string(topo[k]).c_str(),
                            (unsigned long long)m.at(topo[k]), to_string(topo[k + 1]).c_str(),
                            (unsigned long long)m.at(topo[k + 1]));
      }
  }
  // diameter family: stretching
  const PrecisionParams lp = diameter_sweep_params();
  std::vector<NetworkPoint> dpts = diameter_sweep_points({1, 2, 3, 4, 6, 8, 12, 16, 24, 32});
  std::vector<NetworkRow> drows(dpts.size());
  parallel_for(dpts.size(), opt.jobs,
               [&](std::size_t i) { drows[i] = run_network_point(dpts[i], lp, opt.seed, true); });
  std::map<TopologyKind, std::vector<std::pair<int, std::uint64_t>>> curves;
  std::uint64_t star24 = 0, line24 = 0;
  for (const auto& row : drows) {
    ++checks;
    if (row.epr_sim > row.epr_bound) ++bound_bad;
    if (row.uniform && row.epr_sim != row.epr_bound) ++eq_bad;
    if (row.epr_sim != row.epr_closed) ++closed_bad;
    curves[row.pt.topo].push_back({row.diameter, row.epr_sim});
    if (row.diameter == 24 && row.pt.topo == TopologyKind::star) star24 = row.epr_sim;
    if (row.diameter == 24 && row.pt.topo == TopologyKind::line) line24 = row.epr_sim;
  }
  for (auto& [k, c] : curves) {
    std::sort(c.begin(), c.end());
    for (std::size_t i = 1; i < c.size(); ++i)
      if (c[i].second < c[i - 1].second) ++mono_bad;
  }
  const bool pinned = star24 == kStarAt24 && line24 == kLineAt24;
  r.pass = bound_bad == 0 && eq_bad == 0 && closed_bad == 0 && order_bad == 0 && mono_bad == 0 &&
           invariance_bad == 0 && pinned;
  r.details.push_back(fmt("%d runs: bound violations %d, uniform-distance equality failures %d, closed-form mismatches %d",
                          checks, bound_bad, eq_bad, closed_bad));
  r.details.push_back(fmt("query counters topology invariant: %s", invariance_bad ? "no" : "yes"));
  r.details.push_back(fmt("ordering line > ring > tree > mesh > star over |V_B| = 2..8: %d violations%s%s", order_bad,
                          first_order.empty() ? "" : "; first ", first_order.c_str()));
  r.details.push_back(fmt("stretch monotonicity violations: %d", mono_bad));
  r.details.push_back(fmt("diameter 24: star %llu (pinned %llu), line %llu (pinned %llu)", (unsigned long long)star24,
                          (unsigned long long)kStarAt24, (unsigned long long)line24, (unsigned long long)kLineAt24));
  return r;
}

CriterionResult c6_query_band(const AcceptanceOptions& opt) {
  CriterionResult r;
  const PrecisionParams qp = query_sweep_params();
  auto pts = query_sweep_points(default_query_vars());
  std::vector<QueryRow> rows(pts.size());
  parallel_for(pts.size(), opt.jobs, [&](std::size_t i) { rows[i] = run_query_point(pts[i], qp, opt.seed, true); });
  int above = 0, counter_bad = 0;
  for (const auto& row : rows) {
    if (row.leaf_sim > row.bench_queries) ++above;
    const double pmin = std::pow(1.0 - qp.delta, 2.0 * qp.n_p * row.pt.n_g) / std::ldexp(1.0, row.pt.n_b);
    const int t_c = oracle_t(pmin, qp.delta);
    const int t_n = oracle_t(std::ldexp(1.0, -row.pt.r), qp.delta);
    if (row.leaf_sim != oracle_c_distr(qp.n_p, t_c, std::vector<int>(row.pt.n_g, t_n))) ++counter_bad;
  }
  const double lo = kBandLo * (1 - kBandSlack), hi = kBandHi * (1 + kBandSlack);
  const double r0 = rows.front().ratio, r1 = rows.back().ratio;
  const bool band = r0 >= lo && r0 <= hi && r1 >= lo && r1 <= hi;
  r.pass = above == 0 && counter_bad == 0 && band;
  r.details.push_back(fmt("%zu points |V| = 8..20: a_dist above benchmark at %d, leaf-count mismatches %d", rows.size(),
                          above, counter_bad));
  r.details.push_back(fmt("endpoint ratios %.3f (|V|=8) and %.3f (|V|=20); band [%.3f, %.1f]", r0, r1, lo, hi));
  r.details.push_back(fmt("info: reference endpoints %.2f and %.0f", kBandLo, kBandHi));
  return r;
}

CriterionResult c7_policies(const AcceptanceOptions& opt) {
  CriterionResult r;
  const PrecisionParams hp = policy_sweep_params();
  const auto path = policy_family_path();
  std::vector<std::vector<HierSweepRow>> parts(path.size());
  parallel_for(path.size(), opt.jobs,
               [&](std::size_t i) { parts[i] = policy_sweep_point(path[i], hp, true, opt.seed); });
  int order_bad = 0, counter_bad = 0, epr_zero_bad = 0, simulated = 0;
  std::vector<std::uint64_t> hall;
  for (const auto& rows : parts) {
    for (std::size_t k = 0; k + 1 < rows.size(); ++k)
      if (!(rows[k].exec.report.c_hier < rows[k + 1].exec.report.c_hier)) ++order_bad;
    for (const auto& row : rows) {
      if (row.exec.simulated) {
        ++simulated;
        if (row.exec.run.queries != row.exec.report.c_hier || row.exec.run.epr != row.exec.report.n_epr_hier)
          ++counter_bad;
      }
      if (row.policy == "hybrid_all") {
        if (row.exec.report.n_epr_hier != 0) ++epr_zero_bad;
        hall.push_back(row.exec.report.c_hier);
      }
    }
  }
  const auto& last = parts.back();
  double qm[3], em[2];
  for (int k = 0; k < 3; ++k) qm[k] = last[k + 1].query_multiplier;
  for (int k = 0; k < 2; ++k) em[k] = last[k + 1].epr_multiplier;
  int mult_bad = 0;
  for (int k = 0; k < 3; ++k)
    if (std::fabs(qm[k] / kQueryMult[k] - 1) > kMultiplierTol) ++mult_bad;
  for (int k = 0; k < 2; ++k)
    if (std::fabs(em[k] / kEprMult[k] - 1) > kMultiplierTol) ++mult_bad;
  r.pass = order_bad == 0 && counter_bad == 0 && epr_zero_bad == 0 && mult_bad == 0 && simulated > 0;
  r.details.push_back(fmt("13 points: strict ordering violations %d; hybrid_all nonzero EPR rows %d", order_bad,
                          epr_zero_bad));
  r.details.push_back(fmt("statevector vs cost-model counters: %d rows simulated, %d mismatches", simulated,
                          counter_bad));
  r.details.push_back(fmt("|V|=20 query multipliers %.3g / %.3g / %.3g (pinned 4.27 / 2.55e3 / 1.17e4)", qm[0], qm[1],
                          qm[2]));
  r.details.push_back(fmt("|V|=20 EPR multipliers %.3g / %.3g (pinned 3.49 / 0.236); %d outside +-1%%", em[0], em[1],
                          mult_bad));
  return r;
}

// Binary graph with strong unary preferences so that each self-reduction decision has a margin.
FactorGraph planted_instance(std::mt19937_64& rng, int nv) {
  std::uniform_real_distribution<double> strong(0.17, 0.21), weak(0.0, 0.015);
  FactorGraph g;
  for (int v = 0; v < nv; ++v) g.add_variable(2, v + 1);
  for (int v = 0; v < nv; ++v) {
    const double a = strong(rng);
    g.add_factor({v}, rng() % 2 ? std::vector<double>{0.0, a} : std::vector<double>{a, 0.0});
  }
  for (int v = 0; v + 1 < nv; ++v) g.add_factor({v, v + 1}, {weak(rng), weak(rng), weak(rng), weak(rng)});
  return g;
}

// margin of decision i: best value with x_i = 0 vs x_i = 1 given the argmax prefix
double decision_margin(const FactorGraph& g) {
  const int nv = g.num_vars();
  std::vector<int> best_x;
  double best = -1e300;
  for_each_assignment(g, [&](const std::vector<int>& x) {
    double v = 0;
    for (const auto& f : g.factors()) v += oracle_factor(g, f, x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  });
  double margin = 1e300;
  for (int i = 0; i < nv; ++i) {
    double m[2] = {-1e300, -1e300};
    for_each_assignment(g, [&](const std::vector<int>& x) {
      for (int j = 0; j < i; ++j)
        if (x[j] != best_x[j]) return;
      double v = 0;
      for (const auto& f : g.factors()) v += oracle_factor(g, f, x);
      m[x[i]] = std::max(m[x[i]], v);
    });
    margin = std::min(margin, std::fabs(m[0] - m[1]));
  }
  return margin;
}

CriterionResult c8_config(const AcceptanceOptions& opt) {
  CriterionResult r;
  std::mt19937_64 rng(opt.seed ^ 0x8888);
  int planted = 0, planted_bad = 0, inv_bad = 0, bound_bad = 0, random_n = 0, margin_skip = 0;
  double joint_min = 1.0;
  while (planted < 50) {
    const int nv = 3 + static_cast<int>(rng() % 2);
    FactorGraph g = planted_instance(rng, nv);
    PrecisionParams pp;
    pp.n_p = 6;
    pp.delta = 0.1;
    const double Delta = 2.0 * std::ldexp(1.0, -pp.n_p);  // N_G = 1
    if (decision_margin(g) <= 4 * Delta) {
      ++margin_skip;
      continue;
    }
    DistRunConfig cfg = make_config(g, {}, pp);
    cfg.readout = Readout::correct;
    cfg.keep_aux = false;
    ConfigResult c = a_dist_config(cfg);
    MaxResult bf = brute_force_max(g);
    if (c.x != bf.argmax) ++planted_bad;
    if (static_cast<int>(c.runs.size()) != 2 * nv + 1) ++inv_bad;
    joint_min = std::min(joint_min, c.joint_clean_mass);
    ++planted;
  }
  for (; random_n < 30; ++random_n) {
    RandomDistInstance inst = random_dist_instance(rng, 7);
    PrecisionParams pp;
    pp.n_p = 2 + static_cast<int>(rng() % 2);
    pp.delta = 0.1;
    DistRunConfig cfg = make_config(inst.graph, inst.boundary, pp);
    cfg.readout = Readout::correct;
    cfg.keep_aux = false;
    ConfigResult c = a_dist_config(cfg);
    OracleMax o = oracle_max(inst.graph, cfg.split, pp.n_p);
    const int nv = inst.graph.num_vars();
    const double bound = 4.0 * nv * (cfg.split.num_parts() + 1) * std::ldexp(1.0, -pp.n_p);
    double gx = 0;
    for (const auto& f : inst.graph.factors()) gx += oracle_factor(inst.graph, f, c.x);
    if (std::fabs(gx - o.g_max) > bound + 1e-12) ++bound_bad;
    if (static_cast<int>(c.runs.size()) != 2 * nv + 1) ++inv_bad;
  }
  r.pass = planted >= 50 && planted_bad == 0 && inv_bad == 0 && bound_bad == 0;
  r.details.push_back(fmt("%d planted instances (margin > 4 Delta, N_p = 6): %d wrong assignments; %d redrawn for margin",
                          planted, planted_bad, margin_skip));
  r.details.push_back(fmt("%d random instances: accuracy bound violations %d; invocation count mismatches %d", random_n,
                          bound_bad, inv_bad));
  r.details.push_back(fmt("info: min joint clean mass on planted instances %.4f", joint_min));
  return r;
}

CriterionResult c9_normalization(const AcceptanceOptions& opt) {
  CriterionResult r;
  std::mt19937_64 rng(opt.seed ^ 0x9999);
  int argmax_bad = 0, decode_bad = 0, range_bad = 0;
  double worst_affine = 0.0;
  for (int i = 0; i < 200; ++i) {
    RandomGraphSpec gs;
    gs.num_vars = 2 + static_cast<int>(rng() % 5);
    gs.max_cardinality = 2 + static_cast<int>(rng() % 4);
    gs.num_factors = 1 + static_cast<int>(rng() % 7);
    gs.max_scope = 1 + static_cast<int>(rng() % 3);
    gs.lo = -5.0 + 4.0 * std::uniform_real_distribution<double>()(rng);
    gs.hi = gs.lo + 0.5 + 5.0 * std::uniform_real_distribution<double>()(rng);
    gs.connected = rng() % 2;
    FactorGraph g = random_graph(gs, rng());
    Normalized nz = normalize(g);
    double gmax = -1e300;
    for_each_assignment(g, [&](const std::vector<int>& x) {
      double v = 0;
      for (const auto& f : g.factors()) v += oracle_factor(g, f, x);
      gmax = std::max(gmax, v);
      Assignment xb = nz.record.encode(x);
      double vn = 0;
      for (const auto& f : nz.graph.factors()) vn += oracle_factor(nz.graph, f, xb);
      if (vn < -1e-15 || vn > 1 + 1e-12) ++range_bad;
      worst_affine = std::max(worst_affine, std::fabs(nz.record.recover(vn) - v));
    });
    MaxResult bm = brute_force_max(nz.graph);
    std::optional<Assignment> x = nz.record.decode(bm.argmax);
    if (!x) {
      ++decode_bad;
      continue;
    }
    double v = 0;
    for (const auto& f : g.factors()) v += oracle_factor(g, f, *x);
    if (std::fabs(v - gmax) > kAffineTol) ++argmax_bad;
  }
  r.pass = argmax_bad == 0 && decode_bad == 0 && range_bad == 0 && worst_affine <= kAffineTol;
  r.details.push_back(fmt("200 instances: argmax not preserved %d, argmax decodes to unused code %d", argmax_bad,
                          decode_bad));
  r.details.push_back(fmt("max affine recovery error %.3e; normalized values outside [0,1]: %d", worst_affine, range_bad));
  return r;
}

CriterionResult c10_hier_precision(const AcceptanceOptions& opt) {
  CriterionResult r;
  int runs = 0, prec_bad = 0, mass_bad = 0, skipped = 0, mass_bad_corrected = 0, runs_corrected = 0;
  double worst = 1e9;
  std::string worst_s;
  const int shapes[][5] = {{1, 1, 1, 1, 1}, {1, 1, 2, 1, 1}, {1, 1, 1, 2, 1}, {2, 1, 1, 1, 2},
                           {1, 1, 2, 2, 1}, {2, 0, 1, 2, 2}, {2, 1, 2, 1, 1}, {1, 2, 1, 1, 2}};
  for (int rule = 0; rule < 2; ++rule)
    for (const auto& sh : shapes)
      for (int n_p = 1; n_p <= 2; ++n_p) {
        PolicyFamilyInstance inst = policy_family_instance(sh[0], sh[1], sh[2], sh[3], sh[4], opt.seed + runs);
        OracleMax o;
        {
          BoundarySplit whole;  // only g_max is needed
          o = oracle_max(inst.graph, whole, n_p);
        }
        PrecisionParams pp;
        pp.n_p = n_p;
        pp.delta = 0.2;
        pp.t_rule = rule ? TRule::corrected : TRule::standard;
        for (const std::string& name : policy_names()) {
          HierExecution ex;
          try {
            ex = execute(inst.graph, inst.tree, policy_from_name(name, inst.tree.levels), pp, HierMode::statevector);
          } catch (const ResourceOverflow&) {
            ++skipped;
            continue;
          }
          const bool mass_ok = ex.run.success_mass + kMassSlack >= ex.report.success_lower_bound;
          if (rule) {
            ++runs_corrected;
            if (!mass_ok) ++mass_bad_corrected;
            continue;
          }
          ++runs;
          const double gap = o.g_max - ex.run.value;
          if (gap < -1e-12 || gap > ex.report.precision_bound + 1e-12) ++prec_bad;
          if (!mass_ok) ++mass_bad;
          const double ratio = ex.run.success_mass / ex.report.success_lower_bound;
          if (ratio < worst) {
            worst = ratio;
            worst_s = fmt("(%d,%d,%d,%d,%d) N_p=%d %s: mass %.4f bound %.4f", sh[0], sh[1], sh[2], sh[3], sh[4], n_p,
                          name.c_str(), ex.run.success_mass, ex.report.success_lower_bound);
          }
        }
      }
  r.pass = runs > 0 && prec_bad == 0 && mass_bad == 0;
  r.details.push_back(fmt("%d two-level runs (4 policies, N_p = 1..2, delta = 0.2, default t_max); %d skipped by t_max",
                          runs, skipped));
  r.details.push_back(fmt("precision bound violations %d; success mass below (1-delta)^(2 N_p N_exec): %d", prec_bad,
                          mass_bad));
  r.details.push_back("tightest: " + worst_s);
  r.details.push_back(fmt("info: corrected t rule success-mass shortfalls %d/%d", mass_bad_corrected, runs_corrected));
  return r;
}

}  // namespace

std::string criterion_name(int id) {
  switch (id) {
    case 1: return "counter exactness";
    case 2: return "phase-test contract";
    case 3: return "spectral identity";
    case 4: return "end-to-end correctness";
    case 5: return "topology bound and pinned diameter values";
    case 6: return "query-advantage band";
    case 7: return "hierarchical policy study";
    case 8: return "configuration recovery";
    case 9: return "normalization";
    case 10: return "hierarchical precision";
    default: return "unknown";
  }
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    switch (id) {
      case 1: r = c1_counters(opt); break;
      case 2: r = c2_phase_test(opt); break;
      case 3: r = c3_spectral(opt); break;
      case 4: r = c4_end_to_end(opt); break;
      case 5: r = c5_topology(opt); break;
      case 6: r = c6_query_band(opt); break;
      case 7: r = c7_policies(opt); break;
      case 8: r = c8_config(opt); break;
      case 9: r = c9_normalization(opt); break;
      case 10: r = c10_hier_precision(opt); break;
      default: throw ConfigError("no acceptance criterion " + std::to_string(id));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    r.pass = false;
    r.details.push_back(std::string("exception: ") + e.what());
  }
  r.id = id;
  r.name = criterion_name(id);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  std::vector<int> ids = opt.criteria;
  if (ids.empty())
    for (int i = 1; i <= 10; ++i) ids.push_back(i);
  std::vector<CriterionResult> out;
  for (int id : ids) {
    if (opt.log) opt.log(fmt("running criterion %d (%s)", id, criterion_name(id).c_str()));
    out.push_back(run_criterion(id, opt));
    if (opt.log && opt.verbose) opt.log(summary_line(out.back()));
  }
  return out;
}

std::string summary_line(const CriterionResult& r) {
  return fmt("%s  [%d] %s (%.1f s)", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
}

}  // namespace qfn::app
