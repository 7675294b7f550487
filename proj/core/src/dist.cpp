#include "qfn/dist.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>

namespace qfn {

SimMode sim_mode_from_string(const std::string& s) {
  if (s == "compact") return SimMode::compact;
  if (s == "faithful") return SimMode::faithful;
  throw ConfigError("unknown simulator mode \"" + s + "\"");
}

Readout readout_from_string(const std::string& s) {
  if (s == "sample") return Readout::sample;
  if (s == "argmax" || s == "most_probable") return Readout::most_probable;
  if (s == "correct") return Readout::correct;
  throw ConfigError("unknown readout \"" + s + "\"");
}

std::string to_string(SimMode m) { return m == SimMode::compact ? "compact" : "faithful"; }

std::string to_string(Readout r) {
  switch (r) {
    case Readout::sample: return "sample";
    case Readout::most_probable: return "argmax";
    case Readout::correct: return "correct";
  }
  return "?";
}

DistRunConfig make_config(const FactorGraph& g, const std::vector<int>& boundary, const PrecisionParams& params,
                          TopologyKind topo, int stretch) {
  DistRunConfig cfg;
  cfg.graph = &g;
  cfg.split = split(g, boundary);
  if (cfg.split.num_parts() == 0) throw ConfigError("boundary leaves no partition");
  cfg.network = NetworkModel::make(topo, cfg.split.num_parts(), stretch);
  cfg.params = params;
  return cfg;
}

DistRunConfig star_config(const StarInstance& inst, const PrecisionParams& params, TopologyKind topo, int stretch) {
  return make_config(inst.graph, inst.boundary, params, topo, stretch);
}

std::uint64_t closed_form_u_ini_calls(int n_p, int t_c) {
  return static_cast<std::uint64_t>(n_p) * (pow2(t_c + 2) - 2);
}

std::uint64_t closed_form_c_distr(int n_p, int t_c, const std::vector<int>& t_n) {
  std::uint64_t s = 0;
  for (int t : t_n) s += pow2(t + 2) - 2;
  const std::uint64_t np = static_cast<std::uint64_t>(n_p);
  return np * np * (pow2(t_c + 2) - 2) * s;
}

std::vector<int> local_boundary_sizes(const FactorGraph& g, const BoundarySplit& s) {
  std::vector<int> out;
  for (const auto& p : s.parts) out.push_back(qubits_of(g, p.local_boundary));
  return out;
}

PrecisionPlan plan_precision(const FactorGraph& g, const BoundarySplit& s, const PrecisionParams& params) {
  params.validate();
  PrecisionPlan pl;
  pl.p_min_c = p_min_coordinator(g, s, params);
  bool cl = false;
  pl.t_c = t_checked(pl.p_min_c, params, "coordinator", &cl);
  pl.clamped = cl;
  for (int n = 0; n < s.num_parts(); ++n) {
    double p = default_p_min(qubits_of(g, s.parts[n].internal));
    pl.p_min_n.push_back(p);
    pl.t_n.push_back(t_checked(p, params, "worker " + std::to_string(n), &cl));
    pl.clamped = pl.clamped || cl;
  }
  return pl;
}

namespace {

void check_config(const DistRunConfig& cfg) {
  if (!cfg.graph) throw ConfigError("run config has no graph");
  if (cfg.split.num_parts() < 1) throw ConfigError("run config has no partitions");
  if (cfg.network.num_workers() != cfg.split.num_parts())
    throw ConfigError("network has " + std::to_string(cfg.network.num_workers()) + " workers but the split has " +
                      std::to_string(cfg.split.num_parts()) + " partitions");
  for (const auto& p : cfg.split.parts)
    if (!p.context.empty()) throw ConfigError("single-level run over a split with outside context");
}

// odometer over vars (first most significant); calls fn(index) with x updated
template <class Fn>
void enumerate(const FactorGraph& g, const std::vector<int>& vars, Assignment& x, Fn fn) {
  for (int v : vars) x[v] = 0;
  std::uint64_t idx = 0;
  while (true) {
    fn(idx++);
    int i = static_cast<int>(vars.size()) - 1;
    while (i >= 0) {
      int v = vars[i];
      if (++x[v] < g.cardinality(v)) break;
      x[v] = 0;
      --i;
    }
    if (i < 0) break;
  }
}

std::uint64_t mixed_index(const FactorGraph& g, const std::vector<int>& vars, const Assignment& x) {
  std::uint64_t idx = 0;
  for (int v : vars) idx = idx * static_cast<std::uint64_t>(g.cardinality(v)) + static_cast<std::uint64_t>(x[v]);
  return idx;
}

double checked_local(double f, const std::string& where) {
  if (f < -1e-12 || f > 1.0 + 1e-12)
    throw ConfigError("local objective " + std::to_string(f) + " outside [0,1] at " + where +
                      "; normalize the instance first");
  return std::clamp(f, 0.0, 1.0);
}

std::vector<double> worker_values(const FactorGraph& g, const Partition& p, Assignment x, int n) {
  std::vector<double> vals;
  vals.reserve(assignments_of(g, p.internal));
  enumerate(g, p.internal, x, [&](std::uint64_t) {
    vals.push_back(checked_local(g.sum_factors(p.factors, x), "worker " + std::to_string(n)));
  });
  return vals;
}

struct WorkerRun {
  std::vector<double> marginal;
  std::uint64_t correct_key = 0;
  std::uint64_t queries = 0;
};

// Per-worker U_max outcomes keyed by the local boundary assignment.
class WorkerCache {
 public:
  WorkerCache(const DistRunConfig& cfg, const PrecisionPlan& plan) : cfg_(cfg), plan_(plan) {}

  const WorkerRun& get(int n, const Assignment& x) {
    const Partition& p = cfg_.split.parts[n];
    auto key = std::make_pair(n, mixed_index(*cfg_.graph, p.local_boundary, x));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    // aux sectors are kept: the full output marginal feeds the coordinator
    CompactResult r = compact_max(uniform_weights(worker_values(*cfg_.graph, p, x, n), cfg_.params.n_p),
                                  cfg_.params.n_p, plan_.t_n[n]);
    WorkerRun w;
    w.marginal = r.marginal;
    w.correct_key = r.correct_key;
    // outputs never exceed the correct key; drop rounding residue above it
    for (std::size_t q = w.correct_key + 1; q < w.marginal.size(); ++q) w.marginal[q] = 0.0;
    w.queries = r.prep_calls;
    return cache_.emplace(key, std::move(w)).first->second;
  }

 private:
  const DistRunConfig& cfg_;
  const PrecisionPlan& plan_;
  std::map<std::pair<int, std::uint64_t>, WorkerRun> cache_;
};

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

IniDistribution ini_distribution(const DistRunConfig& cfg, WorkerCache& cache, std::vector<std::uint64_t>* queries) {
  const FactorGraph& g = *cfg.graph;
  const int np = cfg.params.n_p;
  const int ng = cfg.split.num_parts();
  const double inv_x = 1.0 / static_cast<double>(assignments_of(g, cfg.split.boundary));
  IniDistribution out;
  out.weights.assign(pow2(np), 0.0);
  if (queries) queries->assign(ng, 0);

  struct Branch {
    std::uint64_t key;
    double mass;
  };
  std::vector<Branch> branches;  // per boundary assignment: floored sum of local optima and its mass
  Assignment x(g.num_vars(), 0);
  enumerate(g, cfg.split.boundary, x, [&](std::uint64_t) {
    const double res = g.sum_factors(cfg.split.resident, x);
    std::vector<double> dist{1.0};
    std::uint64_t opt_sum = 0;
    double opt_mass = 1.0;
    for (int n = 0; n < ng; ++n) {
      const WorkerRun& w = cache.get(n, x);
      if (queries) {
        if ((*queries)[n] != 0 && (*queries)[n] != w.queries)
          throw ConfigError("worker query count depends on the boundary assignment");
        (*queries)[n] = w.queries;
      }
      dist = convolve(dist, w.marginal);
      opt_sum += w.correct_key;
      opt_mass *= w.marginal[w.correct_key];
    }
    for (std::size_t T = 0; T < dist.size(); ++T) {
      if (dist[T] == 0.0) continue;
      out.weights[floor_key(z_dec(T, np) + res, np)] += dist[T] * inv_x;
    }
    branches.push_back({floor_key(z_dec(opt_sum, np) + res, np), opt_mass * inv_x});
  });
  std::uint64_t best = 0;
  for (const auto& b : branches) best = std::max(best, b.key);
  for (std::size_t key = best + 1; key < out.weights.size(); ++key) out.weights[key] = 0.0;
  // renormalize away rounding drift
  double tot = 0;
  for (double w : out.weights) tot += w;
  for (double& w : out.weights) w /= tot;
  for (const auto& b : branches)
    if (b.key == best) out.optimal_branch_overlap = std::max(out.optimal_branch_overlap, b.mass);
  return out;
}

std::uint64_t read_out(const std::vector<double>& marginal, std::uint64_t correct, Readout mode, std::uint64_t seed) {
  switch (mode) {
    case Readout::correct: return correct;
    case Readout::most_probable: {
      std::uint64_t best = 0;
      for (std::size_t q = 1; q < marginal.size(); ++q)
        if (marginal[q] > marginal[best] + 1e-15) best = q;
      return best;
    }
    case Readout::sample: {
      std::mt19937_64 rng(seed);
      std::discrete_distribution<std::size_t> d(marginal.begin(), marginal.end());
      return d(rng);
    }
  }
  return 0;
}

// EPR and event bookkeeping shared by both simulator modes
struct Charger {
  const DistRunConfig& cfg;
  ResourceLedger& ledger;
  std::vector<int> vb;
  int t_c;

  void u_ini() {
    ++ledger.u_ini_calls;
    const int np = cfg.params.n_p;
    for (int n = 0; n < static_cast<int>(vb.size()); ++n) {
      if (vb[n] > 0)
        charge_teleport(ledger, cfg.network, NetworkModel::coordinator(), NetworkModel::worker(n), vb[n],
                        EprClass::boundary_distribution);
      charge_teleport(ledger, cfg.network, NetworkModel::worker(n), NetworkModel::coordinator(), vb[n] + np,
                      EprClass::result_return);
    }
  }
  void reflection() {
    for (int n = 0; n < static_cast<int>(vb.size()); ++n) {
      charge_teleport(ledger, cfg.network, NetworkModel::worker(n), NetworkModel::coordinator(), 1,
                      EprClass::reflection_ancilla);
      charge_teleport(ledger, cfg.network, NetworkModel::coordinator(), NetworkModel::worker(n), 1,
                      EprClass::reflection_ancilla);
    }
  }
  void test_begin() {
    ledger.sync_events.push_back("CONTROL_DISTRIBUTED");
    if (t_c == 0) return;
    for (int n = 0; n < static_cast<int>(vb.size()); ++n)
      charge_teleport(ledger, cfg.network, NetworkModel::coordinator(), NetworkModel::worker(n), t_c,
                      EprClass::control_distribution);
  }
  void test_end() {
    if (t_c > 0)
      for (int n = 0; n < static_cast<int>(vb.size()); ++n)
        charge_teleport(ledger, cfg.network, NetworkModel::worker(n), NetworkModel::coordinator(), t_c,
                        EprClass::control_distribution);
    ledger.sync_events.push_back("UNCOMPUTE_CONTROL");
    ledger.sync_events.push_back("ITERATION_COMPLETE");
  }
};

void fill_common(DistResult& r, const DistRunConfig& cfg, const PrecisionPlan& plan) {
  const FactorGraph& g = *cfg.graph;
  r.t_c = plan.t_c;
  r.t_n = plan.t_n;
  r.t_clamped = plan.clamped;
  r.p_min_c = plan.p_min_c;
  r.p_min_n = plan.p_min_n;
  const auto vb = local_boundary_sizes(g, cfg.split);
  r.closed_u_ini_calls = closed_form_u_ini_calls(cfg.params.n_p, plan.t_c);
  r.closed_leaf_queries = closed_form_c_distr(cfg.params.n_p, plan.t_c, plan.t_n);
  r.closed_epr = closed_form_epr_terms(cfg.params.n_p, plan.t_c, vb, &cfg.network).total();
  r.closed_epr_single_hop = closed_form_epr_terms(cfg.params.n_p, plan.t_c, vb).total();
  QubitReport qr = qubit_requirements(g, cfg.split, cfg.params);
  r.ledger.note_qubits("coordinator", qr.coordinator);
  for (int n = 0; n < static_cast<int>(qr.workers.size()); ++n)
    r.ledger.note_qubits("worker" + std::to_string(n), qr.workers[n]);
}

void finish(DistResult& r, const DistRunConfig& cfg) {
  const int np = cfg.params.n_p;
  r.correct_mass = r.marginal.at(r.correct_key);
  r.z_key = read_out(r.marginal, r.correct_key, cfg.readout, cfg.seed);
  r.z_bits = key_string(r.z_key, np);
  r.value = z_dec(r.z_key, np);
  r.success = r.z_key == r.correct_key;
}

DistResult a_dist_compact(const DistRunConfig& cfg, const PrecisionPlan& plan) {
  DistResult r;
  fill_common(r, cfg, plan);
  WorkerCache cache(cfg, plan);
  std::vector<std::uint64_t> q_n;
  IniDistribution ini = ini_distribution(cfg, cache, &q_n);
  r.weights = ini.weights;
  r.optimal_branch_overlap = ini.optimal_branch_overlap;

  Charger ch{cfg, r.ledger, local_boundary_sizes(*cfg.graph, cfg.split), plan.t_c};
  CompactOptions opt;
  opt.keep_aux = cfg.keep_aux;
  opt.hooks.on_prep = [&](bool) {
    ch.u_ini();
    for (int n = 0; n < static_cast<int>(q_n.size()); ++n) r.ledger.add_worker_queries(n, q_n[n]);
  };
  opt.hooks.on_reflection = [&] { ch.reflection(); };
  opt.hooks.on_test_begin = [&](int) { ch.test_begin(); };
  opt.hooks.on_test_end = [&](int) { ch.test_end(); };
  CompactResult cr = compact_max(ini.weights, cfg.params.n_p, plan.t_c, opt);
  r.correct_key = cr.correct_key;
  r.marginal = cr.marginal;
  r.clean_correct_mass = cr.clean_correct();
  r.p_z = cr.p_z;
  r.max_norm_error = cr.max_norm_error;
  finish(r, cfg);
  return r;
}

// ---------------------------------------------------------------- faithful mode

std::vector<int> qubit_vars(const FactorGraph& g, const std::vector<int>& vars) {
  std::vector<int> out;
  for (int v : vars) {
    if (g.cardinality(v) > 2) throw ConfigError("faithful mode needs binary variables (" + g.name(v) + ")");
    if (g.cardinality(v) == 2) out.push_back(v);
  }
  return out;
}

// register value -> variable values (bit 1 of the register is the first variable)
void set_bits(Assignment& x, const std::vector<int>& vars, std::uint64_t value) {
  const int w = static_cast<int>(vars.size());
  for (int k = 0; k < w; ++k) x[vars[k]] = static_cast<int>((value >> (w - 1 - k)) & 1);
}

std::uint64_t fanout(std::uint64_t i, const std::vector<std::pair<int, int>>& pairs) {
  std::uint64_t m = 0;
  for (auto [src, dst] : pairs) m |= ((i >> src) & 1) << dst;
  return i ^ m;
}

DistResult a_dist_faithful(const DistRunConfig& cfg, const PrecisionPlan& plan) {
  const FactorGraph& g = *cfg.graph;
  const int np = cfg.params.n_p;
  const int ng = cfg.split.num_parts();
  const int tc = plan.t_c;
  DistResult r;
  fill_common(r, cfg, plan);
  {
    WorkerCache cache(cfg, plan);
    r.optimal_branch_overlap = ini_distribution(cfg, cache, nullptr).optimal_branch_overlap;
  }

  const std::vector<int> bq = qubit_vars(g, cfg.split.boundary);
  RegisterLayout lay;
  lay.add("q_B", static_cast<int>(bq.size()));
  std::vector<UMaxSpec> specs(ng);
  std::vector<std::vector<int>> lbq(ng), inq(ng);
  Assignment x0(g.num_vars(), 0);
  for (int n = 0; n < ng; ++n) {
    const Partition& p = cfg.split.parts[n];
    const std::string sfx = "_" + std::to_string(n + 1);
    lbq[n] = qubit_vars(g, p.local_boundary);
    inq[n] = qubit_vars(g, p.internal);
    lay.add("q_Baux" + sfx, static_cast<int>(lbq[n].size()), n);
    lay.add("q_stc" + sfx, tc, n);
    UMaxSpec& sp = specs[n];
    sp.n_bits = static_cast<int>(inq[n].size());
    sp.n_p = np;
    sp.t = plan.t_n[n];
    sp.st = "q_st" + sfx;
    sp.sr = "q_sr" + sfx;
    sp.p = "q_p" + sfx;
    sp.aux = "q_aux" + sfx;
    sp.ctx = lbq[n].empty() ? "" : "q_Baux" + sfx;
    const std::uint64_t nc = pow2(static_cast<int>(lbq[n].size())), ny = pow2(sp.n_bits);
    auto table = std::make_shared<std::vector<double>>(nc * ny);
    for (std::uint64_t c = 0; c < nc; ++c)
      for (std::uint64_t y = 0; y < ny; ++y) {
        Assignment x = x0;
        set_bits(x, lbq[n], c);
        set_bits(x, inq[n], y);
        (*table)[c * ny + y] = checked_local(g.sum_factors(p.factors, x), "worker " + std::to_string(n));
      }
    sp.f = [table, ny](std::uint64_t c, std::uint64_t y) { return (*table)[c * ny + y]; };
    add_umax_registers(lay, sp, n);
  }
  lay.add("q_est", tc);
  lay.add("q_pc", np);
  lay.add("q_auxc", np);
  std::vector<double> res(pow2(static_cast<int>(bq.size())));
  for (std::uint64_t b = 0; b < res.size(); ++b) {
    Assignment x = x0;
    set_bits(x, bq, b);
    res[b] = g.sum_factors(cfg.split.resident, x);
  }

  QuantumState st(lay, cfg.max_qubits);
  r.ledger.note_qubits("simulated", lay.total_qubits());

  // boundary fan-out and control-copy pairs
  std::vector<std::pair<int, int>> bpairs, cpairs;
  for (int n = 0; n < ng; ++n) {
    const std::string sfx = "_" + std::to_string(n + 1);
    for (std::size_t k = 0; k < lbq[n].size(); ++k) {
      auto pos = std::find(bq.begin(), bq.end(), lbq[n][k]) - bq.begin();
      bpairs.push_back({lay.qubit("q_B", static_cast<int>(pos) + 1), lay.qubit("q_Baux" + sfx, static_cast<int>(k) + 1)});
    }
    for (int j = 1; j <= tc; ++j) cpairs.push_back({lay.qubit("q_est", j), lay.qubit("q_stc" + sfx, j)});
  }
  // worker n sees est controls through its copies
  auto remap = [&](int n, Controls c) {
    const std::string sfx = "_" + std::to_string(n + 1);
    for (int j = 1; j <= tc; ++j) {
      const std::uint64_t e = std::uint64_t{1} << lay.qubit("q_est", j);
      if (!(c.mask & e)) continue;
      const std::uint64_t cp = std::uint64_t{1} << lay.qubit("q_stc" + sfx, j);
      const bool v = c.value & e;
      c.mask = (c.mask & ~e) | cp;
      c.value = (c.value & ~e) | (v ? cp : 0);
    }
    return c;
  };

  bool counting = true;
  Charger ch{cfg, r.ledger, local_boundary_sizes(g, cfg.split), tc};
  std::vector<std::uint64_t> scratch(ng, 0);
  std::vector<Circuit> umax;
  for (int n = 0; n < ng; ++n) umax.push_back(u_max_circuit(specs[n], &scratch[n]));

  Circuit uini;
  uini.add([&](QuantumState&, const Controls&, bool) {
    if (counting) ch.u_ini();
  });
  uini.add([](QuantumState& s, const Controls& c, bool) { s.apply_hadamard_all("q_B", c); });
  uini.add([&](QuantumState& s, const Controls& c, bool) {
    s.apply_involution([&](std::uint64_t i) { return fanout(i, bpairs); }, c);
  });
  uini.add([&](QuantumState& s, const Controls& c, bool adj) {
    for (int n = 0; n < ng; ++n) {
      const std::uint64_t before = scratch[n];
      umax[n].apply(s, remap(n, c), adj);
      if (counting) r.ledger.add_worker_queries(n, scratch[n] - before);
    }
  });
  uini.add([&](QuantumState& s, const Controls& c, bool) {
    s.apply_involution([&](std::uint64_t i) { return fanout(i, bpairs); }, c);
  });

  std::vector<std::string> targets{"q_B"};
  for (int n = 0; n < ng; ++n) {
    const std::string sfx = "_" + std::to_string(n + 1);
    for (const char* base : {"q_Baux", "q_st", "q_sr", "q_p", "q_aux"}) targets.push_back(base + sfx);
  }
  std::vector<const Register*> preg;
  for (int n = 0; n < ng; ++n) preg.push_back(&lay.get(specs[n].p));
  const Register& breg = lay.get("q_B");
  auto value_key = [&](std::uint64_t i) {
    std::uint64_t T = 0;
    for (const Register* p : preg) T += (i >> p->offset) & (pow2(p->width) - 1);
    const std::uint64_t b = (i >> breg.offset) & (pow2(breg.width) - 1);
    return floor_key(z_dec(T, np) + res[b], np);
  };

  // class weights of psi_ini
  {
    QuantumState ini(lay, cfg.max_qubits);
    ini.amplitudes()[0] = 1.0;
    counting = false;
    uini.apply(ini);
    counting = true;
    r.weights.assign(pow2(np), 0.0);
    const auto& a = ini.amplitudes();
    for (std::uint64_t i = 0; i < a.size(); ++i)
      if (std::norm(a[i]) > 0) r.weights[value_key(i)] += std::norm(a[i]);
  }
  for (std::uint64_t key = 0; key < r.weights.size(); ++key)
    if (r.weights[key] > 1e-14) r.correct_key = key;

  st.amplitudes()[0] = 1.0;
  for (int k = 1; k <= np; ++k) {
    {
      std::uint64_t th = threshold_key(r.correct_key >> (np - k + 1), k, np);
      double pz = 0;
      for (std::size_t key = th; key < r.weights.size(); ++key) pz += r.weights[key];
      r.p_z.push_back(pz);
    }
    ch.test_begin();
    // one phase test per prefix block, selected by controls on q_pc(1..k-1)
    for (std::uint64_t P = 0; P < pow2(k - 1); ++P) {
      counting = (P == 0);
      Controls blk;
      for (int i = 1; i < k; ++i) blk = blk.with(lay.qubit("q_pc", i), (P >> (k - 1 - i)) & 1);
      const std::uint64_t th = threshold_key(P, k, np);
      Circuit uo;
      auto copies = [&](QuantumState& s, const Controls& c, bool) {
        s.apply_involution([&](std::uint64_t i) { return fanout(i, cpairs); }, c);
      };
      uo.add(copies);
      uo.add([&, th](QuantumState& s, const Controls& c, bool) {
        s.apply_sign([&](std::uint64_t i) { return value_key(i) >= th; }, c);
      });
      uo.add([&](QuantumState& s, const Controls& c, bool adj) { uini.apply(s, c, !adj); });
      uo.add([&](QuantumState& s, const Controls& c, bool) {
        if (counting) ch.reflection();
        s.reflect_zero(targets, c);
      });
      uo.add([&](QuantumState& s, const Controls& c, bool adj) { uini.apply(s, c, adj); });
      uo.add(copies);
      PhaseTestRegs regs;
      regs.est = "q_est";
      regs.target = targets;
      regs.out_qubit = lay.qubit("q_pc", k);
      regs.aux_qubit = lay.qubit("q_auxc", k);
      phase_test_circuit(uini, uo, regs).apply(st, blk, false);
    }
    counting = true;
    ch.test_end();
    r.max_norm_error = std::max(r.max_norm_error, std::fabs(st.norm() - 1.0));
  }
  r.marginal = st.probabilities("q_pc");
  const Register& pc = lay.get("q_pc");
  r.clean_correct_mass = std::norm(st.amplitude(r.correct_key << pc.offset));
  finish(r, cfg);
  return r;
}

}  // namespace

std::uint64_t reference_z_key(const FactorGraph& g, const BoundarySplit& s, int n_p) {
  std::uint64_t best = 0;
  Assignment x(g.num_vars(), 0);
  enumerate(g, s.boundary, x, [&](std::uint64_t) {
    double sum = g.sum_factors(s.resident, x);
    for (const auto& p : s.parts) {
      MaxResult m = conditioned_max(g, p.factors, p.internal, x);
      sum += z_dec(floor_key(m.value, n_p), n_p);
    }
    best = std::max(best, floor_key(sum, n_p));
  });
  return best;
}

IniDistribution u_ini_distribution(const DistRunConfig& cfg) {
  check_config(cfg);
  PrecisionPlan plan = plan_precision(*cfg.graph, cfg.split, cfg.params);
  WorkerCache cache(cfg, plan);
  return ini_distribution(cfg, cache, nullptr);
}

DistResult a_dist(const DistRunConfig& cfg) {
  check_config(cfg);
  PrecisionPlan plan = plan_precision(*cfg.graph, cfg.split, cfg.params);
  return cfg.mode == SimMode::compact ? a_dist_compact(cfg, plan) : a_dist_faithful(cfg, plan);
}

ConfigResult a_dist_config(const DistRunConfig& cfg) {
  check_config(cfg);
  const FactorGraph& g0 = *cfg.graph;
  const int np = cfg.params.n_p;
  const double delta_np = static_cast<double>(cfg.split.num_parts() + 1) * std::ldexp(1.0, -np);
  ConfigResult out;
  out.x.assign(g0.num_vars(), 0);
  FactorGraph cur = g0;
  auto run = [&](const FactorGraph& g) {
    DistRunConfig c = cfg;
    c.graph = &g;
    c.seed = cfg.seed + out.runs.size();
    out.runs.push_back(a_dist(c));
    const DistResult& r = out.runs.back();
    out.joint_clean_mass *= r.clean_correct_mass;
    out.joint_success = out.joint_success && r.success;
    out.leaf_queries += r.ledger.leaf_queries;
    return r.value;
  };
  double prev = run(cur);
  for (int i = 0; i < g0.num_vars(); ++i) {
    if (g0.cardinality(i) != 2) throw ConfigError("configuration recovery needs binary variables");
    FactorGraph g_0 = cur.fix_variable(i, 0);
    FactorGraph g_1 = cur.fix_variable(i, 1);
    const double z0 = run(g_0);
    const double z1 = run(g_1);
    if (std::fabs(z0 - prev) <= 2.0 * delta_np) {
      out.x[i] = 0;
      prev = z0;
      cur = std::move(g_0);
    } else {
      out.x[i] = 1;
      prev = z1;
      cur = std::move(g_1);
    }
  }
  return out;
}

std::uint64_t benchmark_repetitions(std::uint64_t boundary_assignments, int n_g, int n_p, double delta) {
  const double target = std::pow(1.0 - delta, 2.0 * n_p);
  const double f = 1.0 - target;
  const double m = static_cast<double>(boundary_assignments) * n_g;
  for (std::uint64_t R = 1; R < 4096; ++R)
    if (std::pow(1.0 - std::pow(f, static_cast<double>(R)), m) >= target) return R;
  throw ResourceOverflow("benchmark repetition count does not converge");
}

BenchmarkResult classical_comm_benchmark(const DistRunConfig& cfg) {
  check_config(cfg);
  const FactorGraph& g = *cfg.graph;
  PrecisionPlan plan = plan_precision(g, cfg.split, cfg.params);
  WorkerCache cache(cfg, plan);
  BenchmarkResult b;
  b.boundary_assignments = assignments_of(g, cfg.split.boundary);
  b.repetitions = benchmark_repetitions(b.boundary_assignments, cfg.split.num_parts(), cfg.params.n_p,
                                        cfg.params.delta);
  Assignment x(g.num_vars(), 0);
  enumerate(g, cfg.split.boundary, x, [&](std::uint64_t) {
    for (int n = 0; n < cfg.split.num_parts(); ++n) b.ledger.add_worker_queries(n, b.repetitions * cache.get(n, x).queries);
  });
  return b;
}

}  // namespace qfn
