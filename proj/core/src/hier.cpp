#include "qfn/hier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "qfn/network.hpp"

namespace qfn {

ExecutionPolicy policy_from_name(const std::string& name, int levels) {
  ExecutionPolicy p;
  p.name = name;
  if (name == "coherent") {
  } else if (name == "hybrid_root") {
    p.measured = {0};
  } else if (name == "hybrid_level1") {
    p.measured = {1};
  } else if (name == "hybrid_all") {
    for (int l = 0; l < levels; ++l) p.measured.insert(l);
  } else {
    throw ConfigError("unknown policy \"" + name + "\"");
  }
  for (int l : p.measured)
    if (l < 0 || l >= levels)
      throw ConfigError("policy " + name + " measures level " + std::to_string(l) + " but the tree has " +
                        std::to_string(levels) + " internal levels");
  return p;
}

std::vector<std::string> policy_names() { return {"coherent", "hybrid_root", "hybrid_level1", "hybrid_all"}; }

namespace {

std::string node_label(const TreeNode& n) {
  std::string s = "G^(" + std::to_string(n.level) + ")";
  if (!n.index.empty()) {
    s += "_";
    for (std::size_t i = 0; i < n.index.size(); ++i) s += (i ? "," : "") + std::to_string(n.index[i]);
  }
  return s;
}

std::vector<int> intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  for (int v : a)
    if (std::find(b.begin(), b.end(), v) != b.end()) out.push_back(v);
  return out;
}

// local boundary size of each child of an internal node
std::vector<int> child_boundary_sizes(const FactorGraph& g, const DecompTree& t, const TreeNode& n) {
  std::vector<int> out;
  for (int c : n.children) out.push_back(qubits_of(g, intersect(t.nodes[c].context, n.boundary)));
  return out;
}

template <class Fn>
void enumerate(const FactorGraph& g, const std::vector<int>& vars, Assignment& x, Fn fn) {
  for (int v : vars) x[v] = 0;
  while (true) {
    fn();
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

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

struct Outcome {
  std::vector<double> marginal;  // output key distribution
  std::uint64_t correct = 0;
  double clean = 1.0;  // own clean-correct mass (coherent blocks)
  double cond = 1.0;   // success of measured readouts below, per invocation
  std::uint64_t queries = 0;
  std::uint64_t epr = 0;
  double success() const { return clean * cond; }
};

class Evaluator {
 public:
  Evaluator(const FactorGraph& g, const DecompTree& t, const ExecutionPolicy& p, const PrecisionParams& params,
            const HierCostReport& rep)
      : g_(g), t_(t), pol_(p), params_(params), rep_(rep) {}

  const Outcome& eval(int id, const Assignment& x) {
    const TreeNode& n = t_.nodes[id];
    auto key = std::make_pair(id, mixed_index(g_, n.context, x));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    ++evaluations;
    Outcome o;
    if (n.is_leaf())
      o = leaf(n, rep_.nodes[id], x);
    else if (pol_.is_measured(n.level))
      o = measured(n, x);
    else
      o = coherent(n, rep_.nodes[id], x);
    return cache_.emplace(key, std::move(o)).first->second;
  }

  std::uint64_t evaluations = 0;

 private:
  Outcome leaf(const TreeNode& n, const NodeCost& nc, Assignment x) {
    std::vector<double> vals;
    enumerate(g_, n.vars, x, [&] {
      double f = g_.sum_factors(n.factors, x);
      if (f < -1e-12 || f > 1.0 + 1e-12) throw ConfigError("leaf objective outside [0,1] at " + node_label(n));
      vals.push_back(std::clamp(f, 0.0, 1.0));
    });
    CompactResult r = compact_max(uniform_weights(vals, params_.n_p), params_.n_p, nc.t);
    Outcome o;
    o.marginal = r.marginal;
    o.correct = r.correct_key;
    for (std::size_t q = o.correct + 1; q < o.marginal.size(); ++q) o.marginal[q] = 0.0;
    o.clean = r.clean_correct();
    o.queries = r.prep_calls;
    return o;
  }

  // value distribution of the node's sum for one boundary assignment
  struct Branch {
    std::vector<double> dist;  // over keys
    std::uint64_t correct = 0;
  };
  Branch branch(const TreeNode& n, const Assignment& x, std::vector<double>* child_success,
                std::vector<const Outcome*>* kids) {
    const int np = params_.n_p;
    const double res = g_.sum_factors(n.resident, x);
    std::vector<double> dist{1.0};
    std::uint64_t opt = 0;
    kids->clear();
    for (std::size_t k = 0; k < n.children.size(); ++k) {
      const TreeNode& c = t_.nodes[n.children[k]];
      const Outcome& o = eval(n.children[k], x);
      kids->push_back(&o);
      (*child_success)[k] = o.success();
      const bool classical = !c.is_leaf() && pol_.is_measured(c.level) && !pol_.is_measured(n.level);
      if (classical) {
        // measured child feeding a coherent parent: condition on its correct readout
        std::vector<double> d(o.correct + 1, 0.0);
        d[o.correct] = 1.0;
        dist = convolve(dist, d);
      } else {
        dist = convolve(dist, o.marginal);
      }
      opt += o.correct;
    }
    Branch b;
    b.dist.assign(pow2(np), 0.0);
    for (std::size_t T = 0; T < dist.size(); ++T)
      if (dist[T] != 0.0) b.dist[floor_key(z_dec(T, np) + res, np)] += dist[T];
    b.correct = floor_key(z_dec(opt, np) + res, np);
    for (std::size_t q = b.correct + 1; q < b.dist.size(); ++q) b.dist[q] = 0.0;
    return b;
  }

  Outcome coherent(const TreeNode& n, const NodeCost& nc, Assignment x) {
    const int np = params_.n_p;
    const std::size_t K = n.children.size();
    const double inv_x = 1.0 / static_cast<double>(assignments_of(g_, n.boundary));
    std::vector<double> w(pow2(np), 0.0);
    std::vector<double> worst(K, 1.0), succ(K, 1.0);
    std::vector<const Outcome*> kids;
    std::uint64_t best = 0, child_q = 0, child_e = 0;
    enumerate(g_, n.boundary, x, [&] {
      Branch b = branch(n, x, &succ, &kids);
      for (std::size_t q = 0; q < w.size(); ++q) w[q] += b.dist[q] * inv_x;
      best = std::max(best, b.correct);
      child_q = child_e = 0;
      for (std::size_t k = 0; k < K; ++k) {
        const TreeNode& c = t_.nodes[n.children[k]];
        const bool classical = !c.is_leaf() && pol_.is_measured(c.level);
        worst[k] = std::min(worst[k], classical ? succ[k] : kids[k]->cond);
        child_q += kids[k]->queries;
        child_e += kids[k]->epr;
      }
    });
    for (std::size_t q = best + 1; q < w.size(); ++q) w[q] = 0.0;
    double tot = 0;
    for (double v : w) tot += v;
    for (double& v : w) v /= tot;

    // own coherent communication, single hop
    const std::vector<int> vb = child_boundary_sizes(g_, t_, n);
    std::uint64_t own_epr = 0;
    CompactOptions opt;
    opt.hooks.on_prep = [&](bool) {
      for (int s : vb) own_epr += 2 * static_cast<std::uint64_t>(s) + static_cast<std::uint64_t>(np);
    };
    opt.hooks.on_reflection = [&] { own_epr += 2 * K; };
    opt.hooks.on_test_begin = [&](int) { own_epr += static_cast<std::uint64_t>(nc.t) * K; };
    opt.hooks.on_test_end = [&](int) { own_epr += static_cast<std::uint64_t>(nc.t) * K; };
    CompactResult r = compact_max(w, np, nc.t, opt);
    Outcome o;
    o.marginal = r.marginal;
    o.correct = r.correct_key;
    o.clean = r.clean_correct();
    const std::uint64_t calls = r.prep_calls;
    for (std::size_t k = 0; k < K; ++k) o.cond *= std::pow(worst[k], static_cast<double>(calls));
    o.queries = calls * child_q;
    o.epr = own_epr + calls * child_e;
    return o;
  }

  Outcome measured(const TreeNode& n, Assignment x) {
    const int np = params_.n_p;
    const std::size_t K = n.children.size();
    const std::size_t Q = pow2(np);
    std::vector<double> cdf(Q, 1.0);  // P(max <= key)
    std::vector<double> succ(K, 1.0);
    std::vector<const Outcome*> kids;
    Outcome o;
    o.clean = 1.0;
    std::uint64_t child_q = 0, child_e = 0;
    std::uint64_t count = 0;
    enumerate(g_, n.boundary, x, [&] {
      Branch b = branch(n, x, &succ, &kids);
      double acc = 0;
      for (std::size_t q = 0; q < Q; ++q) {
        acc += b.dist[q];
        cdf[q] *= std::min(acc, 1.0);
      }
      o.correct = std::max(o.correct, b.correct);
      child_q = child_e = 0;
      for (std::size_t k = 0; k < K; ++k) {
        o.cond *= succ[k];
        child_q += kids[k]->queries;
        child_e += kids[k]->epr;
      }
      ++count;
    });
    o.marginal.assign(Q, 0.0);
    for (std::size_t q = 0; q < Q; ++q) o.marginal[q] = std::max(0.0, cdf[q] - (q ? cdf[q - 1] : 0.0));
    o.queries = count * child_q;
    o.epr = count * child_e;
    return o;
  }

  const FactorGraph& g_;
  const DecompTree& t_;
  const ExecutionPolicy& pol_;
  const PrecisionParams& params_;
  const HierCostReport& rep_;
  std::map<std::pair<int, std::uint64_t>, Outcome> cache_;
};

}  // namespace

HierCostReport cost_model(const FactorGraph& g, const DecompTree& tree, const ExecutionPolicy& policy,
                          const PrecisionParams& params) {
  params.validate();
  if (tree.nodes.empty()) throw ConfigError("empty decomposition tree");
  for (int l : policy.measured)
    if (l < 0 || l >= std::max(tree.levels, 0) || tree.levels == 0)
      throw ConfigError("policy measures level " + std::to_string(l) + " outside the tree");
  HierCostReport rep;
  rep.nodes.resize(tree.nodes.size());
  const int np = params.n_p;
  // nodes are stored parents first
  rep.nodes[0].n_inv = 1;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& n = tree.nodes[i];
    NodeCost& c = rep.nodes[i];
    if (n.parent >= 0) c.n_inv = rep.nodes[n.parent].n_inv * rep.nodes[n.parent].c_eff;
    bool cl = false;
    if (n.is_leaf()) {
      c.p_min = default_p_min(qubits_of(g, n.vars));
      c.t = t_checked(c.p_min, params, node_label(n), &cl);
      c.c_leaf = static_cast<std::uint64_t>(np) * (pow2(c.t + 2) - 2);
      rep.c_hier += c.n_inv * c.c_leaf;
    } else {
      const std::uint64_t X = assignments_of(g, n.boundary);
      const int K = static_cast<int>(n.children.size());
      c.p_min = std::pow(1.0 - params.delta, 2.0 * np * K) / static_cast<double>(X);
      c.measured = policy.is_measured(n.level);
      if (c.measured) {
        c.c_eff = X;
      } else {
        c.t = t_checked(c.p_min, params, node_label(n), &cl);
        c.c_eff = static_cast<std::uint64_t>(np) * (pow2(c.t + 2) - 2);
        c.n_epr = closed_form_epr_terms(np, c.t, child_boundary_sizes(g, tree, n)).total();
        rep.n_epr_hier += c.n_inv * c.n_epr;
      }
    }
    c.clamped = cl;
    rep.clamped = rep.clamped || cl;
    const bool out = !policy.is_measured(n.level) && (n.level == 0 || policy.is_measured(n.level - 1));
    if (out) rep.n_exec += c.n_inv;
  }
  rep.success_lower_bound = std::pow(1.0 - params.delta, 2.0 * np * static_cast<double>(rep.n_exec));
  rep.precision_bound = static_cast<double>(tree.nodes.size()) * std::ldexp(1.0, -np);
  return rep;
}

HierExecution execute(const FactorGraph& g, const DecompTree& tree, const ExecutionPolicy& policy,
                      const PrecisionParams& params, HierMode mode) {
  HierExecution ex;
  ex.report = cost_model(g, tree, policy, params);
  if (mode == HierMode::cost_model) return ex;
  for (const TreeNode& n : tree.nodes)
    if (!n.is_leaf() && n.boundary.size() > 30) throw ResourceOverflow("boundary too wide to enumerate at " + node_label(n));
  Evaluator ev(g, tree, policy, params, ex.report);
  Assignment x(g.num_vars(), 0);
  const Outcome& root = ev.eval(0, x);
  ex.simulated = true;
  ex.run.marginal = root.marginal;
  ex.run.correct_key = root.correct;
  ex.run.z_key = root.correct;
  ex.run.value = z_dec(root.correct, params.n_p);
  ex.run.success_mass = root.success();
  ex.run.queries = root.queries;
  ex.run.epr = root.epr;
  ex.run.evaluations = ev.evaluations;
  return ex;
}

PrecisionParams policy_sweep_params() {
  PrecisionParams p;
  p.n_p = 1;
  p.delta = 0.2;
  p.t_max = 2;
  p.t_policy = TPolicy::clamp;
  return p;
}

std::vector<HierSweepRow> policy_sweep_point(const PolicyFamilyPoint& pt, const PrecisionParams& params,
                                           bool statevector, std::uint64_t seed) {
  std::vector<HierSweepRow> rows;
  PolicyFamilyInstance inst = policy_family_instance(pt.b0, pt.b1, pt.s0, pt.s1, pt.r, seed);
  for (const std::string& name : policy_names()) {
    HierSweepRow row;
    row.point = pt;
    row.num_vars = pt.num_vars();
    row.policy = name;
    row.exec = execute(inst.graph, inst.tree, policy_from_name(name, inst.tree.levels), params,
                       statevector ? HierMode::statevector : HierMode::cost_model);
    rows.push_back(std::move(row));
  }
  const HierCostReport& base = rows[0].exec.report;
  for (auto& r : rows) {
    r.query_multiplier = static_cast<double>(r.exec.report.c_hier) / static_cast<double>(base.c_hier);
    r.epr_multiplier =
        base.n_epr_hier ? static_cast<double>(r.exec.report.n_epr_hier) / static_cast<double>(base.n_epr_hier) : 0.0;
  }
  return rows;
}

std::vector<HierSweepRow> policy_sweep(const PrecisionParams& params, bool statevector, std::uint64_t seed) {
  std::vector<HierSweepRow> rows;
  for (const PolicyFamilyPoint& pt : policy_family_path()) {
    auto part = policy_sweep_point(pt, params, statevector, seed);
    for (auto& r : part) rows.push_back(std::move(r));
  }
  return rows;
}

std::string hier_csv_header() {
  return "b0,b1,s0,s1,r,num_vars,policy,n_p,delta,t_max,queries_model,queries_sim,queries_diff,epr_model,epr_sim,"
         "epr_diff,query_multiplier,epr_multiplier,n_exec,success_lower_bound,success_mass,precision_bound,"
         "correct_key,clamped";
}

std::string hier_csv_row(const HierSweepRow& r, const PrecisionParams& params) {
  const HierCostReport& c = r.exec.report;
  const bool sim = r.exec.simulated;
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  auto diff = [](std::uint64_t a, std::uint64_t b) {
    return std::to_string(static_cast<long long>(a) - static_cast<long long>(b));
  };
  std::string s;
  s += std::to_string(r.point.b0) + "," + std::to_string(r.point.b1) + "," + std::to_string(r.point.s0) + "," +
       std::to_string(r.point.s1) + "," + std::to_string(r.point.r) + "," + std::to_string(r.num_vars) + ",";
  s += r.policy + "," + std::to_string(params.n_p) + "," + num(params.delta) + "," + std::to_string(params.t_max) + ",";
  s += std::to_string(c.c_hier) + "," + (sim ? std::to_string(r.exec.run.queries) : "") + "," +
       (sim ? diff(r.exec.run.queries, c.c_hier) : "") + ",";
  s += std::to_string(c.n_epr_hier) + "," + (sim ? std::to_string(r.exec.run.epr) : "") + "," +
       (sim ? diff(r.exec.run.epr, c.n_epr_hier) : "") + ",";
  s += num(r.query_multiplier) + "," + num(r.epr_multiplier) + "," + std::to_string(c.n_exec) + "," +
       num(c.success_lower_bound) + "," + (sim ? num(r.exec.run.success_mass) : "") + "," + num(c.precision_bound) +
       "," + (sim ? std::to_string(r.exec.run.correct_key) : "") + "," + (c.clamped ? "1" : "0");
  return s;
}

}  // namespace qfn
