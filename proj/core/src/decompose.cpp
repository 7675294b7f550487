#include "qfn/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"

namespace qfn {

namespace {

int ceil_log2(int n) {
  int b = 0;
  while ((1 << b) < n) ++b;
  return b;
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool contains(const std::vector<int>& sorted, int x) { return std::binary_search(sorted.begin(), sorted.end(), x); }

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

// components of the free variables (vars minus boundary) under the given factors
std::vector<std::vector<int>> components(const FactorGraph& g, const std::vector<int>& vars,
                                         const std::vector<int>& factors, const std::vector<int>& boundary) {
  std::vector<int> free;
  for (int v : vars)
    if (!contains(boundary, v)) free.push_back(v);
  Dsu d(g.num_vars());
  std::vector<char> is_free(g.num_vars(), 0);
  for (int v : free) is_free[v] = 1;
  for (int f : factors) {
    int first = -1;
    for (int v : g.factor(f).scope) {
      if (!is_free[v]) continue;
      if (first < 0)
        first = v;
      else
        d.unite(first, v);
    }
  }
  std::map<int, std::vector<int>> comp;
  for (int v : free) comp[d.find(v)].push_back(v);
  std::vector<std::vector<int>> out;
  for (auto& [r, c] : comp) out.push_back(sorted_unique(c));
  return out;
}

}  // namespace

int qubits_of(const FactorGraph& g, const std::vector<int>& vars) {
  int q = 0;
  for (int v : vars) q += ceil_log2(g.cardinality(v));
  return q;
}

std::uint64_t assignments_of(const FactorGraph& g, const std::vector<int>& vars) {
  std::uint64_t n = 1;
  for (int v : vars) n *= static_cast<std::uint64_t>(g.cardinality(v));
  return n;
}

BoundarySplit split(const FactorGraph& g, const std::vector<int>& boundary) {
  std::vector<int> vars(g.num_vars()), factors(g.num_factors());
  std::iota(vars.begin(), vars.end(), 0);
  std::iota(factors.begin(), factors.end(), 0);
  return split_region(g, vars, factors, boundary);
}

BoundarySplit split_region(const FactorGraph& g, const std::vector<int>& vars_in, const std::vector<int>& factors,
                           const std::vector<int>& boundary_in) {
  const std::vector<int> vars = sorted_unique(vars_in);
  BoundarySplit s;
  s.boundary = sorted_unique(boundary_in);
  for (int v : s.boundary)
    if (!contains(vars, v)) throw ConfigError("boundary variable " + g.name(v) + " is outside the region");
  auto comps = components(g, vars, factors, s.boundary);
  // order partitions by their smallest internal variable id
  std::sort(comps.begin(), comps.end(), [&](const std::vector<int>& a, const std::vector<int>& b) {
    auto mid = [&](const std::vector<int>& c) {
      int m = g.id(c[0]);
      for (int v : c) m = std::min(m, g.id(v));
      return m;
    };
    return mid(a) < mid(b);
  });
  std::vector<int> owner(g.num_vars(), -1);
  for (std::size_t k = 0; k < comps.size(); ++k)
    for (int v : comps[k]) owner[v] = static_cast<int>(k);
  s.parts.resize(comps.size());
  for (std::size_t k = 0; k < comps.size(); ++k) s.parts[k].internal = comps[k];
  for (int f : factors) {
    int k = -1;
    for (int v : g.factor(f).scope)
      if (owner[v] >= 0) k = owner[v];
    if (k < 0) {
      s.resident.push_back(f);
      continue;
    }
    Partition& p = s.parts[k];
    p.factors.push_back(f);
    for (int v : g.factor(f).scope) {
      if (contains(s.boundary, v))
        p.local_boundary.push_back(v);
      else if (!contains(vars, v))
        p.context.push_back(v);
    }
  }
  for (Partition& p : s.parts) {
    p.local_boundary = sorted_unique(p.local_boundary);
    p.context = sorted_unique(p.context);
  }
  return s;
}

SeparatorResult suggest_boundary(const FactorGraph& g, int target_parts, std::uint64_t seed, std::uint64_t budget) {
  std::vector<int> vars(g.num_vars()), factors(g.num_factors());
  std::iota(vars.begin(), vars.end(), 0);
  std::iota(factors.begin(), factors.end(), 0);
  return suggest_boundary_region(g, vars, factors, target_parts, seed, budget);
}

SeparatorResult suggest_boundary_region(const FactorGraph& g, const std::vector<int>& vars_in,
                                        const std::vector<int>& factors, int target_parts, std::uint64_t seed,
                                        std::uint64_t budget) {
  const std::vector<int> vars = sorted_unique(vars_in);
  // candidate order: variable-neighbour degree, descending; seeded shuffle breaks ties
  std::vector<std::set<int>> nb(g.num_vars());
  for (int f : factors)
    for (int a : g.factor(f).scope)
      for (int b : g.factor(f).scope)
        if (a != b && contains(vars, a) && contains(vars, b)) nb[a].insert(b);
  std::vector<int> cand = vars;
  std::mt19937_64 rng(seed);
  std::shuffle(cand.begin(), cand.end(), rng);
  std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return nb[a].size() > nb[b].size(); });

  SeparatorResult res;
  using Score = std::tuple<int, int, int>;  // (size, max part, count deviation)
  Score best{0, 0, 0};
  std::tuple<int, int, int> fallback_score{1, 0, 0};  // (-components, size, max part)
  std::vector<int> fallback;
  bool have_fallback = false;
  const int n = static_cast<int>(cand.size());
  for (int k = 0; k < n && !res.found; ++k) {
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      if (res.expansions >= budget) {
        res.budget_exhausted = true;
        break;
      }
      ++res.expansions;
      std::vector<int> b;
      for (int i : idx) b.push_back(cand[i]);
      b = sorted_unique(b);
      auto comps = components(g, vars, factors, b);
      int count = static_cast<int>(comps.size());
      int maxp = 0;
      for (auto& c : comps) maxp = std::max(maxp, static_cast<int>(c.size()));
      if (count >= target_parts) {
        Score sc{k, maxp, std::abs(count - target_parts)};
        if (!res.found || sc < best) {
          best = sc;
          res.boundary = b;
          res.found = true;
        }
      } else {
        std::tuple<int, int, int> fs{-count, k, maxp};
        if (!have_fallback || fs < fallback_score) {
          fallback_score = fs;
          fallback = b;
          have_fallback = true;
        }
      }
      // next combination
      int i = k - 1;
      while (i >= 0 && idx[i] == n - k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    if (res.budget_exhausted) break;
  }
  if (!res.found) res.boundary = fallback;
  return res;
}

double p_min_coordinator(const FactorGraph& g, const BoundarySplit& s, const PrecisionParams& params) {
  const double x = static_cast<double>(assignments_of(g, s.boundary));
  return std::pow(1.0 - params.delta, 2.0 * params.n_p * s.num_parts()) / x;
}

QubitReport qubit_requirements(const FactorGraph& g, const BoundarySplit& s, const PrecisionParams& params) {
  QubitReport r;
  const int ng = s.num_parts();
  const int np = params.n_p;
  r.p_min_c = p_min_coordinator(g, s, params);
  bool cl = false;
  r.t_c = t_checked(r.p_min_c, params, "coordinator", &cl);
  r.clamped = cl;
  int sum_vbn = 0;
  for (const Partition& p : s.parts) {
    const int vn = qubits_of(g, p.internal);
    const int vbn = qubits_of(g, p.local_boundary);
    sum_vbn += vbn;
    const double pm = default_p_min(vn);
    r.p_min_n.push_back(pm);
    r.t_n.push_back(t_checked(pm, params, "worker " + std::to_string(r.t_n.size() + 1), &cl));
    r.clamped = r.clamped || cl;
    // |V_n| + |V_B,n| + N_p + t_n + N_ora,n + t_c + 1, with N_ora,n = 0
    r.workers.push_back(vn + vbn + np + r.t_n.back() + 0 + r.t_c + 1);
  }
  r.q_b = qubits_of(g, s.boundary);
  r.q_cen = r.t_c + np;
  r.q_loc = ng * (np + 1);
  r.q_baux = sum_vbn;
  r.q_st_copies = ng * r.t_c;
  r.q_misc = 3;
  r.coordinator = r.q_b + r.q_cen + r.q_loc + r.q_baux + r.q_st_copies + r.q_misc;
  return r;
}

std::vector<int> DecompTree::level_nodes(int level) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].level == level) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> DecompTree::leaves() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].is_leaf()) out.push_back(static_cast<int>(i));
  return out;
}

std::pair<int, int> region_qubit_needs(const FactorGraph& g, const std::vector<int>& vars,
                                       const std::vector<int>& context, const PrecisionParams& params) {
  const int np = params.n_p;
  const int n = qubits_of(g, vars);
  const int tc = t_count(std::pow(1.0 - params.delta, 2.0 * np), params.delta, params.t_rule);
  const int tn = t_count(default_p_min(n), params.delta, params.t_rule);
  const int coord = tc + np + (np + 1) + tc + 3;
  const int worker = n + qubits_of(g, context) + np + tn + tc + 1;
  return {coord, worker};
}

namespace {

void extend_to_uniform_depth(DecompTree& t) {
  int L = 0;
  for (const TreeNode& n : t.nodes) L = std::max(L, n.level);
  t.levels = L;
  const std::size_t original = t.nodes.size();
  for (std::size_t i = 0; i < original; ++i) {
    if (!t.nodes[i].is_leaf() || t.nodes[i].level == L) continue;
    // turn the early leaf into a chain of trivial single-child nodes
    int cur = static_cast<int>(i);
    while (t.nodes[cur].level < L) {
      TreeNode child = t.nodes[cur];
      child.level = t.nodes[cur].level + 1;
      child.index.push_back(1);
      child.parent = cur;
      child.children.clear();
      child.boundary.clear();
      child.resident.clear();
      child.trivial = false;
      t.nodes[cur].boundary.clear();
      t.nodes[cur].resident.clear();
      t.nodes[cur].trivial = true;
      t.nodes.push_back(child);
      int id = static_cast<int>(t.nodes.size()) - 1;
      t.nodes[cur].children.push_back(id);
      cur = id;
    }
  }
}

void annotate(const FactorGraph& g, DecompTree& t, const PrecisionParams& params) {
  for (TreeNode& n : t.nodes) {
    auto need = region_qubit_needs(g, n.vars, n.context, params);
    if (n.is_leaf()) {
      n.coordinator_qubits = need.first;
      n.worker_qubits = need.second;
    } else {
      BoundarySplit s = split_region(g, n.vars, n.factors, n.boundary);
      PrecisionParams p = params;
      p.t_policy = TPolicy::clamp;
      p.t_max = 62;
      QubitReport r = qubit_requirements(g, s, p);
      n.coordinator_qubits = r.coordinator;
      n.worker_qubits = r.workers.empty() ? 0 : *std::max_element(r.workers.begin(), r.workers.end());
    }
  }
}

}  // namespace

DecompTree build_tree_with(const FactorGraph& g, const BoundaryChooser& choose, const PrecisionParams& params) {
  DecompTree t;
  TreeNode root;
  root.vars.resize(g.num_vars());
  std::iota(root.vars.begin(), root.vars.end(), 0);
  root.factors.resize(g.num_factors());
  std::iota(root.factors.begin(), root.factors.end(), 0);
  t.nodes.push_back(root);
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    auto b = choose(t.nodes[i]);
    if (!b) continue;
    BoundarySplit s = split_region(g, t.nodes[i].vars, t.nodes[i].factors, *b);
    t.nodes[i].boundary = s.boundary;
    t.nodes[i].resident = s.resident;
    for (std::size_t k = 0; k < s.parts.size(); ++k) {
      TreeNode c;
      c.level = t.nodes[i].level + 1;
      c.index = t.nodes[i].index;
      c.index.push_back(static_cast<int>(k) + 1);
      c.parent = static_cast<int>(i);
      c.vars = s.parts[k].internal;
      c.factors = s.parts[k].factors;
      std::vector<int> ctx = s.parts[k].local_boundary;
      ctx.insert(ctx.end(), s.parts[k].context.begin(), s.parts[k].context.end());
      c.context = sorted_unique(ctx);
      t.nodes.push_back(c);
      t.nodes[i].children.push_back(static_cast<int>(t.nodes.size()) - 1);
    }
    if (s.parts.empty()) t.nodes[i].boundary = s.boundary;
  }
  extend_to_uniform_depth(t);
  annotate(g, t, params);
  return t;
}

DecompTree build_tree(const FactorGraph& g, const Budgets& budgets, const PrecisionParams& params,
                      std::uint64_t seed) {
  auto chooser = [&](const TreeNode& n) -> std::optional<std::vector<int>> {
    auto need = region_qubit_needs(g, n.vars, n.context, params);
    if (need.first <= budgets.coordinator_max && need.second <= budgets.worker_max) return std::nullopt;
    std::string where = "node at level " + std::to_string(n.level) + " with " + std::to_string(n.vars.size()) +
                        " variables (needs " + std::to_string(need.first) + "/" + std::to_string(need.second) +
                        " coordinator/worker qubits)";
    if (need.first > budgets.coordinator_max) throw DecompositionInfeasible("coordinator budget too small: " + where);
    if (n.vars.size() <= 1) throw DecompositionInfeasible("worker budget too small: " + where);
    SeparatorResult r = suggest_boundary_region(g, n.vars, n.factors, 2, seed);
    if (r.boundary.empty() || r.boundary.size() >= n.vars.size()) {
      // no useful separator: peel off the highest-degree variable
      std::vector<int> deg(g.num_vars(), 0);
      for (int f : n.factors)
        for (int v : g.factor(f).scope) ++deg[v];
      int best = n.vars[0];
      for (int v : n.vars)
        if (deg[v] > deg[best]) best = v;
      r.boundary = {best};
    }
    return r.boundary;
  };
  DecompTree t = build_tree_with(g, chooser, params);
  return t;
}

std::vector<PolicyFamilyPoint> policy_family_path() {
  std::vector<PolicyFamilyPoint> p;
  for (int r = 3; r <= 5; ++r) p.push_back({5, 0, 1, 1, r});
  for (int r = 5; r <= 8; ++r) p.push_back({5, 1, 1, 1, r});
  for (int r = 8; r <= 13; ++r) p.push_back({6, 1, 1, 1, r});
  return p;
}

PolicyFamilyInstance policy_family_instance(int b0, int b1, int s0, int s1, int r, std::uint64_t seed) {
  if (b0 < 0 || b1 < 0 || s0 < 1 || s1 < 1 || r < 1) throw ConfigError("invalid benchmark-family parameters");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  FactorGraph raw;
  int next_id = 1;
  auto var = [&] { return raw.add_variable(2, next_id++); };
  std::vector<int> B0;
  for (int i = 0; i < b0; ++i) B0.push_back(var());
  std::vector<std::vector<int>> B1(s0);
  std::vector<std::vector<std::vector<int>>> R(s0, std::vector<std::vector<int>>(s1));
  for (int j = 0; j < s0; ++j) {
    for (int i = 0; i < b1; ++i) B1[j].push_back(var());
    for (int l = 0; l < s1; ++l)
      for (int i = 0; i < r; ++i) R[j][l].push_back(var());
  }
  auto unary = [&](int v) { raw.add_factor({v}, {val(rng), val(rng)}); };
  auto pair = [&](int a, int b) { raw.add_factor({a, b}, {val(rng), val(rng), val(rng), val(rng)}); };
  for (int v = 0; v < raw.num_vars(); ++v) unary(v);
  for (int i = 0; i + 1 < b0; ++i) pair(B0[i], B0[i + 1]);
  for (int j = 0; j < s0; ++j) {
    for (int i = 0; i + 1 < b1; ++i) pair(B1[j][i], B1[j][i + 1]);
    for (int l = 0; l < s1; ++l) {
      for (int i = 0; i + 1 < r; ++i) pair(R[j][l][i], R[j][l][i + 1]);
      for (int m = 0; m < b1; ++m) pair(B1[j][m], R[j][l][m % r]);
      if (b1 == 0)
        for (int i = 0; i < b0; ++i) pair(B0[i], R[j][l][i % r]);
    }
    if (b1 > 0)
      for (int i = 0; i < b0; ++i) pair(B0[i], B1[j][0]);
  }
  PolicyFamilyInstance inst;
  inst.graph = normalize(raw).graph;
  inst.b0 = b0;
  inst.b1 = b1;
  inst.s0 = s0;
  inst.s1 = s1;
  inst.r = r;
  // normalization keeps variable order, so the index sets carry over
  std::vector<int> B0s = B0;
  std::vector<std::vector<int>> B1s = B1;
  auto chooser = [&, B0s, B1s](const TreeNode& n) -> std::optional<std::vector<int>> {
    if (n.level == 0) return B0s;
    if (n.level == 1) {
      std::vector<int> b;
      for (const auto& set : B1s)
        for (int v : set)
          if (std::binary_search(n.vars.begin(), n.vars.end(), v)) b.push_back(v);
      return b;
    }
    return std::nullopt;
  };
  PrecisionParams p;
  p.n_p = 1;
  p.delta = 0.2;
  p.t_max = 2;
  p.t_policy = TPolicy::clamp;
  inst.tree = build_tree_with(inst.graph, chooser, p);
  return inst;
}

StarInstance star_boundary_instance(int n_b, int n_g, int r, std::uint64_t seed, int reach, int stride) {
  if (n_b < 0 || n_g < 1 || r < 1) throw ConfigError("invalid boundary-star parameters");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  FactorGraph raw;
  int next_id = 1;
  std::vector<int> B;
  for (int i = 0; i < n_b; ++i) B.push_back(raw.add_variable(2, next_id++));
  std::vector<std::vector<int>> W(n_g);
  for (int n = 0; n < n_g; ++n)
    for (int i = 0; i < r; ++i) W[n].push_back(raw.add_variable(2, next_id++));
  for (int v = 0; v < raw.num_vars(); ++v) raw.add_factor({v}, {val(rng), val(rng)});
  for (int n = 0; n < n_g; ++n) {
    for (int i = 0; i + 1 < r; ++i) raw.add_factor({W[n][i], W[n][i + 1]}, {val(rng), val(rng), val(rng), val(rng)});
    if (n_b == 0) continue;
    std::set<int> touched;
    if (reach < 0 || reach >= n_b) {
      for (int i = 0; i < n_b; ++i) touched.insert(i);
    } else {
      for (int i = 0; i < reach; ++i) touched.insert((n * stride + i) % n_b);
    }
    int m = 0;
    for (int i : touched) raw.add_factor({B[i], W[n][m++ % r]}, {val(rng), val(rng), val(rng), val(rng)});
  }
  StarInstance out;
  out.graph = normalize(raw).graph;
  out.boundary = B;
  return out;
}

std::string tree_to_json(const FactorGraph& g, const DecompTree& t) {
  using nlohmann::json;
  auto ids = [&](const std::vector<int>& vs) {
    std::vector<int> o;
    for (int v : vs) o.push_back(g.id(v));
    return o;
  };
  json j;
  j["levels"] = t.levels;
  j["nodes"] = json::array();
  for (const TreeNode& n : t.nodes) {
    j["nodes"].push_back({{"level", n.level},
                          {"index", n.index},
                          {"parent", n.parent},
                          {"vars", ids(n.vars)},
                          {"factors", n.factors},
                          {"context", ids(n.context)},
                          {"boundary", ids(n.boundary)},
                          {"resident", n.resident},
                          {"children", n.children},
                          {"trivial", n.trivial},
                          {"coordinator_qubits", n.coordinator_qubits},
                          {"worker_qubits", n.worker_qubits}});
  }
  return j.dump(2);
}

DecompTree tree_from_json(const FactorGraph& g, const std::string& text) {
  using nlohmann::json;
  DecompTree t;
  try {
    json j = json::parse(text);
    t.levels = j.at("levels").get<int>();
    auto idx = [&](const json& a) {
      std::vector<int> o;
      for (int id : a.get<std::vector<int>>()) {
        int v = g.index_of(id);
        if (v < 0) throw ConfigError("tree references unknown variable id " + std::to_string(id));
        o.push_back(v);
      }
      return o;
    };
    for (const json& jn : j.at("nodes")) {
      TreeNode n;
      n.level = jn.at("level").get<int>();
      n.index = jn.at("index").get<std::vector<int>>();
      n.parent = jn.at("parent").get<int>();
      n.vars = idx(jn.at("vars"));
      n.factors = jn.at("factors").get<std::vector<int>>();
      n.context = idx(jn.at("context"));
      n.boundary = idx(jn.at("boundary"));
      n.resident = jn.at("resident").get<std::vector<int>>();
      n.children = jn.at("children").get<std::vector<int>>();
      n.trivial = jn.value("trivial", false);
      n.coordinator_qubits = jn.value("coordinator_qubits", 0);
      n.worker_qubits = jn.value("worker_qubits", 0);
      t.nodes.push_back(n);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("tree JSON error: ") + e.what());
  }
  if (t.nodes.empty()) throw ConfigError("tree JSON has no nodes");
  return t;
}

std::string split_to_json(const FactorGraph& g, const BoundarySplit& s) {
  using nlohmann::json;
  auto ids = [&](const std::vector<int>& vs) {
    std::vector<int> o;
    for (int v : vs) o.push_back(g.id(v));
    return o;
  };
  json j;
  j["boundary"] = ids(s.boundary);
  j["resident_factors"] = s.resident;
  j["partitions"] = json::array();
  for (const Partition& p : s.parts)
    j["partitions"].push_back(
        {{"internal", ids(p.internal)}, {"factors", p.factors}, {"local_boundary", ids(p.local_boundary)}});
  return j.dump(2);
}

}  // namespace qfn
