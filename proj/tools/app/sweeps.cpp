#include "sweeps.hpp"

#include <cstdio>
#include <sstream>

namespace qfn::app {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string diff(std::uint64_t a, std::uint64_t b) {
  return std::to_string(static_cast<long long>(a) - static_cast<long long>(b));
}

}  // namespace

std::vector<int> default_query_vars() {
  std::vector<int> v;
  for (int n = 8; n <= 20; ++n) v.push_back(n);
  return v;
}

std::vector<QueryPoint> query_sweep_points(const std::vector<int>& num_vars) {
  std::vector<QueryPoint> pts;
  for (int v : num_vars) {
    QueryPoint p;
    p.num_vars = v;
    p.n_g = 2;
    p.r = v <= 13 ? 2 : 3;
    p.n_b = v - p.n_g * p.r;
    if (p.n_b < 0) throw ConfigError("query sweep: |V| = " + std::to_string(v) + " is too small");
    pts.push_back(p);
  }
  return pts;
}

PrecisionParams query_sweep_params() {
  PrecisionParams p;
  p.n_p = 1;
  p.delta = 0.25;
  p.t_max = 16;
  return p;
}

QueryRow run_query_point(const QueryPoint& pt, const PrecisionParams& params, std::uint64_t seed, bool simulate) {
  QueryRow row;
  row.pt = pt;
  row.params = params;
  StarInstance inst = star_boundary_instance(pt.n_b, pt.n_g, pt.r, seed);
  DistRunConfig cfg = star_config(inst, params, TopologyKind::single_hop);
  cfg.readout = Readout::correct;
  cfg.seed = seed;
  PrecisionPlan plan = plan_precision(inst.graph, cfg.split, params);
  row.t_c = plan.t_c;
  row.t_n = plan.t_n;
  row.u_ini_closed = closed_form_u_ini_calls(params.n_p, plan.t_c);
  row.leaf_closed = closed_form_c_distr(params.n_p, plan.t_c, plan.t_n);
  row.epr_closed = closed_form_epr_terms(params.n_p, plan.t_c, local_boundary_sizes(inst.graph, cfg.split)).total();
  if (simulate) {
    DistResult r = a_dist(cfg);
    row.simulated = true;
    row.u_ini_sim = r.ledger.u_ini_calls;
    row.leaf_sim = r.ledger.leaf_queries;
    row.epr_sim = r.ledger.epr_total();
  } else {
    row.u_ini_sim = row.u_ini_closed;
    row.leaf_sim = row.leaf_closed;
    row.epr_sim = row.epr_closed;
  }
  BenchmarkResult b = classical_comm_benchmark(cfg);
  row.bench_queries = b.ledger.leaf_queries;
  row.bench_repetitions = b.repetitions;
  row.ratio = static_cast<double>(row.bench_queries) / static_cast<double>(row.leaf_sim);
  return row;
}

Tables query_table(const std::vector<QueryRow>& rows) {
  Tables t;
  t.header =
      "num_vars,n_b,r,n_g,n_p,delta,t_max,t_rule,t_c,t_n,simulated,u_ini_sim,u_ini_closed,u_ini_diff,"
      "leaf_queries_sim,leaf_queries_closed,leaf_queries_diff,epr_sim,epr_closed,epr_diff,"
      "benchmark_queries,benchmark_repetitions,query_ratio";
  for (const auto& r : rows) {
    std::ostringstream s;
    s << r.pt.num_vars << ',' << r.pt.n_b << ',' << r.pt.r << ',' << r.pt.n_g << ',' << r.params.n_p << ','
      << fmt_double(r.params.delta) << ',' << r.params.t_max << ',' << to_string(r.params.t_rule) << ',' << r.t_c << ','
      << join_ints(r.t_n) << ',' << (r.simulated ? 1 : 0) << ',' << r.u_ini_sim << ',' << r.u_ini_closed << ','
      << diff(r.u_ini_sim, r.u_ini_closed) << ',' << r.leaf_sim << ',' << r.leaf_closed << ','
      << diff(r.leaf_sim, r.leaf_closed) << ',' << r.epr_sim << ',' << r.epr_closed << ','
      << diff(r.epr_sim, r.epr_closed) << ',' << r.bench_queries << ',' << r.bench_repetitions << ','
      << fmt_double(r.ratio);
    t.rows.push_back(s.str());
  }
  return t;
}

std::vector<TopologyKind> sweep_topologies() {
  return {TopologyKind::line, TopologyKind::ring, TopologyKind::tree, TopologyKind::mesh, TopologyKind::star};
}

std::vector<NetworkPoint> topology_sweep_points(const std::vector<int>& n_b) {
  std::vector<NetworkPoint> pts;
  for (int b : n_b)
    for (TopologyKind k : sweep_topologies()) {
      NetworkPoint p;
      p.sweep = "topology";
      p.topo = k;
      p.stretch = 1;
      p.n_b = b;
      p.n_g = 6;
      p.reach = -1;
      pts.push_back(p);
    }
  return pts;
}

PrecisionParams topology_sweep_params() {
  PrecisionParams p;
  p.n_p = 1;
  p.delta = 0.25;
  return p;
}

int base_diameter(TopologyKind k, int n_g) {
  return NetworkModel::make(k, n_g, 1, true).diameter();
}

std::vector<NetworkPoint> diameter_sweep_points(const std::vector<int>& diameters) {
  std::vector<NetworkPoint> pts;
  for (TopologyKind k : sweep_topologies()) {
    const int base = base_diameter(k, 8);
    for (int d : diameters) {
      if (d < base || d % base != 0) continue;  // stretch must be an integer
      NetworkPoint p;
      p.sweep = "diameter";
      p.topo = k;
      p.stretch = d / base;
      p.n_b = 5;
      p.n_g = 8;
      p.reach = 2;
      pts.push_back(p);
    }
  }
  return pts;
}

PrecisionParams diameter_sweep_params() {
  PrecisionParams p;
  p.n_p = 1;
  p.delta = 0.25;
  p.t_max = 2;
  p.t_policy = TPolicy::clamp;
  return p;
}

NetworkRow run_network_point(const NetworkPoint& pt, const PrecisionParams& params, std::uint64_t seed,
                             bool simulate) {
  NetworkRow row;
  row.pt = pt;
  row.params = params;
  StarInstance inst = star_boundary_instance(pt.n_b, pt.n_g, 1, seed, pt.reach);
  DistRunConfig cfg = star_config(inst, params, pt.topo, pt.stretch);
  cfg.readout = Readout::correct;
  cfg.seed = seed;
  row.num_vars = inst.graph.num_vars();
  row.diameter = cfg.network.diameter();
  row.uniform = true;
  for (int n = 0; n < cfg.network.num_workers(); ++n)
    row.uniform = row.uniform && cfg.network.dist_to_worker(n) == cfg.network.dist_to_worker(0);
  PrecisionPlan plan = plan_precision(inst.graph, cfg.split, params);
  row.t_c = plan.t_c;
  const std::vector<int> vb = local_boundary_sizes(inst.graph, cfg.split);
  row.epr_closed = closed_form_epr_terms(params.n_p, plan.t_c, vb, &cfg.network).total();
  row.epr_single_hop = closed_form_epr_terms(params.n_p, plan.t_c, vb).total();
  row.epr_bound = static_cast<std::uint64_t>(row.diameter) * row.epr_single_hop;
  row.leaf_closed = closed_form_c_distr(params.n_p, plan.t_c, plan.t_n);
  if (simulate) {
    DistResult r = a_dist(cfg);
    row.simulated = true;
    row.epr_sim = r.ledger.epr_total();
    row.leaf_sim = r.ledger.leaf_queries;
  } else {
    row.epr_sim = row.epr_closed;
    row.leaf_sim = row.leaf_closed;
  }
  return row;
}

Tables network_table(const std::vector<NetworkRow>& rows) {
  Tables t;
  t.header =
      "sweep,topology,stretch,diameter,uniform,n_b,n_g,reach,num_vars,n_p,delta,t_max,t_policy,t_rule,t_c,simulated,"
      "epr_sim,epr_closed,epr_diff,epr_single_hop,epr_bound,within_bound,leaf_queries_sim,leaf_queries_closed,"
      "leaf_queries_diff";
  for (const auto& r : rows) {
    std::ostringstream s;
    s << r.pt.sweep << ',' << to_string(r.pt.topo) << ',' << r.pt.stretch << ',' << r.diameter << ','
      << (r.uniform ? 1 : 0) << ',' << r.pt.n_b << ',' << r.pt.n_g << ',' << r.pt.reach << ',' << r.num_vars << ','
      << r.params.n_p << ',' << fmt_double(r.params.delta) << ',' << r.params.t_max << ','
      << to_string(r.params.t_policy) << ',' << to_string(r.params.t_rule) << ',' << r.t_c << ','
      << (r.simulated ? 1 : 0) << ',' << r.epr_sim << ',' << r.epr_closed << ',' << diff(r.epr_sim, r.epr_closed)
      << ',' << r.epr_single_hop << ',' << r.epr_bound << ',' << (r.epr_sim <= r.epr_bound ? 1 : 0) << ','
      << r.leaf_sim << ',' << r.leaf_closed << ',' << diff(r.leaf_sim, r.leaf_closed);
    t.rows.push_back(s.str());
  }
  return t;
}

Tables policy_table(const std::vector<HierSweepRow>& rows, const PrecisionParams& params) {
  Tables t;
  t.header = hier_csv_header();
  for (const auto& r : rows) t.rows.push_back(hier_csv_row(r, params));
  return t;
}

}  // namespace qfn::app
