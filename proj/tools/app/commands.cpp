#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <iostream>
#include <memory>
#include <sstream>

#include "acceptance.hpp"
#include "sweeps.hpp"

namespace qfn::app {

namespace {

std::uint64_t spec_seed(const json& spec, const Flags& f) {
  if (f.seed) return *f.seed;
  return spec.value("seed", std::uint64_t{1});
}

void emit(const Flags& f, const std::string& text) {
  if (f.out) {
    write_text(*f.out, text);
  } else {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  }
}

std::string out_path(const json& spec, Flags& f) {
  if (!f.out && spec.contains("out")) f.out = spec.at("out").get<std::string>();
  return f.out.value_or("");
}

bool wants_csv(const Flags& f) { return f.out && ends_with(*f.out, ".csv"); }

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

long long sdiff(std::uint64_t a, std::uint64_t b) { return static_cast<long long>(a) - static_cast<long long>(b); }

json counter(std::uint64_t sim, std::uint64_t closed) {
  return json{{"sim", sim}, {"closed", closed}, {"diff", sdiff(sim, closed)}};
}

std::vector<int> boundary_ids(const Problem& p, const std::vector<int>& vars) {
  std::vector<int> ids;
  for (int v : vars) {
    int id = p.graph.id(v);
    if (p.record) {
      for (int o = 0; o < p.original.num_vars(); ++o)
        if (v >= p.record->first_bit[o] && v < p.record->first_bit[o] + p.record->bits[o]) id = p.original.id(o);
    }
    if (ids.empty() || ids.back() != id) ids.push_back(id);
  }
  return ids;
}

const std::vector<std::string> kRunKeys = {"instance", "generator", "normalize", "boundary", "parts",
                                           "network",  "params",    "mode",      "readout",  "seed",
                                           "max_qubits", "keep_aux", "out"};

struct RunSetup {
  Problem problem;
  DistRunConfig cfg;
};

// cfg.graph points into setup.problem, so the setup is heap allocated and never moved
std::unique_ptr<RunSetup> build_run(const json& spec, const Flags& f) {
  check_keys(spec, kRunKeys, "run config");
  auto s = std::make_unique<RunSetup>();
  const std::uint64_t seed = spec_seed(spec, f);
  s->problem = load_problem(spec, seed);
  PrecisionParams params = parse_params(spec.value("params", json()));
  NetworkSpec net = parse_network(spec.value("network", json()));
  DistRunConfig& cfg = s->cfg;
  cfg.graph = &s->problem.graph;
  cfg.split = split(s->problem.graph, s->problem.boundary);
  if (cfg.split.num_parts() == 0) throw ConfigError("boundary leaves no partition");
  cfg.network = net.build(cfg.split.num_parts());
  cfg.params = params;
  cfg.seed = seed;
  cfg.mode = sim_mode_from_string(f.mode.value_or(spec.value("mode", std::string("compact"))));
  cfg.readout = readout_from_string(f.readout.value_or(spec.value("readout", std::string("argmax"))));
  cfg.max_qubits = spec.value("max_qubits", kDefaultMaxQubits);
  cfg.keep_aux = spec.value("keep_aux", true);
  return s;
}

}  // namespace

json dist_result_json(const Problem& p, const DistRunConfig& cfg, const DistResult& r, bool dump_state) {
  json j;
  j["z_bits"] = r.z_bits;
  j["z_key"] = r.z_key;
  j["value"] = r.value;
  j["value_original_scale"] = recover_value(p, r.value);
  j["correct_key"] = r.correct_key;
  j["success"] = r.success;
  j["correct_mass"] = r.correct_mass;
  j["clean_correct_mass"] = r.clean_correct_mass;
  j["success_lower_bound"] = std::pow(1.0 - cfg.params.delta, 2.0 * cfg.params.n_p);
  j["gap_bound"] = (cfg.split.num_parts() + 1) * std::ldexp(1.0, -cfg.params.n_p);
  j["t_c"] = r.t_c;
  j["t_n"] = r.t_n;
  j["t_clamped"] = r.t_clamped;
  j["p_min_c"] = r.p_min_c;
  j["p_min_n"] = r.p_min_n;
  j["p_z"] = r.p_z;
  j["optimal_branch_overlap"] = r.optimal_branch_overlap;
  j["max_norm_error"] = r.max_norm_error;
  j["counters"] = {{"u_ini_calls", counter(r.ledger.u_ini_calls, r.closed_u_ini_calls)},
                   {"leaf_queries", counter(r.ledger.leaf_queries, r.closed_leaf_queries)},
                   {"epr", counter(r.ledger.epr_total(), r.closed_epr)},
                   {"epr_single_hop_closed", r.closed_epr_single_hop}};
  json cls;
  for (int c = 0; c < kEprClasses; ++c) cls[to_string(static_cast<EprClass>(c))] = r.ledger.epr[c];
  j["epr_by_class"] = cls;
  j["worker_queries"] = r.ledger.worker_queries;
  j["peak_qubits"] = r.ledger.peak_qubits;
  j["sync_events"] = r.ledger.sync_events.size();
  j["params"] = params_to_json(cfg.params);
  j["network"] = {{"kind", cfg.network.kind_name}, {"diameter", cfg.network.diameter()}};
  j["mode"] = to_string(cfg.mode);
  j["readout"] = to_string(cfg.readout);
  j["seed"] = cfg.seed;
  j["num_vars"] = p.graph.num_vars();
  j["num_parts"] = cfg.split.num_parts();
  j["boundary"] = boundary_ids(p, cfg.split.boundary);
  if (p.graph.num_vars() <= 24) {
    std::uint64_t ref = reference_z_key(p.graph, cfg.split, cfg.params.n_p);
    j["oracle_key"] = ref;
    j["success_vs_oracle"] = r.z_key == ref;
  }
  if (dump_state) {
    json w = json::array(), m = json::array();
    for (std::size_t k = 0; k < r.marginal.size(); ++k) {
      const std::string label = key_string(k, cfg.params.n_p);
      m.push_back({{"basis", label}, {"prob", r.marginal[k]}});
      w.push_back({{"basis", label}, {"weight", r.weights.at(k)}});
    }
    j["state"] = {{"register", "q_p,c"}, {"marginal", m}, {"ini_weights", w}};
  }
  return j;
}

std::string dist_csv_header() {
  return "num_vars,num_parts,n_p,delta,t_max,t_rule,topology,diameter,mode,readout,seed,t_c,z_bits,value,correct_key,"
         "success,correct_mass,clean_correct_mass,u_ini_sim,u_ini_closed,u_ini_diff,leaf_queries_sim,"
         "leaf_queries_closed,leaf_queries_diff,epr_sim,epr_closed,epr_diff";
}

std::string dist_csv_row(const DistRunConfig& cfg, const DistResult& r) {
  std::ostringstream s;
  s << cfg.graph->num_vars() << ',' << cfg.split.num_parts() << ',' << cfg.params.n_p << ','
    << fmt_double(cfg.params.delta) << ',' << cfg.params.t_max << ',' << to_string(cfg.params.t_rule) << ','
    << cfg.network.kind_name << ',' << cfg.network.diameter() << ',' << to_string(cfg.mode) << ','
    << to_string(cfg.readout) << ',' << cfg.seed << ',' << r.t_c << ',' << r.z_bits << ',' << fmt_double(r.value)
    << ',' << r.correct_key << ',' << (r.success ? 1 : 0) << ',' << fmt_double(r.correct_mass) << ','
    << fmt_double(r.clean_correct_mass) << ',' << r.ledger.u_ini_calls << ',' << r.closed_u_ini_calls << ','
    << sdiff(r.ledger.u_ini_calls, r.closed_u_ini_calls) << ',' << r.ledger.leaf_queries << ','
    << r.closed_leaf_queries << ',' << sdiff(r.ledger.leaf_queries, r.closed_leaf_queries) << ','
    << r.ledger.epr_total() << ',' << r.closed_epr << ',' << sdiff(r.ledger.epr_total(), r.closed_epr);
  return s.str();
}

int cmd_solve(const json& spec, const Flags& flags) {
  Flags f = flags;
  out_path(spec, f);
  auto s = build_run(spec, f);
  DistResult r = a_dist(s->cfg);
  if (wants_csv(f)) {
    emit(f, dist_csv_header() + "\n" + dist_csv_row(s->cfg, r) + "\n");
  } else {
    emit(f, dist_result_json(s->problem, s->cfg, r, f.dump_state).dump(2));
  }
  return kOk;
}

int cmd_find_config(const json& spec, const Flags& flags) {
  Flags f = flags;
  out_path(spec, f);
  auto s = build_run(spec, f);
  const Problem& p = s->problem;
  ConfigResult c = a_dist_config(s->cfg);
  json j;
  j["invocations"] = c.runs.size();
  j["expected_invocations"] = 2 * p.graph.num_vars() + 1;
  j["leaf_queries"] = c.leaf_queries;
  j["joint_success"] = c.joint_success;
  j["joint_clean_mass"] = c.joint_clean_mass;
  const double n_g = s->cfg.split.num_parts();
  const double bound = 4.0 * p.graph.num_vars() * (n_g + 1) * std::ldexp(1.0, -s->cfg.params.n_p);
  j["accuracy_bound"] = bound;
  j["assignment_binary"] = c.x;
  const double g_hat = p.graph.evaluate(c.x);
  j["g_hat"] = g_hat;
  std::optional<Assignment> xo = decode_assignment(p, c.x);
  if (xo) {
    json a = json::object();
    for (int v = 0; v < p.original.num_vars(); ++v) a[std::to_string(p.original.id(v))] = (*xo)[v];
    j["assignment"] = a;
    j["g_hat_original"] = p.original.evaluate(*xo);
  } else {
    j["assignment"] = nullptr;  // decoded to an unused symbol code
  }
  if (p.graph.config_count() <= (std::uint64_t{1} << 22)) {
    MaxResult best = brute_force_max(p.graph);
    j["g_max"] = best.value;
    j["gap"] = best.value - g_hat;
    j["within_bound"] = std::fabs(best.value - g_hat) <= bound + 1e-12;
    j["exact_argmax"] = best.argmax == c.x;
  }
  if (wants_csv(f)) {
    std::string csv = "num_vars,invocations,leaf_queries,joint_success,joint_clean_mass,g_hat,accuracy_bound\n";
    csv += std::to_string(p.graph.num_vars()) + "," + std::to_string(c.runs.size()) + "," +
           std::to_string(c.leaf_queries) + "," + (c.joint_success ? "1" : "0") + "," + fmt_double(c.joint_clean_mass) +
           "," + fmt_double(g_hat) + "," + fmt_double(bound) + "\n";
    emit(f, csv);
  } else {
    emit(f, j.dump(2));
  }
  return kOk;
}

int cmd_decompose(const json& spec_in, const Flags& flags) {
  Flags f = flags;
  json spec = spec_in.is_null() ? json::object() : spec_in;
  check_keys(spec, {"instance", "generator", "normalize", "boundary", "parts", "params", "tree", "seed", "out"},
             "decompose config");
  if (!spec.contains("instance") && !spec.contains("generator")) {
    spec["generator"] = {{"kind", "markowitz"}};
    if (!spec.contains("boundary")) spec["boundary"] = {3, 7};
  }
  out_path(spec, f);
  const std::uint64_t seed = spec_seed(spec, f);
  Problem p = load_problem(spec, seed);
  PrecisionParams params = parse_params(spec.value("params", json()));

  if (spec.contains("tree")) {
    const json& t = spec.at("tree");
    check_keys(t, {"coordinator_max", "worker_max"}, "tree");
    Budgets b;
    b.coordinator_max = t.value("coordinator_max", b.coordinator_max);
    b.worker_max = t.value("worker_max", b.worker_max);
    DecompTree tree = build_tree(p.graph, b, params, seed);
    emit(f, tree_to_json(p.graph, tree));
    return kOk;
  }

  BoundarySplit s = split(p.graph, p.boundary);
  QubitReport q = qubit_requirements(p.graph, s, params);
  if (f.out && ends_with(*f.out, ".json")) {
    json j;
    j["split"] = json::parse(split_to_json(p.graph, s));
    j["qubits"] = {{"coordinator", q.coordinator}, {"workers", q.workers},   {"q_b", q.q_b},
                   {"q_cen", q.q_cen},             {"q_loc", q.q_loc},       {"q_baux", q.q_baux},
                   {"q_st_copies", q.q_st_copies}, {"q_misc", q.q_misc},     {"t_c", q.t_c},
                   {"t_n", q.t_n},                 {"p_min_c", q.p_min_c},   {"p_min_n", q.p_min_n},
                   {"clamped", q.clamped}};
    emit(f, j.dump(2));
    return kOk;
  }
  // p.original names the user-facing variables; binary variables are named after them
  std::ostringstream o;
  auto names = [&](const std::vector<int>& vs) {
    std::string out = "{";
    for (std::size_t i = 0; i < vs.size(); ++i) out += (i ? "," : "") + p.graph.name(vs[i]);
    return out + "}";
  };
  auto fnames = [&](const std::vector<int>& fs) {
    std::string out = "{";
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const std::string& n = p.graph.factor(fs[i]).name;
      out += (i ? "," : "") + (n.empty() ? "f" + std::to_string(fs[i]) : n);
    }
    return out + "}";
  };
  o << "boundary V_B = " << names(s.boundary) << "\n";
  for (int n = 0; n < s.num_parts(); ++n) {
    const Partition& pt = s.parts[n];
    o << "partition " << n + 1 << ": V = " << names(pt.internal) << "  F = " << fnames(pt.factors)
      << "  V_B,n = " << names(pt.local_boundary) << "\n";
  }
  if (!s.resident.empty()) o << "resident factors: " << fnames(s.resident) << "\n";
  o << "\nN_p = " << params.n_p << ", delta = " << params.delta << ", p_min,c = " << q.p_min_c << ", t_c = " << q.t_c
    << (q.clamped ? " (clamped)" : "") << "\n";
  o << "coordinator qubits: " << q.coordinator << "  (q_B " << q.q_b << ", q_cen " << q.q_cen << ", q_loc "
    << q.q_loc << ", q_Baux " << q.q_baux << ", q_st copies " << q.q_st_copies << ", misc " << q.q_misc << ")\n";
  for (std::size_t n = 0; n < q.workers.size(); ++n)
    o << "worker " << n + 1 << " qubits: " << q.workers[n] << "  (t_n " << q.t_n[n] << ", p_min,n " << q.p_min_n[n]
      << ")\n";
  emit(f, o.str());
  return kOk;
}

int cmd_hier(const json& spec_in, const Flags& flags) {
  Flags f = flags;
  json spec = spec_in.is_null() ? json::object() : spec_in;
  check_keys(spec, {"instance", "generator", "normalize", "tree", "policy", "hier_mode", "params", "seed", "out"},
             "hier config");
  if (!spec.contains("instance") && !spec.contains("generator"))
    spec["generator"] = {{"kind", "policy_family"}, {"b0", 5}, {"b1", 0}, {"s0", 1}, {"s1", 1}, {"r", 3}};
  out_path(spec, f);
  const std::uint64_t seed = spec_seed(spec, f);
  json load = spec;
  load.erase("tree");
  load.erase("policy");
  load.erase("hier_mode");
  load.erase("params");
  Problem p = load_problem(load, seed);
  if (spec.contains("tree")) {
    const json& t = spec.at("tree");
    p.tree = tree_from_json(p.graph, t.is_string() ? slurp(t.get<std::string>()) : t.dump());
  }
  if (!p.tree) throw ConfigError("hier needs a tree: give 'tree' (path or inline) or an policy_family generator");
  PrecisionParams params = parse_params(spec.value("params", json()), policy_sweep_params());
  const std::string mode = spec.value("hier_mode", std::string("statevector"));
  if (mode != "statevector" && mode != "cost_model") throw ConfigError("hier_mode must be statevector or cost_model");
  const HierMode hm = mode == "statevector" ? HierMode::statevector : HierMode::cost_model;

  std::vector<std::string> names;
  const json pol = spec.value("policy", json("all"));
  if (pol.is_string() && pol.get<std::string>() == "all") {
    names = policy_names();
  } else if (pol.is_string()) {
    names = {pol.get<std::string>()};
  } else {
    names = pol.get<std::vector<std::string>>();
  }
  PolicyFamilyPoint pt{0, 0, 0, 0, 0};
  if (spec.contains("generator") && spec.at("generator").value("kind", "") == "policy_family") {
    const json& g = spec.at("generator");
    pt = {g.value("b0", 5), g.value("b1", 0), g.value("s0", 1), g.value("s1", 1), g.value("r", 3)};
  }
  const HierCostReport base = cost_model(p.graph, *p.tree, policy_from_name("coherent", p.tree->levels), params);
  std::vector<HierSweepRow> rows(names.size());
  parallel_for(names.size(), f.jobs, [&](std::size_t i) {
    HierSweepRow& row = rows[i];
    row.point = pt;
    row.num_vars = p.graph.num_vars();
    row.policy = names[i];
    row.exec = execute(p.graph, *p.tree, policy_from_name(names[i], p.tree->levels), params, hm);
    row.query_multiplier = static_cast<double>(row.exec.report.c_hier) / static_cast<double>(base.c_hier);
    row.epr_multiplier =
        base.n_epr_hier ? static_cast<double>(row.exec.report.n_epr_hier) / static_cast<double>(base.n_epr_hier) : 0.0;
  });
  emit(f, policy_table(rows, params).csv());
  return kOk;
}

int cmd_sweep(const json& spec_in, const Flags& flags) {
  Flags f = flags;
  json spec = spec_in.is_null() ? json::object() : spec_in;
  check_keys(spec, {"kind", "grid", "params", "simulate", "hier_mode", "seed", "out"}, "sweep config");
  out_path(spec, f);
  const std::uint64_t seed = spec_seed(spec, f);
  const std::string kind = spec.value("kind", std::string("query"));
  const bool simulate = spec.value("simulate", true);
  const bool has_grid = spec.contains("grid");
  std::vector<int> grid;
  if (has_grid) {
    try {
      grid = spec.at("grid").get<std::vector<int>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("sweep.grid must be a list of integers: ") + e.what());
    }
  }
  const json pj = spec.value("params", json());

  if (kind == "query") {
    PrecisionParams params = parse_params(pj, query_sweep_params());
    auto pts = query_sweep_points(has_grid ? grid : default_query_vars());
    std::vector<QueryRow> rows(pts.size());
    parallel_for(pts.size(), f.jobs, [&](std::size_t i) { rows[i] = run_query_point(pts[i], params, seed, simulate); });
    emit(f, query_table(rows).csv());
  } else if (kind == "topology" || kind == "diameter") {
    std::vector<NetworkPoint> pts;
    PrecisionParams params;
    if (kind == "topology") {
      params = parse_params(pj, topology_sweep_params());
      pts = topology_sweep_points(has_grid ? grid : std::vector<int>{2, 3, 4, 5, 6, 7, 8});
    } else {
      params = parse_params(pj, diameter_sweep_params());
      std::vector<int> d;
      for (int i = 1; i <= 32; ++i) d.push_back(i);
      pts = diameter_sweep_points(has_grid ? grid : d);
    }
    std::vector<NetworkRow> rows(pts.size());
    parallel_for(pts.size(), f.jobs,
                 [&](std::size_t i) { rows[i] = run_network_point(pts[i], params, seed, simulate); });
    emit(f, network_table(rows).csv());
  } else if (kind == "policy") {
    PrecisionParams params = parse_params(pj, policy_sweep_params());
    const std::string mode = spec.value("hier_mode", std::string("statevector"));
    if (mode != "statevector" && mode != "cost_model") throw ConfigError("hier_mode must be statevector or cost_model");
    std::vector<PolicyFamilyPoint> pts;
    for (const PolicyFamilyPoint& pt : policy_family_path())
      if (!has_grid || std::find(grid.begin(), grid.end(), pt.num_vars()) != grid.end()) pts.push_back(pt);
    std::vector<std::vector<HierSweepRow>> parts(pts.size());
    parallel_for(pts.size(), f.jobs, [&](std::size_t i) {
      parts[i] = policy_sweep_point(pts[i], params, mode == "statevector", seed);
    });
    std::vector<HierSweepRow> rows;
    for (auto& part : parts)
      for (auto& r : part) rows.push_back(std::move(r));
    emit(f, policy_table(rows, params).csv());
  } else {
    throw ConfigError("sweep.kind must be query, topology, diameter or policy");
  }
  return kOk;
}

int cmd_verify(const json& spec_in, const Flags& flags) {
  Flags f = flags;
  json spec = spec_in.is_null() ? json::object() : spec_in;
  check_keys(spec, {"criteria", "seed", "verbose", "out"}, "verify config");
  out_path(spec, f);
  AcceptanceOptions opt;
  if (spec.contains("criteria")) opt.criteria = spec.at("criteria").get<std::vector<int>>();
  opt.seed = f.seed.value_or(spec.value("seed", opt.seed));
  opt.jobs = f.jobs;
  opt.verbose = spec.value("verbose", false);
  opt.log = [](const std::string& line) { std::cerr << line << '\n'; };
  auto results = run_acceptance(opt);
  bool all = true;
  json j = json::array();
  std::string text;
  for (const auto& r : results) {
    all = all && r.pass;
    text += summary_line(r) + "\n";
    for (const auto& d : r.details) text += "      " + d + "\n";
    j.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"details", r.details}, {"seconds", r.seconds}});
  }
  std::cout << text;
  if (f.out) write_text(*f.out, j.dump(2) + "\n");
  return all ? kOk : kAcceptanceFail;
}

}  // namespace qfn::app
