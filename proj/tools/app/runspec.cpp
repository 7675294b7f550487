#include "runspec.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace qfn::app {

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace

NetworkModel NetworkSpec::build(int num_workers) const {
  return NetworkModel::make(kind, num_workers, stretch, coordinator_at_end);
}

NetworkSpec parse_network(const json& j) {
  NetworkSpec s;
  if (j.is_null()) return s;
  if (j.is_string()) {
    s.kind = topology_from_string(j.get<std::string>());
    return s;
  }
  check_keys(j, {"kind", "topology", "stretch", "coordinator"}, "network");
  std::string kind = get_or<std::string>(j, "kind", get_or<std::string>(j, "topology", "single_hop", "network"),
                                         "network");
  s.kind = topology_from_string(kind);
  s.stretch = get_or<int>(j, "stretch", 1, "network");
  std::string at = get_or<std::string>(j, "coordinator", "end", "network");
  if (at == "end") {
    s.coordinator_at_end = true;
  } else if (at == "center" || at == "middle") {
    s.coordinator_at_end = false;
  } else {
    throw ConfigError("network.coordinator must be 'end' or 'center'");
  }
  if (s.stretch < 1) throw ConfigError("network.stretch must be >= 1");
  return s;
}

PrecisionParams parse_params(const json& j, const PrecisionParams& base) {
  PrecisionParams p = base;
  if (j.is_null()) return p;
  check_keys(j, {"n_p", "delta", "t_max", "t_policy", "t_rule"}, "params");
  p.n_p = get_or<int>(j, "n_p", p.n_p, "params");
  p.delta = get_or<double>(j, "delta", p.delta, "params");
  p.t_max = get_or<int>(j, "t_max", p.t_max, "params");
  if (j.contains("t_policy")) p.t_policy = t_policy_from_string(j.at("t_policy").get<std::string>());
  if (j.contains("t_rule")) p.t_rule = t_rule_from_string(j.at("t_rule").get<std::string>());
  p.validate();
  return p;
}

json params_to_json(const PrecisionParams& p) {
  return json{{"n_p", p.n_p},
              {"delta", p.delta},
              {"t_max", p.t_max},
              {"t_policy", to_string(p.t_policy)},
              {"t_rule", to_string(p.t_rule)}};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string Tables::csv() const {
  std::string out = header + "\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

namespace {

FactorGraph generate(const json& g, std::uint64_t seed, Problem& p) {
  if (!g.is_object() || !g.contains("kind")) throw ConfigError("generator: expected an object with 'kind'");
  const std::string kind = g.at("kind").get<std::string>();
  if (kind == "random") {
    check_keys(g, {"kind", "num_vars", "max_cardinality", "num_factors", "max_scope", "lo", "hi", "connected",
                   "seed"},
               "generator");
    RandomGraphSpec s;
    s.num_vars = get_or<int>(g, "num_vars", s.num_vars, "generator");
    s.max_cardinality = get_or<int>(g, "max_cardinality", s.max_cardinality, "generator");
    s.num_factors = get_or<int>(g, "num_factors", s.num_factors, "generator");
    s.max_scope = get_or<int>(g, "max_scope", s.max_scope, "generator");
    s.lo = get_or<double>(g, "lo", s.lo, "generator");
    s.hi = get_or<double>(g, "hi", s.hi, "generator");
    s.connected = get_or<bool>(g, "connected", s.connected, "generator");
    return random_graph(s, get_or<std::uint64_t>(g, "seed", seed, "generator"));
  }
  if (kind == "markowitz") {
    check_keys(g, {"kind", "lambda", "penalty"}, "generator");
    MarkowitzParams m;
    m.lambda = get_or<double>(g, "lambda", m.lambda, "generator");
    m.penalty = get_or<double>(g, "penalty", m.penalty, "generator");
    return markowitz_fixture(m);
  }
  if (kind == "star") {
    check_keys(g, {"kind", "n_b", "n_g", "r", "reach", "stride", "seed"}, "generator");
    StarInstance s = star_boundary_instance(get_or<int>(g, "n_b", 2, "generator"), get_or<int>(g, "n_g", 2, "generator"),
                                            get_or<int>(g, "r", 1, "generator"),
                                            get_or<std::uint64_t>(g, "seed", seed, "generator"),
                                            get_or<int>(g, "reach", -1, "generator"),
                                            get_or<int>(g, "stride", 1, "generator"));
    p.boundary = s.boundary;
    p.boundary_given = true;
    p.graph = s.graph;
    return s.graph;
  }
  if (kind == "policy_family") {
    check_keys(g, {"kind", "b0", "b1", "s0", "s1", "r", "seed"}, "generator");
    PolicyFamilyInstance a = policy_family_instance(
        get_or<int>(g, "b0", 5, "generator"), get_or<int>(g, "b1", 0, "generator"), get_or<int>(g, "s0", 1, "generator"),
        get_or<int>(g, "s1", 1, "generator"), get_or<int>(g, "r", 3, "generator"),
        get_or<std::uint64_t>(g, "seed", seed, "generator"));
    p.graph = a.graph;
    p.tree = a.tree;
    p.boundary = a.tree.nodes.at(0).boundary;
    p.boundary_given = true;
    return a.graph;
  }
  throw ConfigError("generator.kind must be random, markowitz, star or policy_family");
}

}  // namespace

Problem load_problem(const json& spec, std::uint64_t seed) {
  Problem p;
  const bool has_instance = spec.contains("instance");
  const bool has_generator = spec.contains("generator");
  if (has_instance == has_generator) throw ConfigError("exactly one of 'instance' or 'generator' is required");
  bool pre_normalized = false;
  if (has_instance) {
    const json& inst = spec.at("instance");
    if (inst.is_string()) {
      p.source = inst.get<std::string>();
      p.original = graph_from_json(slurp(p.source));
    } else {
      p.source = "inline";
      p.original = graph_from_json(inst.dump());
    }
  } else {
    p.original = generate(spec.at("generator"), seed, p);
    p.source = "generator:" + spec.at("generator").at("kind").get<std::string>();
    pre_normalized = p.boundary_given;  // star and policy_family are built normalized
  }
  const bool normalize_flag = spec.value("normalize", true);
  if (!pre_normalized) {
    if (normalize_flag) {
      Normalized n = normalize(p.original);
      p.graph = std::move(n.graph);
      p.record = std::move(n.record);
    } else {
      if (!p.original.is_binary()) throw ConfigError("normalize=false requires a binary instance");
      p.graph = p.original;
    }
  }

  if (spec.contains("boundary")) {
    const json& b = spec.at("boundary");
    if (b.is_string()) {
      if (b.get<std::string>() != "auto") throw ConfigError("boundary must be a list of variable ids or \"auto\"");
      int parts = spec.value("parts", 2);
      SeparatorResult r = suggest_boundary(p.graph, parts, seed);
      if (!r.found) throw DecompositionInfeasible("no separator with " + std::to_string(parts) + " parts found");
      p.boundary = r.boundary;
    } else if (b.is_array()) {
      p.boundary = map_boundary_ids(p, b.get<std::vector<int>>());
    } else {
      throw ConfigError("boundary must be a list of variable ids or \"auto\"");
    }
    p.boundary_given = true;
  }
  std::sort(p.boundary.begin(), p.boundary.end());
  return p;
}

std::vector<int> map_boundary_ids(const Problem& p, const std::vector<int>& ids) {
  std::vector<int> out;
  if (!p.record) {
    for (int id : ids) {
      int v = p.graph.index_of(id);
      if (v < 0) throw ConfigError("boundary: unknown variable id " + std::to_string(id));
      out.push_back(v);
    }
    return out;
  }
  for (int id : ids) {
    int v = p.original.index_of(id);
    if (v < 0) throw ConfigError("boundary: unknown variable id " + std::to_string(id));
    for (int b = 0; b < p.record->bits.at(v); ++b) out.push_back(p.record->first_bit.at(v) + b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<Assignment> decode_assignment(const Problem& p, const Assignment& xb) {
  if (!p.record) return xb;
  return p.record->decode(xb);
}

double recover_value(const Problem& p, double normalized_value) {
  return p.record ? p.record->recover(normalized_value) : normalized_value;
}

}  // namespace qfn::app
