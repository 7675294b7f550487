#include "qfn/fgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"

namespace qfn {

namespace {

std::size_t table_size(const FactorGraph& g, const std::vector<int>& scope) {
  std::size_t n = 1;
  for (int v : scope) n *= static_cast<std::size_t>(g.cardinality(v));
  return n;
}

std::size_t table_index(const FactorGraph& g, const Factor& f, const Assignment& x) {
  std::size_t idx = 0;
  for (int v : f.scope) idx = idx * static_cast<std::size_t>(g.cardinality(v)) + static_cast<std::size_t>(x[v]);
  return idx;
}

int ceil_log2(int n) {
  int b = 0;
  while ((1 << b) < n) ++b;
  return b;
}

}  // namespace

int FactorGraph::add_variable(int cardinality, int id, std::string name) {
  if (cardinality < 1) throw ConfigError("variable cardinality must be positive");
  int v = num_vars();
  if (id < 0) id = v;
  if (index_of(id) >= 0) throw ConfigError("duplicate variable id " + std::to_string(id));
  card_.push_back(cardinality);
  ids_.push_back(id);
  names_.push_back(name.empty() ? "x" + std::to_string(id) : std::move(name));
  return v;
}

int FactorGraph::add_factor(std::vector<int> scope, std::vector<double> table, std::string name) {
  std::set<int> seen;
  for (int v : scope) {
    if (v < 0 || v >= num_vars()) throw ConfigError("factor scope references unknown variable");
    if (!seen.insert(v).second) throw ConfigError("factor scope has repeated variable");
  }
  if (table.size() != table_size(*this, scope))
    throw ConfigError("factor table size does not match scope cardinalities");
  factors_.push_back({std::move(scope), std::move(table), std::move(name)});
  return num_factors() - 1;
}

int FactorGraph::index_of(int id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  return it == ids_.end() ? -1 : static_cast<int>(it - ids_.begin());
}

std::vector<std::vector<int>> FactorGraph::var_factors() const {
  std::vector<std::vector<int>> adj(num_vars());
  for (int f = 0; f < num_factors(); ++f)
    for (int v : factors_[f].scope) adj[v].push_back(f);
  return adj;
}

bool FactorGraph::is_binary() const {
  return std::all_of(card_.begin(), card_.end(), [](int c) { return c <= 2; });
}

std::uint64_t FactorGraph::config_count() const {
  std::uint64_t n = 1;
  for (int c : card_) {
    if (n > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(c))
      return std::numeric_limits<std::uint64_t>::max();
    n *= static_cast<std::uint64_t>(c);
  }
  return n;
}

void FactorGraph::check_assignment(const Assignment& x) const {
  if (static_cast<int>(x.size()) != num_vars()) throw InvalidAssignment("assignment length mismatch");
  for (int v = 0; v < num_vars(); ++v)
    if (x[v] < 0 || x[v] >= card_[v])
      throw InvalidAssignment("symbol out of range for variable " + names_[v]);
}

double FactorGraph::factor_value(int f, const Assignment& x) const {
  const Factor& fa = factors_[f];
  return fa.table[table_index(*this, fa, x)];
}

double FactorGraph::evaluate(const Assignment& x) const {
  check_assignment(x);
  double s = 0.0;
  for (int f = 0; f < num_factors(); ++f) s += factor_value(f, x);
  return s;
}

double FactorGraph::sum_factors(const std::vector<int>& fs, const Assignment& x) const {
  double s = 0.0;
  for (int f : fs) s += factor_value(f, x);
  return s;
}

FactorGraph FactorGraph::fix_variable(int v, int value) const {
  if (v < 0 || v >= num_vars() || value < 0 || value >= card_[v])
    throw InvalidAssignment("fix_variable out of range");
  FactorGraph out;
  for (int u = 0; u < num_vars(); ++u) out.add_variable(u == v ? 1 : card_[u], ids_[u], names_[u]);
  for (const Factor& f : factors_) {
    auto pos = std::find(f.scope.begin(), f.scope.end(), v);
    if (pos == f.scope.end()) {
      out.add_factor(f.scope, f.table, f.name);
      continue;
    }
    // slice: iterate over output table entries, map to input index with x_v = value
    std::vector<double> t(table_size(out, f.scope));
    Assignment x(num_vars(), 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::size_t r = i;
      for (int k = static_cast<int>(f.scope.size()) - 1; k >= 0; --k) {
        int u = f.scope[k];
        int c = u == v ? 1 : card_[u];
        x[u] = static_cast<int>(r % static_cast<std::size_t>(c));
        r /= static_cast<std::size_t>(c);
      }
      x[v] = value;
      t[i] = f.table[table_index(*this, f, x)];
    }
    out.add_factor(f.scope, std::move(t), f.name);
  }
  return out;
}

Assignment NormalizationRecord::encode(const Assignment& x) const {
  int nb = first_bit.empty() ? 0 : first_bit.back() + bits.back();
  Assignment xb(nb, 0);
  for (std::size_t v = 0; v < bits.size(); ++v)
    for (int b = 0; b < bits[v]; ++b) xb[first_bit[v] + b] = (x[v] >> (bits[v] - 1 - b)) & 1;
  return xb;
}

std::optional<Assignment> NormalizationRecord::decode(const Assignment& xb) const {
  Assignment x(bits.size(), 0);
  for (std::size_t v = 0; v < bits.size(); ++v) {
    int code = 0;
    for (int b = 0; b < bits[v]; ++b) code = (code << 1) | xb[first_bit[v] + b];
    if (!valid[v][code]) return std::nullopt;
    x[v] = code;
  }
  return x;
}

Normalized normalize(const FactorGraph& g) {
  Normalized out;
  NormalizationRecord& rec = out.record;
  const int n = g.num_vars();
  rec.bits.resize(n);
  rec.first_bit.resize(n);
  rec.valid.resize(n);
  int next = 0;
  for (int v = 0; v < n; ++v) {
    int c = g.cardinality(v);
    rec.bits[v] = ceil_log2(c);
    rec.first_bit[v] = next;
    rec.valid[v].assign(std::size_t{1} << rec.bits[v], false);
    for (int s = 0; s < c; ++s) rec.valid[v][s] = true;
    for (int b = 0; b < rec.bits[v]; ++b)
      out.graph.add_variable(2, next + b, g.name(v) + (rec.bits[v] > 1 ? "." + std::to_string(b + 1) : ""));
    next += rec.bits[v];
  }
  for (const Factor& f : g.factors()) {
    rec.f_min.push_back(*std::min_element(f.table.begin(), f.table.end()));
    rec.f_max.push_back(*std::max_element(f.table.begin(), f.table.end()));
  }
  rec.s_range = 0.0;
  rec.offset = 0.0;
  for (std::size_t k = 0; k < rec.f_min.size(); ++k) {
    rec.s_range += rec.f_max[k] - rec.f_min[k];
    rec.offset += rec.f_min[k];
  }
  for (int fi = 0; fi < g.num_factors(); ++fi) {
    const Factor& f = g.factor(fi);
    std::vector<int> scope;
    for (int v : f.scope)
      for (int b = 0; b < rec.bits[v]; ++b) scope.push_back(rec.first_bit[v] + b);
    std::vector<double> t(std::size_t{1} << scope.size(), 0.0);
    for (std::size_t code = 0; code < t.size(); ++code) {
      // split the concatenated code into per-variable codes (first variable most significant)
      std::size_t r = code;
      std::size_t idx = 0;
      std::size_t mult = 1;
      bool ok = true;
      for (int k = static_cast<int>(f.scope.size()) - 1; k >= 0; --k) {
        int v = f.scope[k];
        int sym = static_cast<int>(r & ((std::size_t{1} << rec.bits[v]) - 1));
        r >>= rec.bits[v];
        if (!rec.valid[v][sym]) ok = false;
        idx += static_cast<std::size_t>(sym) * mult;
        mult *= static_cast<std::size_t>(g.cardinality(v));
      }
      // invalid codes take the f'_min value, i.e. normalized 0
      if (ok && rec.s_range > 0.0) t[code] = (f.table[idx] - rec.f_min[fi]) / rec.s_range;
    }
    out.graph.add_factor(std::move(scope), std::move(t), f.name);
  }
  return out;
}

MaxResult brute_force_max(const FactorGraph& g, std::uint64_t cap) {
  if (g.config_count() > cap)
    throw InstanceTooLarge("brute force over " + std::to_string(g.config_count()) +
                           " configurations exceeds cap " + std::to_string(cap));
  std::vector<int> all(g.num_factors());
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> vars(g.num_vars());
  std::iota(vars.begin(), vars.end(), 0);
  return conditioned_max(g, all, vars, Assignment(g.num_vars(), 0));
}

MaxResult conditioned_max(const FactorGraph& g, const std::vector<int>& factors,
                          const std::vector<int>& internal, const Assignment& x0) {
  Assignment x = x0;
  for (int v : internal) x[v] = 0;
  MaxResult best;
  best.value = -std::numeric_limits<double>::infinity();
  // odometer with the first listed variable most significant
  while (true) {
    double s = g.sum_factors(factors, x);
    if (s > best.value) {
      best.value = s;
      best.argmax = x;
    }
    int k = static_cast<int>(internal.size()) - 1;
    for (; k >= 0; --k) {
      int v = internal[k];
      if (++x[v] < g.cardinality(v)) break;
      x[v] = 0;
    }
    if (k < 0) break;
  }
  return best;
}

const std::vector<std::pair<int, int>>& markowitz_pairs() {
  static const std::vector<std::pair<int, int>> p{{1, 2}, {2, 3}, {3, 4}, {3, 5},
                                                  {5, 7}, {6, 7}, {7, 8}, {8, 9}};
  return p;
}

const std::vector<std::vector<int>>& markowitz_groups() {
  static const std::vector<std::vector<int>> gr{{1, 2, 3}, {3, 4, 5}, {5, 6, 7}, {7, 8, 9}};
  return gr;
}

FactorGraph markowitz_fixture(const MarkowitzParams& p) {
  if (p.mu.size() != 9 || p.sigma2.size() != 9 || p.cov.size() != 8 || p.w_lower.size() != 4 ||
      p.w_upper.size() != 4)
    throw ConfigError("markowitz fixture expects 9 assets, 8 covariance pairs, 4 constraints");
  double c = p.penalty;
  if (c < 0) {
    c = 0;
    for (double m : p.mu) c += std::fabs(m);
    c *= 10;
  }
  FactorGraph g;
  for (int i = 1; i <= 9; ++i) g.add_variable(2, i);
  for (int i = 0; i < 9; ++i)
    g.add_factor({i}, {0.0, p.mu[i] - p.lambda * p.sigma2[i]}, "h" + std::to_string(i + 1));
  const auto& pairs = markowitz_pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto [a, b] = pairs[k];
    g.add_factor({a - 1, b - 1}, {0.0, 0.0, 0.0, -2.0 * p.lambda * p.cov[k]},
                 "f" + std::to_string(a) + "," + std::to_string(b));
  }
  const auto& groups = markowitz_groups();
  for (std::size_t k = 0; k < groups.size(); ++k) {
    std::vector<int> scope;
    for (int a : groups[k]) scope.push_back(a - 1);
    std::vector<double> t(8);
    for (int code = 0; code < 8; ++code) {
      int s = __builtin_popcount(code);
      t[code] = (s >= p.w_lower[k] && s <= p.w_upper[k]) ? 0.0 : -c;
    }
    g.add_factor(scope, t, "C" + std::to_string(k + 1));
  }
  return g;
}

FactorGraph random_graph(const RandomGraphSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> card(2, std::max(2, spec.max_cardinality));
  std::uniform_real_distribution<double> val(spec.lo, spec.hi);
  FactorGraph g;
  for (int v = 0; v < spec.num_vars; ++v) g.add_variable(card(rng), v);
  auto make_table = [&](const std::vector<int>& scope) {
    std::size_t n = 1;
    for (int v : scope) n *= static_cast<std::size_t>(g.cardinality(v));
    std::vector<double> t(n);
    for (double& x : t) x = val(rng);
    return t;
  };
  int made = 0;
  if (spec.connected) {
    for (int v = 0; v + 1 < spec.num_vars && made < spec.num_factors; ++v, ++made) {
      std::vector<int> scope{v, v + 1};
      g.add_factor(scope, make_table(scope));
    }
  }
  std::uniform_int_distribution<int> pick(0, spec.num_vars - 1);
  std::uniform_int_distribution<int> size(1, std::max(1, std::min(spec.max_scope, spec.num_vars)));
  for (; made < spec.num_factors; ++made) {
    int k = size(rng);
    std::set<int> s;
    while (static_cast<int>(s.size()) < k) s.insert(pick(rng));
    std::vector<int> scope(s.begin(), s.end());
    g.add_factor(scope, make_table(scope));
  }
  return g;
}

FactorGraph graph_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed instance JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("variables") || !j.contains("factors"))
    throw ConfigError("instance JSON needs \"variables\" and \"factors\"");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "variables" && it.key() != "factors")
      throw ConfigError("unknown instance key \"" + it.key() + "\"");
  FactorGraph g;
  try {
    for (const auto& v : j.at("variables")) {
      for (auto it = v.begin(); it != v.end(); ++it)
        if (it.key() != "id" && it.key() != "cardinality" && it.key() != "name")
          throw ConfigError("unknown variable key \"" + it.key() + "\"");
      g.add_variable(v.at("cardinality").get<int>(), v.at("id").get<int>(), v.value("name", std::string{}));
    }
    for (const auto& f : j.at("factors")) {
      for (auto it = f.begin(); it != f.end(); ++it)
        if (it.key() != "scope" && it.key() != "table" && it.key() != "name")
          throw ConfigError("unknown factor key \"" + it.key() + "\"");
      std::vector<int> scope;
      for (int id : f.at("scope").get<std::vector<int>>()) {
        int v = g.index_of(id);
        if (v < 0) throw ConfigError("factor scope references unknown id " + std::to_string(id));
        scope.push_back(v);
      }
      g.add_factor(scope, f.at("table").get<std::vector<double>>(), f.value("name", std::string{}));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("instance JSON schema error: ") + e.what());
  }
  return g;
}

std::string graph_to_json(const FactorGraph& g) {
  using nlohmann::json;
  json j;
  j["variables"] = json::array();
  for (int v = 0; v < g.num_vars(); ++v)
    j["variables"].push_back({{"id", g.id(v)}, {"cardinality", g.cardinality(v)}, {"name", g.name(v)}});
  j["factors"] = json::array();
  for (const Factor& f : g.factors()) {
    std::vector<int> ids;
    for (int v : f.scope) ids.push_back(g.id(v));
    json jf{{"scope", ids}, {"table", f.table}};
    if (!f.name.empty()) jf["name"] = f.name;
    j["factors"].push_back(jf);
  }
  return j.dump(2);
}

}  // namespace qfn
