#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qfn/common.hpp"

namespace qfn {

// Per-variable symbol indices, indexed by dense variable index.
using Assignment = std::vector<int>;

struct Factor {
  std::vector<int> scope;     // dense variable indices, distinct
  std::vector<double> table;  // mixed radix, first scope variable most significant
  std::string name;
};

class FactorGraph {
 public:
  int add_variable(int cardinality, int id = -1, std::string name = {});
  int add_factor(std::vector<int> scope, std::vector<double> table, std::string name = {});

  int num_vars() const { return static_cast<int>(card_.size()); }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  int cardinality(int v) const { return card_.at(v); }
  int id(int v) const { return ids_.at(v); }
  const std::string& name(int v) const { return names_.at(v); }
  int index_of(int id) const;  // -1 if absent
  const Factor& factor(int f) const { return factors_.at(f); }
  const std::vector<Factor>& factors() const { return factors_; }
  const std::vector<int>& cardinalities() const { return card_; }

  // factor indices touching each variable
  std::vector<std::vector<int>> var_factors() const;
  bool is_binary() const;
  // product of cardinalities, saturating at UINT64_MAX
  std::uint64_t config_count() const;

  void check_assignment(const Assignment& x) const;
  double factor_value(int f, const Assignment& x) const;
  double evaluate(const Assignment& x) const;
  double sum_factors(const std::vector<int>& fs, const Assignment& x) const;

  // Same graph with variable v restricted to one symbol: cardinality becomes 1 and
  // tables are sliced. Ids and indices are kept.
  FactorGraph fix_variable(int v, int value) const;

 private:
  std::vector<int> card_;
  std::vector<int> ids_;
  std::vector<std::string> names_;
  std::vector<Factor> factors_;
};

struct NormalizationRecord {
  std::vector<double> f_min;  // per factor, over valid encodings
  std::vector<double> f_max;
  double s_range = 0.0;
  double offset = 0.0;        // sum of f_min
  std::vector<int> bits;      // per original variable
  std::vector<int> first_bit; // dense index of the first binary variable
  std::vector<std::vector<bool>> valid;  // per original variable, 2^bits flags

  Assignment encode(const Assignment& x) const;
  std::optional<Assignment> decode(const Assignment& xb) const;
  double recover(double ghat) const { return s_range * ghat + offset; }
};

struct Normalized {
  FactorGraph graph;
  NormalizationRecord record;
};

Normalized normalize(const FactorGraph& g);

struct MaxResult {
  double value = 0.0;
  Assignment argmax;
};

constexpr std::uint64_t kDefaultBruteForceCap = std::uint64_t{1} << 24;

// Exhaustive maximum, lexicographically smallest maximizer (variable 0 most significant).
MaxResult brute_force_max(const FactorGraph& g, std::uint64_t cap = kDefaultBruteForceCap);

// Max over `internal` of the sum of `factors`, all other variables taken from `x`.
MaxResult conditioned_max(const FactorGraph& g, const std::vector<int>& factors,
                          const std::vector<int>& internal, const Assignment& x);

struct MarkowitzParams {
  std::vector<double> mu{0.30, 0.25, 0.40, 0.20, 0.35, 0.15, 0.45, 0.10, 0.28};
  std::vector<double> sigma2{0.10, 0.08, 0.15, 0.06, 0.12, 0.05, 0.20, 0.04, 0.09};
  // covariances for the pairs (1,2),(2,3),(3,4),(3,5),(5,7),(6,7),(7,8),(8,9)
  std::vector<double> cov{0.03, 0.04, 0.02, 0.05, 0.06, 0.02, 0.04, 0.01};
  double lambda = 0.5;
  std::vector<int> w_lower{0, 0, 0, 0};
  std::vector<int> w_upper{2, 2, 2, 2};
  double penalty = -1.0;  // negative -> 10 * sum |mu|
};

const std::vector<std::pair<int, int>>& markowitz_pairs();
const std::vector<std::vector<int>>& markowitz_groups();
FactorGraph markowitz_fixture(const MarkowitzParams& p = {});

struct RandomGraphSpec {
  int num_vars = 6;
  int max_cardinality = 2;
  int num_factors = 6;
  int max_scope = 2;
  double lo = -1.0;
  double hi = 1.0;
  bool connected = true;  // add a chain of pairwise factors first
};
FactorGraph random_graph(const RandomGraphSpec& spec, std::uint64_t seed);

// JSON instance format: {"variables":[{"id","cardinality"}], "factors":[{"scope":[ids],"table":[...]}]}
FactorGraph graph_from_json(const std::string& text);
std::string graph_to_json(const FactorGraph& g);

}  // namespace qfn
