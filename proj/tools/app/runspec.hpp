#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qfn/decompose.hpp"
#include "qfn/dist.hpp"
#include "qfn/fgraph.hpp"
#include "qfn/hier.hpp"
#include "qfn/network.hpp"
#include "qfn/primitives.hpp"

namespace qfn::app {

using nlohmann::json;

// Rejects keys outside `allowed` with a ConfigError naming the offending key and context.
void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where);

struct NetworkSpec {
  TopologyKind kind = TopologyKind::single_hop;
  int stretch = 1;
  bool coordinator_at_end = true;
  NetworkModel build(int num_workers) const;
};

NetworkSpec parse_network(const json& j);
PrecisionParams parse_params(const json& j, const PrecisionParams& base = {});
json params_to_json(const PrecisionParams& p);

// A loaded problem: the original graph, its normalized binary form and an optional tree.
struct Problem {
  FactorGraph original;
  FactorGraph graph;  // binary, normalized
  std::optional<NormalizationRecord> record;  // absent when the generator is already normalized
  std::vector<int> boundary;                  // binary variable indices of graph
  bool boundary_given = false;
  std::optional<DecompTree> tree;
  std::string source;
};

// Reads "instance" (path or inline object) or "generator", then "normalize" and "boundary".
Problem load_problem(const json& spec, std::uint64_t seed);

// Maps original variable ids to the binary variables that encode them.
std::vector<int> map_boundary_ids(const Problem& p, const std::vector<int>& ids);

// Original-graph assignment of a binary assignment, or nullopt if it decodes to an unused code.
std::optional<Assignment> decode_assignment(const Problem& p, const Assignment& xb);
double recover_value(const Problem& p, double normalized_value);

struct Tables {
  std::string header;
  std::vector<std::string> rows;
  std::string csv() const;
};

std::string slurp(const std::string& path);
void write_text(const std::string& path, const std::string& text);
bool ends_with(const std::string& s, const std::string& suffix);

}  // namespace qfn::app
