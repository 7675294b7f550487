#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qfn::app {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> details;  // one short line per sub-check
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::vector<int> criteria;  // empty = all ten
  std::uint64_t seed = 20240611;
  int jobs = 1;
  bool verbose = false;
  std::function<void(const std::string&)> log;  // progress lines, may be empty
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);
std::string criterion_name(int id);
// "PASS  [1] counter exactness (0.3 s)"
std::string summary_line(const CriterionResult& r);

}  // namespace qfn::app
