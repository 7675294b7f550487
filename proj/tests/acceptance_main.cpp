#include <cstdlib>
#include <iostream>
#include <string>

#include "app/acceptance.hpp"

// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  qfn::app::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) opt.criteria.push_back(std::atoi(argv[i]));
  if (const char* j = std::getenv("QFN_JOBS")) opt.jobs = std::max(1, std::atoi(j));
  bool all = true;
  for (int id : opt.criteria.empty() ? std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10} : opt.criteria) {
    auto r = qfn::app::run_criterion(id, opt);
    all = all && r.pass;
    std::cout << qfn::app::summary_line(r) << "\n";
    for (const auto& d : r.details) std::cout << "      " << d << "\n";
    std::cout.flush();
  }
  return all ? 0 : 1;
}
