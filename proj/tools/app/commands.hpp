#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "runspec.hpp"

namespace qfn::app {

// Flags shared by every subcommand; set values override the config file.
struct Flags {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::optional<std::string> mode;
  std::optional<std::string> readout;
  bool dump_state = false;
  std::optional<std::string> out;
};

enum ExitCode { kOk = 0, kAcceptanceFail = 1, kConfigError = 2, kResourceOverflow = 3 };

int cmd_solve(const json& spec, const Flags& f);
int cmd_find_config(const json& spec, const Flags& f);
int cmd_decompose(const json& spec, const Flags& f);
int cmd_hier(const json& spec, const Flags& f);
int cmd_sweep(const json& spec, const Flags& f);
int cmd_verify(const json& spec, const Flags& f);

// Result document of one a_dist run (shared by solve and find-config).
json dist_result_json(const Problem& p, const DistRunConfig& cfg, const DistResult& r, bool dump_state);
std::string dist_csv_header();
std::string dist_csv_row(const DistRunConfig& cfg, const DistResult& r);

}  // namespace qfn::app
