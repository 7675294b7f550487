#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "app/commands.hpp"

using namespace qfn;
using namespace qfn::app;

int main(int argc, char** argv) {
  CLI::App cli{"qfn: distributed max-sum search on a simulated quantum network"};
  cli.require_subcommand(1);

  std::string config;
  Flags flags;
  std::uint64_t seed = 0;
  std::string mode, readout, out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,-c", config, "run-config JSON file");
    sub->add_option("--seed", seed, "RNG seed (overrides the config)");
    sub->add_option("--jobs,-j", flags.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--mode", mode, "simulator mode")->check(CLI::IsMember({"compact", "faithful"}));
    sub->add_option("--readout", readout, "final readout")->check(CLI::IsMember({"sample", "argmax"}));
    sub->add_flag("--dump-state", flags.dump_state, "include the q_p,c marginal and U_ini class weights");
    sub->add_option("--out,-o", out, "output path (.csv or .json)");
  };

  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const json&, const Flags&);
  };
  const Cmd cmds[] = {
      {"solve", "run A_dist on an instance", cmd_solve},
      {"find-config", "recover a maximizing assignment by self-reduction", cmd_find_config},
      {"decompose", "print a boundary split and its qubit table, or build a tree", cmd_decompose},
      {"hier", "run hierarchical policies over a decomposition tree", cmd_hier},
      {"sweep", "emit a query, topology, diameter or policy sweep as CSV", cmd_sweep},
      {"verify", "run the acceptance suite", cmd_verify},
  };
  std::vector<std::pair<CLI::App*, const Cmd*>> subs;
  for (const Cmd& c : cmds) {
    CLI::App* sub = cli.add_subcommand(c.name, c.help);
    add_common(sub);
    subs.emplace_back(sub, &c);
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return kConfigError;
  }

  try {
    for (auto& [sub, c] : subs) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed")) flags.seed = seed;
      if (!mode.empty()) flags.mode = mode;
      if (!readout.empty()) flags.readout = readout;
      if (!out.empty()) flags.out = out;
      json spec;
      if (!config.empty()) spec = json::parse(slurp(config));
      return c->fn(spec, flags);
    }
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ResourceOverflow& e) {
    std::cerr << "resource overflow: " << e.what() << "\n";
    return kResourceOverflow;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}
