#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "udw/commands.hpp"

namespace {

// UDW_THREADS and UDW_OUT_DIR stand in when the flags are absent.
void apply_environment(udw::RunOptions& o, bool threads_given, bool out_given) {
  if (const char* t = std::getenv("UDW_THREADS"); t && !threads_given) {
    try {
      o.threads = std::stoi(t);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring UDW_THREADS='" << t << "'\n";
    }
  }
  if (const char* d = std::getenv("UDW_OUT_DIR"); d && *d && !out_given) o.out_dir = d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum spin Hall edge device and detector channel simulator"};
  app.require_subcommand(1);

  udw::RunOptions opts;
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config,-c", config, "configuration file")->required();
    sub->add_option("--out-dir,-o", out_dir, "directory for output files");
    sub->add_option("--threads,-j", threads, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--seed", seed, "random seed (overrides solver.seed)");
  };

  auto* simulate = app.add_subcommand("simulate", "interior eigenpairs, density and spin maps");
  add_common(simulate, true);
  auto* bands = app.add_subcommand("bands", "ribbon band structure and edge velocity");
  add_common(bands, true);
  auto* channel = app.add_subcommand("channel", "coherent information sweep");
  add_common(channel, true);
  auto* oracle = app.add_subcommand("oracle", "truncated Fock space reference run");
  add_common(oracle, true);
  auto* constraints = app.add_subcommand("constraints", "ESR table and switching-time scenarios");
  add_common(constraints, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : udw::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  opts.out_dir = out_dir;
  opts.threads = threads;
  apply_environment(opts, sub->count("--threads") > 0, sub->count("--out-dir") > 0);
  if (sub->count("--seed") > 0) opts.seed = seed;
  if (opts.threads < 1) opts.threads = 1;
  return udw::run_command(sub->get_name(), config, opts);
}
