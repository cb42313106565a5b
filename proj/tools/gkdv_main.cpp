#include <iostream>

#include "CLI11.hpp"

#include "gkdv/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gKdV multi-soliton construction"};
  app.require_subcommand(1, 1);

  gkdv::CommandArgs args;
  std::string out;
  std::size_t threads = 0;
  const char* commands[][2] = {
      {"profile", "ground-state profiles, masses and criticality"},
      {"spectrum", "edge eigenpair e0, eta0 and dual eigenfunctions"},
      {"coercivity", "constrained minima of the linearized quadratic form"},
      {"evolve", "integrate the equation from a sum of solitons"},
      {"construct", "shoot for the unstable-mode data and run backward to T0"},
      {"verify", "run the acceptance criteria"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", args.config, "JSON run configuration")->required();
    sub->add_option("--out", out, "output directory (default: config output)");
    sub->add_option("--threads", threads, "worker threads (overrides GKDV_THREADS)")
        ->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : gkdv::kExitConfig;
  }
  args.command = app.get_subcommands().front()->get_name();
  if (!out.empty()) args.out = out;
  if (threads > 0) args.threads = threads;
  return gkdv::dispatch(args, std::cout, std::cerr);
}
