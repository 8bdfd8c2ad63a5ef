// two_transport: validate cocycle files and compute path transport, surface
// transport and surface holonomy from the command line.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "two_transport/cli.hpp"

int main(int argc, char** argv) {
  using namespace two_transport;
  CLI::App app{"Parallel transport and surface holonomy for differential cocycles"};
  app.require_subcommand(1);
  app.fallthrough();

  cli::GlobalOptions g;
  app.add_option("--fd-step", g.fd_step, "Finite-difference step for derivatives")->check(CLI::PositiveNumber);
  app.add_option("--tol", g.tol, "Validation tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed recorded in the report");
  app.add_flag("--quiet", g.quiet, "Print results only");

  std::string cocycle, path, bigon, surface, method = "lattice";
  int steps = 400, cells = 64;
  std::optional<int> holonomy_cells;
  std::vector<std::string> checks;
  std::vector<int> cells_list = {16, 32, 64, 128};

  CLI::App* validate = app.add_subcommand("validate", "Check every cocycle clause");
  validate->add_option("cocycle", cocycle, "Cocycle file")->required()->check(CLI::ExistingFile);

  CLI::App* tpath = app.add_subcommand("transport-path", "Parallel transport along a path");
  tpath->add_option("cocycle", cocycle, "Cocycle file")->required()->check(CLI::ExistingFile);
  tpath->add_option("path", path, "Path file")->required()->check(CLI::ExistingFile);
  tpath->add_option("--steps", steps, "RK4 steps per patch segment")->check(CLI::PositiveNumber);

  CLI::App* tsurf = app.add_subcommand("transport-surface", "Surface transport along a bigon");
  tsurf->add_option("cocycle", cocycle, "Cocycle file")->required()->check(CLI::ExistingFile);
  tsurf->add_option("bigon", bigon, "Bigon file")->required()->check(CLI::ExistingFile);
  tsurf->add_option("--cells", cells, "Cells per side (lattice) or lanes (ode)")->check(CLI::PositiveNumber);
  tsurf->add_option("--method", method, "ode or lattice")->check(CLI::IsMember({"ode", "lattice"}));
  tsurf->add_option("--steps", steps, "RK4 steps for the target path")->check(CLI::PositiveNumber);

  CLI::App* hol = app.add_subcommand("holonomy", "Surface holonomy of a closed surface");
  hol->add_option("cocycle", cocycle, "Cocycle file")->required()->check(CLI::ExistingFile);
  hol->add_option("surface", surface, "Surface file")->required()->check(CLI::ExistingFile);
  hol->add_option("--cells", holonomy_cells, "Cells per side, overriding the surface file")->check(CLI::PositiveNumber);
  hol->add_option("--check", checks, "base-point, loop-change, contraction or oracle (repeatable)")
      ->check(CLI::IsMember({"base-point", "loop-change", "contraction", "oracle"}));

  CLI::App* cmp = app.add_subcommand("compare-oracle", "ODE against lattice surface transport over a range of N");
  cmp->add_option("cocycle", cocycle, "Cocycle file")->required()->check(CLI::ExistingFile);
  cmp->add_option("bigon", bigon, "Bigon file")->required()->check(CLI::ExistingFile);
  cmp->add_option("--cells-list", cells_list, "Cell counts")->delimiter(',')->check(CLI::PositiveNumber);
  cmp->add_option("--steps", steps, "RK4 steps for the target paths")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cli::cmd_validate(std::cout, cocycle, g);
    if (*tpath) return cli::cmd_transport_path(std::cout, cocycle, path, steps, g);
    if (*tsurf) return cli::cmd_transport_surface(std::cout, cocycle, bigon, cells, method, steps, g);
    if (*hol) return cli::cmd_holonomy(std::cout, cocycle, surface, holonomy_cells, checks, g);
    if (*cmp) return cli::cmd_compare_oracle(std::cout, cocycle, bigon, cells_list, steps, g);
  } catch (const std::exception& e) {
    std::cout.flush();
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
