#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "cmlab/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Code-mixed corpus analysis and positional-encoding experiments"};
  app.require_subcommand(1, 1);
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  for (const auto& name : cmlab::cli::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--seed", seed, "Root seed, overrides the config");
    sub->add_option("--out", out, "Output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cmlab::cli::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return cmlab::cli::run_cli(command, config, seed, out, std::cerr);
}
