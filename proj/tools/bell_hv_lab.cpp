// Batch experiment runner: dispatches a config file to one of the lab's
// commands and writes reproducible JSON/CSV reports.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bellhv/cli_runner.hpp"
#include "bellhv/version.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Bell experiment lab for hidden-variables models that may "
               "violate Measurement Independence"};
  app.set_version_flag("--version", std::string(bellhv::kArtifactVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed_override;
  bool require_certified = false;

  const char* commands[] = {"chsh",    "chain",  "equiprob",
                            "certify", "signal", "schulman-check"};
  for (const char* name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Path to the JSON run config")
        ->required();
    sub->add_option("--seed", seed_override,
                    "Override the config's 64-bit seed");
    sub->add_option("--output-dir", output_dir,
                    "Directory for report files (default: .)");
    sub->add_flag("--require-certified", require_certified,
                  "Exit with status 3 unless the verdict is "
                  "signalling_certified (certify only)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    bellhv::Json config;
    try {
      config = bellhv::Json::parse(bellhv::read_text_file(config_path));
    } catch (const std::exception& e) {
      std::cerr << "error: cannot read config " << config_path << ": "
                << e.what() << "\n";
      return bellhv::kExitValidation;
    }

    const bellhv::RunResult result =
        bellhv::run_command(command, config, seed_override, require_certified);

    fs::create_directories(output_dir);
    const fs::path report_path = fs::path(output_dir) / result.report_filename;
    bellhv::write_text_file(report_path,
                            bellhv::canonical_dump(result.report));
    std::cout << report_path.string() << "\n";
    for (const auto& [name, content] : result.extra_files) {
      const fs::path extra_path = fs::path(output_dir) / name;
      bellhv::write_text_file(extra_path, content);
      std::cout << extra_path.string() << "\n";
    }
    return result.exit_status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bellhv::kExitValidation;
  }
}
