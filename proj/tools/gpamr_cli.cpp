// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>

#include "gpamr/driver.hpp"
#include "gpamr/problem.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bar-based topology optimization with quadtree mesh adaptation"};
  app.require_subcommand(1);

  std::string config_arg;
  gpamr::RunOptions opts;

  auto* run_cmd = app.add_subcommand("run", "Run an optimization from a config file or preset");
  run_cmd->add_option("config", config_arg, "Config JSON path, or preset name (mbb, lbracket)")
      ->required();
  run_cmd->add_flag("--full-resolution", opts.full_resolution,
                    "Globally refine the coarsest mesh upfront and skip per-iteration "
                    "adaptation");
  run_cmd->add_option("--threads", opts.threads, "Worker thread cap")->default_val(1);
  run_cmd->add_option("--out", opts.out_dir, "Output directory (overrides the config)");
  run_cmd->add_option("--max-iters", opts.max_iterations,
                      "Iteration cap (overrides the config)");

  std::string preset_name;
  std::string dump_path;
  auto* dump_cmd = app.add_subcommand("dump-config", "Print a built-in preset as JSON");
  dump_cmd->add_option("preset", preset_name, "Preset name (mbb, lbracket)")->required();
  dump_cmd->add_option("-o,--output", dump_path, "Write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dump_cmd->parsed()) {
      const auto config = gpamr::load_config(preset_name);
      if (dump_path.empty()) {
        std::cout << gpamr::to_json_string(config) << '\n';
      } else {
        gpamr::save_config(config, dump_path);
      }
      return 0;
    }

    const auto config = gpamr::load_config(config_arg);
    const auto result = gpamr::run(config, opts);
    std::printf("%s after %d iterations: objective %.6g, constraint %+.4g, %d cells\n",
                result.converged ? "converged" : "stopped at the iteration cap",
                result.iterations, result.objective, result.constraint,
                result.final_cells);
    std::printf("outputs in %s\n", result.output_dir.string().c_str());
    return result.converged ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
