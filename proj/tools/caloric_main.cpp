#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "caloric/cli.hpp"
#include "caloric/errors.hpp"
#include "caloric/parallel.hpp"

int main(int argc, char** argv) {
  using namespace caloric;
  CLI::App app{"Caloric gauge and energy spectral density tools for wave maps into hyperbolic space"};
  app.require_subcommand(1, 1);
  std::string config_file, preset, out_dir = "out";
  std::vector<std::string> sets;
  int jobs = 1;
  bool list_keys = false;
  for (const char* name : {"simulate", "heatflow", "esd", "verify", "localize"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_file, "key=value configuration file");
    sub->add_option("--preset", preset, "named fixture applied before the file and --set");
    sub->add_option("--set", sets, "override, key=value (repeatable)");
    sub->add_option("--jobs", jobs, "worker threads for stencil bands")->check(CLI::Range(1, 256));
    sub->add_option("--out", out_dir, "output directory");
  }
  app.add_flag("--keys", list_keys, "list configuration keys and exit");
  app.require_subcommand(list_keys ? 0 : 1, 1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }
  if (list_keys) {
    for (const auto& k : cli::key_specs()) std::cout << k.name << " = " << k.fallback << "    # " << k.help << "\n";
    return 0;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  cli::RunConfig cfg;
  try {
    if (!preset.empty()) cfg.apply_preset(preset);
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& s : sets) cfg.set_assignment(s);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  }
  set_jobs(jobs);
  std::string error;
  cli::RunSummary summary;
  const int code = cli::run_command(command, cfg, out_dir, &error, &summary);
  if (code == 0 || code == 2) std::cout << cli::summary_text(summary);
  if (!error.empty()) std::cerr << error << "\n";
  return code;
}
