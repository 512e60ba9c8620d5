#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nilflow/version.hpp"
#include "runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nilflow-lab: batch experiments on Heisenberg nilflows"};
  app.set_version_flag("--version", std::string(nilflow::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  int threads = 0;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON configuration file");
    sub->add_option("--out", out, "output directory (NILFLOW_OUT overrides the default)");
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };
  const auto experiments = nilflow::lab::schema()["experiments"];
  for (const auto& kind : nilflow::lab::experiment_kinds())
    add_common(app.add_subcommand(kind, experiments[kind].value("doc", std::string())));
  auto* schema_cmd = app.add_subcommand("schema", "write schema.json describing configs and CSV columns");
  schema_cmd->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("NILFLOW_OUT"); env && *env) {
    bool explicit_out = false;
    for (auto* sub : app.get_subcommands())
      if (sub->count("--out")) explicit_out = true;
    if (!explicit_out) out = env;
  }

  auto* sub = app.get_subcommands().front();
  if (sub == schema_cmd) {
    std::filesystem::create_directories(out);
    std::ofstream(std::filesystem::path(out) / "schema.json") << nilflow::lab::schema().dump(2) << '\n';
    return 0;
  }
  nilflow::lab::RunOptions opt;
  opt.out_dir = out;
  if (sub->count("--seed")) opt.seed = seed;
  opt.threads = threads;
  opt.quiet = quiet;
  return nilflow::lab::run_experiment_file(sub->get_name(), config, opt, std::cerr);
}
