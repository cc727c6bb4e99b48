#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "sllg/cli/runner.hpp"
#include "sllg/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stochastic LLG simulation and diagnostics"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t workers = 0;

  for (const auto& name : sllg::cli::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override noise.seed");
    sub->add_option("--out", out_dir, "Override output.directory");
    sub->add_option("--workers", workers, "Worker threads (default: SLLG_WORKERS or 1)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : sllg::cli::kExitConfig;
  }

  sllg::cli::RunContext ctx;
  ctx.subcommand = app.get_subcommands().front()->get_name();
  ctx.log = &std::cerr;
  const auto* sub = app.get_subcommands().front();
  try {
    ctx.cfg = sllg::cli::load_config(config_path);
    if (sub->count("--seed") > 0) ctx.cfg.seed = seed;
    if (sub->count("--out") > 0) ctx.cfg.output_directory = out_dir;
    ctx.workers = sub->count("--workers") > 0 ? workers : sllg::worker_count_from_env();
    if (ctx.workers == 0) throw sllg::ConfigError("--workers must be positive");
    const int rc = sllg::cli::run(ctx);
    std::cerr << ctx.subcommand << (rc == 0 ? ": ok" : ": check failed") << " -> " << ctx.cfg.output_directory << "\n";
    return rc;
  } catch (const sllg::GateError& e) {
    std::cerr << "gate: " << e.what() << " (admissible limit " << e.limit() << ")\n";
    return sllg::cli::kExitGate;
  } catch (const sllg::BlowUpError& e) {
    std::cerr << "blow-up at t = " << e.time() << ": " << e.what() << "\n";
    return sllg::cli::kExitBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sllg::cli::kExitConfig;
  }
}
