#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "bchain/errors.hpp"
#include "bchain/io.hpp"
#include "config.hpp"
#include "experiments.hpp"

namespace {

enum Exit { ok = 0, failure = 1, schema = 2, numeric = 3, resource = 4, halted = 75 };

int thread_count(int flag, const nlohmann::json& body) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("BCHAIN_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
    std::cerr << "warning: ignoring BCHAIN_THREADS=" << env << "\n";
  }
  if (body.contains("threads")) return body["threads"].get<int>();
  return 1;
}

int run(const std::string& config, const std::string& out, int threads, bool resume, long halt) {
  using namespace bchain;
  try {
    const cli::ExperimentConfig cfg = cli::load_config(config);
    cli::RunOptions ro;
    ro.out_dir = !out.empty() ? out : cfg.body.value("output_dir", std::string());
    if (ro.out_dir.empty()) throw cli::ConfigError("no output directory: pass --out or set output_dir");
    ro.threads = thread_count(threads, cfg.body);
    ro.resume = resume;
    ro.halt_after_step = halt;
    const std::string base = std::filesystem::absolute(config).parent_path().string();
    cli::run_experiment(cfg, ro, base);
    std::cout << cfg.experiment << ": wrote " << ro.out_dir << "/manifest.json\n";
    return ok;
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error:\n" << e.what() << "\n";
    return schema;
  } catch (const ValidationError& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return schema;
  } catch (const cli::Interrupted& e) {
    std::cerr << e.what() << "\n";
    return halted;
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return numeric;
  } catch (const ResourceError& e) {
    std::cerr << "resource budget exceeded: " << e.what() << "\n";
    return resource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failure;
  }
}

int validate(const std::string& config) {
  std::string text;
  try {
    text = bchain::io::read_file(config);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return schema;
  }
  const auto errors = bchain::cli::validate_text(text);
  for (const auto& e : errors) std::cout << e << "\n";
  return errors.empty() ? ok : schema;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boson chain experiments: TEBD, free-boson folding, kicked condensates"};
  app.require_subcommand(1);

  std::string config, out;
  int threads = 0;
  bool resume = false;
  long halt = -1;

  auto* run_cmd = app.add_subcommand("run", "run one experiment config");
  run_cmd->add_option("--config", config, "experiment JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "output directory (overrides output_dir)");
  run_cmd->add_option("--threads", threads, "worker threads (overrides BCHAIN_THREADS)")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--resume", resume, "continue from the checkpoint in the output directory");
  run_cmd->add_option("--halt-after-step", halt, "stop at the first checkpoint past this sweep")->group("");

  auto* val_cmd = app.add_subcommand("validate", "check a config without running it");
  val_cmd->add_option("--config", config, "experiment JSON")->required();

  app.add_subcommand("list-experiments", "print the experiment names");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return run(config, out, threads, resume, halt);
  if (val_cmd->parsed()) return validate(config);
  for (const auto& n : bchain::cli::experiment_names()) std::cout << n << "\n";
  return ok;
}
