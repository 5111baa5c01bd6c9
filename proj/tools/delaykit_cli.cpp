#include "delaykit/config.hpp"
#include "delaykit/error.hpp"
#include "delaykit/runner.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::int64_t seed = -1;
  unsigned threads = 0;
};

void add_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", flags.out, "output directory (overrides `outputs`)");
  cmd->add_option("--seed", flags.seed, "base seed (overrides `seed`)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", flags.threads, "worker threads, 0 = auto");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-coordinate embedding diagnostics"};
  app.set_version_flag("--version", std::string(delaykit::kVersion));
  app.require_subcommand(1);

  Flags flags;
  auto* lemma = app.add_subcommand("lemma-check", "soft-rank of every basis-state pair of a shift system vs. M/2");
  auto* scaling = app.add_subcommand("scaling", "median conditioning against the number of delays");
  auto* report = app.add_subcommand("report", "full embedding report for one M");
  for (auto* cmd : {lemma, scaling, report}) add_flags(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : delaykit::kExitError;
  }

  try {
    const delaykit::ExperimentConfig config = delaykit::load_config(flags.config);
    delaykit::RunOptions options;
    if (!flags.out.empty()) options.out_dir = flags.out;
    if (flags.seed >= 0) options.seed = static_cast<std::uint64_t>(flags.seed);
    options.threads = flags.threads;

    delaykit::RunResult result;
    if (lemma->parsed()) {
      result = delaykit::run_lemma_check(config, options);
    } else if (scaling->parsed()) {
      result = delaykit::run_scaling_study(config, options);
    } else {
      result = delaykit::run_full_report(config, options);
    }
    for (const auto& line : result.messages) std::cout << line << '\n';
    std::cout << "wrote " << result.data_files.size() << " data files and " << result.manifest.string() << '\n';
    if (result.exit_code == delaykit::kExitAssertion) std::cerr << "assertion failed\n";
    return result.exit_code;
  } catch (const delaykit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return delaykit::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return delaykit::kExitError;
  }
}
