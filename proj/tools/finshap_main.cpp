// finshap: batch front-end for the attribution pipeline.
//
//   finshap synthesize --config cfg.json [--seed N] [--workers N] [--out DIR]
//   finshap train-eval --config cfg.json ...
//   finshap explain    --config cfg.json ...
//   finshap validate   --config cfg.json ...
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numerical error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "finshap/commands.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::int64_t seed = -1;
  std::int64_t workers = -1;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Run configuration JSON")->required();
  cmd->add_option("--seed", flags.seed, "Override the config seed");
  cmd->add_option("--workers", flags.workers, "Override the worker count (0 = all cores)");
  cmd->add_option("--out", flags.out, "Override the output directory");
}

finshap::RunConfig load_with_overrides(const CommonFlags& flags) {
  finshap::RunConfig config = finshap::RunConfig::load(flags.config_path);
  if (flags.seed >= 0) config.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.workers >= 0) config.workers = static_cast<std::size_t>(flags.workers);
  if (!flags.out.empty()) config.out = flags.out;
  return config;
}

void report(const finshap::ArtifactList& artifacts, const std::string& out_dir) {
  for (const auto& name : artifacts) std::cout << out_dir << "/" << name << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shapley-value explanations for profitability classifiers"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* synthesize = app.add_subcommand("synthesize", "Generate a synthetic panel");
  auto* train_eval = app.add_subcommand("train-eval", "Model grid on raw vs ratio features");
  auto* explain = app.add_subcommand("explain", "Attribute test predictions to features");
  auto* validate = app.add_subcommand("validate", "Feature-subset validation of the rankings");
  for (auto* cmd : {synthesize, train_eval, explain, validate}) add_common(cmd, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    const finshap::RunConfig config = load_with_overrides(flags);
    if (synthesize->parsed()) {
      report(finshap::cmd_synthesize(config), config.out);
    } else if (train_eval->parsed()) {
      report(finshap::cmd_train_eval(config), config.out);
    } else if (explain->parsed()) {
      report(finshap::cmd_explain(config), config.out);
    } else if (validate->parsed()) {
      report(finshap::cmd_validate(config), config.out);
    }
  } catch (const finshap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const finshap::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const finshap::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
