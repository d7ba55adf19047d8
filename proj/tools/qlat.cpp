// Command-line driver: simulate | train | eval | uqe.
// Exit codes: 0 success, 2 config error, 3 numerical error.

#include <cstdint>
#include <iostream>

#include <CLI11.hpp>

#include "qlat/commands.hpp"
#include "qlat/common.hpp"

int main(int argc, char** argv) {
  CLI::App app{"quantile regression with monotonic lattice models"};
  app.require_subcommand(1);

  qlat::CommandIO io;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", io.config_path, "config file (JSON)")->required();
    sub->add_option("--out", io.out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
      seed_given = true;
    });
  };

  CLI::App* simulate = app.add_subcommand("simulate", "generate simulation datasets");
  CLI::App* train = app.add_subcommand("train", "train a model");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a trained model");
  CLI::App* uqe = app.add_subcommand("uqe", "unconditional quantile estimator comparison");
  for (CLI::App* sub : {simulate, train, eval, uqe}) add_common(sub);

  CLI11_PARSE(app, argc, argv);
  if (seed_given) io.seed = seed;

  try {
    if (simulate->parsed()) return qlat::cmd_simulate(io);
    if (train->parsed()) return qlat::cmd_train(io);
    if (eval->parsed()) return qlat::cmd_eval(io);
    if (uqe->parsed()) return qlat::cmd_uqe(io);
  } catch (const qlat::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const qlat::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qlat::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
