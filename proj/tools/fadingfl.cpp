// fadingfl: federated learning over fading uplinks.
//
//   fadingfl rates    [--config F] [--out DIR] [--seeds LIST]
//   fadingfl train    [--config F] [--out DIR] [--seeds LIST] [--dataset D] [--jobs N]
//   fadingfl validate [--seeds LIST]

#include <CLI11.hpp>
#include <iostream>
#include <thread>

#include "fadingfl/commands.hpp"
#include "fadingfl/error.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string seeds;
  std::string out_dir;
  std::string dataset;
  std::size_t jobs = 1;
};

fadingfl::RunConfig resolve(const Common& opts, fadingfl::RunConfig defaults) {
  fadingfl::RunConfig cfg = opts.config_path.empty() ? std::move(defaults) : fadingfl::load_run_config(opts.config_path);
  if (!opts.seeds.empty()) cfg.seeds = fadingfl::parse_seed_list(opts.seeds);
  if (!opts.dataset.empty()) cfg.dataset = opts.dataset;
  cfg.validate();
  return cfg;
}

std::filesystem::path output_dir(const Common& opts, const fadingfl::RunConfig& cfg) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  return cfg.output_dir.value_or("results");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning over fading wireless uplinks: SFL vs fixed-rate FL"};
  app.require_subcommand(1);

  Common opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seeds", opts.seeds, "seed list, e.g. 1,2,5-8 (overrides the config)");
    sub->add_option("--out", opts.out_dir, "output directory (default: config output_dir or ./results)");
  };

  auto* rates = app.add_subcommand("rates", "E[R_min]/B over C = 1..40 by quadrature and Monte Carlo");
  add_common(rates);

  auto* train = app.add_subcommand("train", "run the experiment grid; writes traces.csv and summary.csv");
  add_common(train);
  train->add_option("--dataset", opts.dataset, "synthetic | mnist | mnist:<dir> (mnist reads $FADINGFL_DATA_DIR)");
  train->add_option("--jobs", opts.jobs, "replicates run in parallel")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "run the Monte Carlo vs analytic checks");
  std::uint64_t validate_seed = 1;
  validate->add_option("--seed", validate_seed, "Monte Carlo seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rates->parsed()) {
      fadingfl::RunConfig defaults;
      defaults.channels = fadingfl::reference_models();
      const auto cfg = resolve(opts, defaults);
      return fadingfl::rates_command(cfg, output_dir(opts, cfg), std::cerr);
    }
    if (train->parsed()) {
      const auto cfg = resolve(opts, fadingfl::RunConfig{});
      return fadingfl::train_command(cfg, output_dir(opts, cfg), opts.jobs, std::cerr);
    }
    fadingfl::ValidationOptions vopts;
    vopts.seed = validate_seed;
    return fadingfl::validate_command(vopts, std::cout);
  } catch (const fadingfl::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
