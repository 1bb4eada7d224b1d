#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <csperf/commands.hpp>

namespace {

template <class F>
int guarded(F&& body) {
  try {
    body();
    return csperf::exit_ok;
  } catch (const csperf::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return csperf::exit_config;
  } catch (const csperf::layout_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return csperf::exit_config;
  } catch (const csperf::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return csperf::exit_config;
  } catch (const csperf::error& e) {
    std::cerr << "simulation error [" << e.kind() << "]: " << e.what() << "\n";
    return csperf::exit_simulation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return csperf::exit_simulation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cubed-sphere dynamical core and I/O server performance model"};
  app.require_subcommand(1);

  std::string config, out = ".";
  int repeat = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> axes, csvs;

  auto* run = app.add_subcommand("run", "simulate the configured cases and I/O scenario");
  run->add_option("--config", config, "scenario file")->required();
  run->add_option("--out", out, "output directory");
  run->add_option("--repeat", repeat, "I/O repetitions")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "seed of the first I/O repetition");

  auto* sweep = app.add_subcommand("sweep", "run configured sweep axes, one CSV each");
  sweep->add_option("--config", config, "scenario file")->required();
  sweep->add_option("--axis", axes, "axis name (repeatable); default all configured");
  sweep->add_option("--out", out, "output directory");

  auto* rep = app.add_subcommand("report", "compare CSV outputs");
  rep->add_option("csv", csvs, "CSV files")->required();
  rep->add_option("--out", out, "directory for report CSVs")->default_str("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : csperf::exit_config;
  }

  if (*run)
    return guarded([&] {
      const auto cfg = csperf::load_config(config);
      const auto files = csperf::run_outputs(cfg, repeat, seed);
      csperf::write_outputs(out, files);
      std::cout << files.back().content;
    });
  if (*sweep)
    return guarded([&] {
      const auto cfg = csperf::load_config(config);
      const auto files = csperf::sweep_outputs(cfg, axes);
      csperf::write_outputs(out, files);
      for (const auto& f : files) std::cout << "wrote " << out << "/" << f.name << "\n";
    });
  return guarded([&] {
    const auto result = csperf::report(csvs);
    std::cout << result.text;
    if (rep->count("--out")) csperf::write_outputs(out, result.files);
  });
}
