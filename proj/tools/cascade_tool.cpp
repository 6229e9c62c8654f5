#include "eigencascade/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv) {
  namespace cli = eigencascade::cli;
  CLI::App app{"Multiscale Laplacian eigenspaces: datasets, cover trees, towers, cascades, mapper, benchmarks"};
  app.require_subcommand(1, 1);
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  const std::map<std::string, std::string> help{
      {"generate", "write the dataset as points.csv"},
      {"covertree", "build the cover tree and check its invariants"},
      {"tower", "nerve graphs and refinement maps for each scale"},
      {"cascade", "double eigen-cascade over the configured pipeline"},
      {"mapper", "mapper graphs, then the cascade over the interval ladder"},
      {"bench", "cascade vs cold-start solver timings per scale"},
      {"export-heatmap", "flatten a cascade directory into heatmap.csv"}};
  for (const auto& name : cli::commands()) {
    auto* sub = app.add_subcommand(name, help.count(name) ? help.at(name) : "");
    sub->add_option("--config", config, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--out", out, "overrides the output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    auto doc = eigencascade::io::json::parse(eigencascade::io::read_text(config));
    if (seed) doc["seed"] = *seed;
    if (out) doc["output"] = *out;
    const cli::RunConfig cfg = cli::parse_config(doc);
    cli::run_command(cmd, cfg);
  } catch (const eigencascade::io::json::parse_error& e) {
    std::cerr << "config error: $: not valid JSON: " << e.what() << "\n";
    return 2;
  } catch (const eigencascade::InputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const eigencascade::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
