#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "qprad/commands.hpp"

int main(int argc, char** argv) {
  using namespace qprad::cli;

  CLI::App app{"Radiation-induced quasiparticle simulation and analysis"};
  app.set_version_flag("--version", std::string(tool_version));
  app.require_subcommand(1);

  GlobalOptions options;
  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out = options.out.string();
  OutputFormat format = OutputFormat::csv;
  const std::map<std::string, OutputFormat> formats{{"csv", OutputFormat::csv}, {"json", OutputFormat::json}};

  auto* config_opt = app.add_option("--config", config_path, "Scenario configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Master RNG seed (overrides the config)");
  app.add_option("--out", out, "Run output directory")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads")->envname("QPRAD_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "Data file format")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  CommandInputs inputs;
  std::string table;
  std::string templates_dir;
  app.add_subcommand("simulate-exposure", "Synthesize the source-exposure T1 campaign");
  app.add_subcommand("fit-exposure", "Fit the power-law model to an exposure table")
      ->add_option("exposure", table, "exposure.csv or exposure.json")->required();
  app.add_subcommand("simulate-shield-ab", "Synthesize the shield up/down campaign");
  app.add_subcommand("analyze-ab", "Paired analysis of shield up/down records")
      ->add_option("records", table, "ab_records.csv or ab_records.json")->required();
  app.add_subcommand("inject-qp", "Synthesize and fit a quasiparticle injection decay");
  app.add_subcommand("simulate-spectrum", "Synthesize a toy detector histogram and templates");
  auto* fit_spec = app.add_subcommand("fit-spectrum", "Fit the detector response model");
  fit_spec->add_option("hist", table, "Channel histogram")->required();
  fit_spec->add_option("templates", templates_dir, "Directory of energy templates")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  if (*config_opt) options.config = config_path;
  if (*seed_opt) options.seed = seed;
  if (threads > 0) options.threads = threads;
  options.out = out;
  options.format = format;
  inputs.table = table;
  inputs.templates_dir = templates_dir;

  const std::string verb = app.get_subcommands().front()->get_name();
  return run(verb, options, inputs, std::cerr);
}
