#include <iostream>

#include "CLI11.hpp"
#include "kam/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"kamred: KAM reduction of quasi-periodically forced linear systems"};
  app.require_subcommand(1, 1);
  kam::CliOptions opts;
  std::uint64_t seed = 0;

  for (const char* name : {"frequencies", "reduce", "verify", "spectrum", "model"}) {
    static const std::map<std::string, std::string> help = {
        {"frequencies", "certify a frequency vector and tabulate rejection fractions over a gamma grid"},
        {"reduce", "run the KAM schedule and write step records and the reduced system"},
        {"verify", "compare reconstructed solutions with direct propagation"},
        {"spectrum", "tabulate Floquet eigenvalues of a reduced system"},
        {"model", "build and inspect the oscillator model"}};
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--manifest", opts.manifest, "run manifest (JSON)")->required();
    sub->add_option("--seed", seed, "root seed, overrides the manifest");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--threads", opts.threads, "worker thread cap")->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kam::kExitOk : kam::kExitUsage;
  }
  auto* sub = app.get_subcommands().front();
  opts.command = sub->get_name();
  if (sub->count("--seed")) opts.seed = seed;
  return kam::run_cli(opts, std::cout, std::cerr);
}
