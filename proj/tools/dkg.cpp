// Command-line front end of the dkg library.
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "dkg/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral Dirac / Klein-Gordon / nucleus simulator"};
  app.require_subcommand(1);
  dkg::harness::Options opt;
  std::uint64_t seed = 0;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out-dir", opt.out_dir, "Artifact directory")->capture_default_str();
    sub->add_option("--seed", seed, "Seed for randomized initial data (overrides the config)");
    sub->add_option("--threads", threads, "FFT threads (overrides the config)")->check(CLI::PositiveNumber);
  };

  const std::map<std::string, std::string> about{
      {"simulate-system1", "Electron along a prescribed nucleus path"},
      {"simulate-system2", "Electron and nucleus, fixed point in the nucleus path"},
      {"verify-decomposition", "Split potential W1 + W2 + W3 against the direct Duhamel integral"},
      {"verify-kernels", "Lattice Yukawa and boosted Yukawa kernels against closed forms"},
      {"decay-fit", "Fit the sup-norm decay exponent of the free Klein-Gordon part"},
      {"gate-report", "Evaluate the small-data hypotheses without running"}};

  std::string config;
  std::string command;
  for (const auto& name : dkg::harness::commands()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("config", config, "Config file (key = value)")->required()->check(CLI::ExistingFile);
    add_common(sub);
    sub->callback([&, name, sub] {
      command = name;
      if (sub->count("--seed")) opt.seed = seed;
      if (sub->count("--threads")) opt.threads = threads;
    });
  }

  std::string manifest_a, manifest_b;
  auto* cmp = app.add_subcommand("compare", "Compare two run directories or manifests");
  cmp->add_option("a", manifest_a, "First run directory or manifest.json")->required()->check(CLI::ExistingPath);
  cmp->add_option("b", manifest_b, "Second run directory or manifest.json")->required()->check(CLI::ExistingPath);
  add_common(cmp);
  cmp->callback([&] { command = "compare"; });

  app.footer("Exit codes: 0 success, 1 gate/assertion/divergence failure, 2 config or usage error, 3 runtime error.\n"
             "Config keys can be overridden with environment variables DKG_<KEY> (e.g. DKG_DT=0.01; DKG_n sets the grid size n, DKG_N the weight N).");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dkg::harness::ExitCode::bad_input;
  }
  if (command == "compare") return dkg::harness::compare(manifest_a, manifest_b, opt);
  return dkg::harness::run(command, config, opt);
}
