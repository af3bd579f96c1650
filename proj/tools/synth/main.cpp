#include <iostream>

#include <CLI11.hpp>

#include "synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate stand-in LogQA corpora"};
  std::string out = "data/synthetic";
  std::uint64_t seed = 7;
  std::vector<std::string> names = logqa::synth::dataset_names();
  app.add_option("-o,--out", out, "Output directory");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--datasets", names, "Datasets to generate")
      ->check(CLI::IsMember(logqa::synth::dataset_names()));
  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& name : names) {
      const auto data = logqa::synth::generate(name, seed);
      logqa::synth::write_dataset(data, out);
      std::cout << name << ": " << data.logs.size() << " logs, " << data.qa.size() << " QA pairs\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
