#include <iostream>

#include "CLI11.hpp"
#include "sqi/error.hpp"
#include "sqi/harness.hpp"
#include "sqi/kernels.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Speech quality and intelligibility fusion toolkit"};
  app.require_subcommand(1);

  sqi::harness::Options options;
  std::uint64_t seed = 0;
  for (const auto& name : sqi::harness::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config, "JSON config (config_version 1)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Overrides the config seed");
    sub->add_option("--out", options.out, "Output directory")->capture_default_str();
    sub->add_option("--jobs", options.jobs, "Worker threads, 0 for all cores")->capture_default_str();
  }
  CLI11_PARSE(app, argc, argv);

  const auto* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) options.seed = seed;
  try {
    std::clog << "kernels: " << sqi::kernels::isa_name(sqi::kernels::active_isa()) << "\n";
    return sqi::harness::run(sub->get_name(), options, std::clog);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
