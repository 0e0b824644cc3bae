#include <iostream>

#include <CLI11.hpp>

#include "experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Run one differential-form verification experiment"};
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::string method;
  app.add_option("--config", config, "experiment configuration (JSON)")->required();
  app.add_option("--out", out, "directory for report.json and CSV traces");
  auto* seed_opt = app.add_option("--seed", seed, "overrides the configured seed");
  app.add_option("--method", method, "integration method")
      ->check(CLI::IsMember({"quadrature", "mc"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  dforms::cli::Overrides ov;
  if (*seed_opt) ov.seed = seed;
  if (!method.empty()) ov.method = method;
  return dforms::cli::run(config, out, ov, std::cout, std::cerr);
}
