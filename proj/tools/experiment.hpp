#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dforms/io.hpp"

namespace dforms::cli {

using json = io::json;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;  // "quadrature" or "mc"
};

struct Criterion {
  std::string name;
  bool pass = false;
  json detail;
};

struct OutputFile {
  std::string name;
  std::string content;
};

struct Outcome {
  std::string experiment;
  json results;
  std::vector<Criterion> criteria;
  std::vector<OutputFile> traces;
  std::vector<std::string> summary;

  bool pass() const;
  /// Report document; `timestamp` goes under its own key so runs diff cleanly.
  json report(const json& config, const std::string& timestamp) const;
};

/// Validates the whole configuration, then runs the experiment.
/// Throws io::ConfigError on invalid input.
Outcome run_experiment(const json& config, const Overrides& overrides);

/// Applies command-line overrides to a parsed configuration.
json apply_overrides(json config, const Overrides& overrides);

/// Reads the config, runs it and writes report and traces into out_dir.
/// Returns 0 when every criterion passes, 1 on a failed criterion, 2 on a
/// configuration error.
int run(const std::string& config_path, const std::string& out_dir, const Overrides& overrides,
        std::ostream& out, std::ostream& err);

/// CSV text with header epsilon,estimate,stderr,extrapolated.
std::string trace_csv(const json& rows);

}  // namespace dforms::cli
