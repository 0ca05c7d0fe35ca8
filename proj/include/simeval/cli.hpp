#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simeval/corpus.hpp"
#include "simeval/jsonl.hpp"

namespace simeval::cli {

enum class Command {
  none,
  split,
  fkgl,
  soften,
  train,
  score,
  delta,
  eps,
  eval_regression,
  eval_correlation,
  hist,
  fixture,
};

std::string command_name(Command command);

inline constexpr std::uint64_t kDefaultSeed = 13;

// Everything a subcommand needs, after merging flags over the config file.
struct RunConfig {
  Command command = Command::none;
  std::string config_file;
  // Set when --help was requested; dispatch prints it and exits 0.
  std::string help;

  std::string in;
  std::string out;
  std::string out_dir;
  std::string train;
  std::string dev;
  std::string test;
  std::string model;
  std::string endpoint;
  std::string pairs;
  std::string ratings;
  std::string exclude;
  std::optional<std::string> text;

  std::uint64_t seed = kDefaultSeed;
  SplitRatios ratios;
  std::vector<double> lambda_grid{0.0, 0.01, 0.1, 1.0, 10.0};
  std::string labels = "soft";

  bool filter = true;
  bool global_filter = false;
  double lo = 1.0;
  double hi = 99.0;
  bool stats = false;

  std::optional<double> target;
  std::optional<double> filter_z;
  double bin = 0.1;
  std::string field = "score";
  long long timeout_ms = 60'000;

  FixtureOptions fixture;
};

// Parses `simeval <command> [flags]` (argv without the program name). A
// `--config file.json` object supplies defaults keyed by long flag name;
// flags given on the command line win. Throws UsageError.
RunConfig parse_config(std::span<const std::string> args);

// The resolved configuration, as echoed to stderr and written next to outputs.
Json config_to_json(const RunConfig& config);

// Runs one subcommand. Exit status: 0 success, 1 runtime failure, 2 usage
// error (including missing input files). Failures are reported on `err` as a
// single-line JSON envelope {"error": {"kind", "stage", "message", ...}}.
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

// parse_config + dispatch with the same error envelope for parse failures.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace simeval::cli
