#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "simeval/cli.hpp"
#include "simeval/error.hpp"

namespace simeval::cli {

namespace {

struct CommandInfo {
  Command command;
  const char* name;
  const char* description;
};

constexpr CommandInfo kCommands[] = {
    {Command::split, "split", "Split a corpus into train/dev/test by article"},
    {Command::fkgl, "fkgl", "Flesch-Kincaid grade level per sentence"},
    {Command::soften, "soften", "Soften quantized reading levels with per-level FKGL ranks"},
    {Command::train, "train", "Train the baseline simplicity regressor"},
    {Command::score, "score", "Score sentences with a trained or external scorer"},
    {Command::delta, "delta", "Simplicity gain of outputs over inputs"},
    {Command::eps, "eps", "Distance of output scores from a target level"},
    {Command::eval_regression, "eval-regression", "MAE, Doc-MAE and rounded F1 on a test corpus"},
    {Command::eval_correlation, "eval-correlation", "Correlation of metrics with human simplicity ratings"},
    {Command::hist, "hist", "Histogram and entropy of a numeric JSONL field"},
    {Command::fixture, "fixture", "Write the bundled synthetic corpus"},
};

std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw UsageError(std::string(what) + ": empty list element");
    const std::string token = item.substr(first, last - first + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v))
      throw UsageError(std::string(what) + ": \"" + token + "\" is not a number");
    values.push_back(v);
  }
  if (values.empty()) throw UsageError(std::string(what) + ": empty list");
  return values;
}

std::string json_to_option_value(const Json& value, const std::string& key) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number()) {
    std::ostringstream s;
    s.precision(17);
    s << value.get<double>();
    return s.str();
  }
  if (value.is_array()) {
    std::string joined;
    for (const auto& element : value) {
      if (!element.is_number() && !element.is_string())
        throw UsageError("config key \"" + key + "\": list elements must be numbers");
      if (!joined.empty()) joined += ',';
      joined += json_to_option_value(element, key);
    }
    return joined;
  }
  throw UsageError("config key \"" + key + "\" has an unsupported value type");
}

// String-typed mirrors of list-valued flags; converted after parsing.
struct ListFlags {
  std::string ratios;
  std::string lambdas;
  std::optional<double> target;
  std::optional<double> filter_z;
  bool no_filter = false;
  bool homoscedastic = false;
};

void add_options(CLI::App& sub, Command command, RunConfig& cfg, ListFlags& lists) {
  sub.add_option("--config", cfg.config_file, "JSON file of flag defaults");
  auto add_scorer = [&] {
    sub.add_option("--model", cfg.model, "Trained model JSON");
    sub.add_option("--endpoint", cfg.endpoint, "External scorer: host:port or exec:<command>");
    sub.add_option("--timeout-ms", cfg.timeout_ms, "External scorer batch timeout");
  };
  switch (command) {
    case Command::split:
      sub.add_option("--in", cfg.in, "Corpus JSONL");
      sub.add_option("--ratios", lists.ratios, "train,dev,test ratios");
      sub.add_option("--seed", cfg.seed, "Shuffle seed");
      sub.add_option("--out-dir", cfg.out_dir, "Directory for train/dev/test.jsonl (default .)");
      break;
    case Command::fkgl:
      sub.add_option("--in", cfg.in, "Corpus JSONL");
      sub.add_option("--text", cfg.text, "Score a single text");
      sub.add_option("--out", cfg.out, "Output JSONL (default stdout)");
      break;
    case Command::soften:
      sub.add_option("--in", cfg.in, "Training corpus JSONL");
      sub.add_option("--out", cfg.out, "Softened corpus JSONL");
      sub.add_option("--lo", cfg.lo, "Lower FKGL percentile kept");
      sub.add_option("--hi", cfg.hi, "Upper FKGL percentile kept");
      sub.add_flag("--no-filter", lists.no_filter, "Keep FKGL outliers");
      sub.add_flag("--global-filter", cfg.global_filter, "Percentiles over the whole corpus, not per level");
      sub.add_flag("--stats", cfg.stats, "Print per-level label histograms as CSV");
      break;
    case Command::train:
      sub.add_option("--train", cfg.train, "Softened training JSONL");
      sub.add_option("--dev", cfg.dev, "Dev JSONL");
      sub.add_option("--out", cfg.out, "Model JSON");
      sub.add_option("--lambdas", lists.lambdas, "Comma-separated ridge penalties");
      sub.add_option("--labels", cfg.labels, "soft or quantized")->check(CLI::IsMember({"soft", "quantized"}));
      break;
    case Command::score:
      add_scorer();
      sub.add_option("--in", cfg.in, "JSONL with a text field");
      sub.add_option("--out", cfg.out, "Output JSONL (default stdout)");
      break;
    case Command::delta:
      add_scorer();
      sub.add_option("--pairs", cfg.pairs, "JSONL of {input, output}");
      sub.add_option("--out", cfg.out, "Output JSONL (default stdout)");
      break;
    case Command::eps:
      add_scorer();
      sub.add_option("--target", lists.target, "Target simplicity level");
      sub.add_option("--in", cfg.in, "JSONL with a text (or output) field");
      sub.add_option("--out", cfg.out, "Output JSONL (default stdout)");
      break;
    case Command::eval_regression:
      add_scorer();
      sub.add_option("--test", cfg.test, "Test corpus JSONL");
      sub.add_option("--out", cfg.out, "Report JSON (default stdout)");
      break;
    case Command::eval_correlation:
      add_scorer();
      sub.add_option("--ratings", cfg.ratings, "Ratings CSV");
      sub.add_option("--filter-z", lists.filter_z, "Keep items this many sd above the fluency/adequacy mean");
      sub.add_option("--exclude", cfg.exclude, "File of item ids to drop");
      sub.add_option("--out", cfg.out, "Report JSON (default stdout)");
      break;
    case Command::hist:
      sub.add_option("--in", cfg.in, "JSONL input");
      sub.add_option("--field", cfg.field, "Numeric field to bin");
      sub.add_option("--bin", cfg.bin, "Bin width");
      sub.add_option("--out", cfg.out, "CSV output (default stdout)");
      break;
    case Command::fixture:
      sub.add_option("--out", cfg.out, "Corpus JSONL");
      sub.add_option("--seed", cfg.seed, "Generator seed");
      sub.add_option("--articles", cfg.fixture.articles, "Number of articles");
      sub.add_option("--sentences", cfg.fixture.sentences_per_doc, "Sentences per document");
      sub.add_option("--noise", cfg.fixture.label_noise, "Base spread of sentence difficulty");
      sub.add_flag("--homoscedastic", lists.homoscedastic, "Same spread at every level");
      break;
    case Command::none:
      break;
  }
}

void merge_config_file(CLI::App& sub, const std::string& path) {
  Json document;
  try {
    document = read_json_file(path);
  } catch (const Error& e) {
    throw UsageError(std::string("config file: ") + e.what());
  }
  if (!document.is_object()) throw UsageError("config file " + path + " must hold a JSON object");
  for (const auto& [key, value] : document.items()) {
    if (key == "config") throw UsageError("config file may not name another config file");
    CLI::Option* option = sub.get_option_no_throw("--" + key);
    if (option == nullptr) throw UsageError("unknown config key \"" + key + "\" for " + sub.get_name());
    if (option->count() > 0) continue;
    if (value.is_null()) continue;
    option->add_result(json_to_option_value(value, key));
    try {
      option->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config key \"" + key + "\": " + e.what());
    }
  }
}

void require(bool present, const std::string& command, const char* flag) {
  if (!present) throw UsageError(command + " requires " + flag);
}

void validate(const RunConfig& cfg) {
  const std::string name = command_name(cfg.command);
  if (!cfg.model.empty() && !cfg.endpoint.empty())
    throw UsageError("--model and --endpoint are mutually exclusive");
  switch (cfg.command) {
    case Command::split:
      require(!cfg.in.empty(), name, "--in");
      break;
    case Command::fkgl:
      if (cfg.in.empty() == !cfg.text.has_value()) throw UsageError("fkgl needs exactly one of --in or --text");
      break;
    case Command::soften:
      require(!cfg.in.empty(), name, "--in");
      require(!cfg.out.empty(), name, "--out");
      if (!(cfg.lo >= 0 && cfg.lo <= cfg.hi && cfg.hi <= 100))
        throw UsageError("--lo/--hi must satisfy 0 <= lo <= hi <= 100");
      break;
    case Command::train:
      require(!cfg.train.empty(), name, "--train");
      require(!cfg.dev.empty(), name, "--dev");
      require(!cfg.out.empty(), name, "--out");
      for (double l : cfg.lambda_grid)
        if (!(l >= 0.0)) throw UsageError("--lambdas must be non-negative");
      break;
    case Command::score:
      require(!cfg.in.empty(), name, "--in");
      break;
    case Command::delta:
      require(!cfg.pairs.empty(), name, "--pairs");
      break;
    case Command::eps:
      require(!cfg.in.empty(), name, "--in");
      require(cfg.target.has_value(), name, "--target");
      break;
    case Command::eval_regression:
      require(!cfg.test.empty(), name, "--test");
      break;
    case Command::eval_correlation:
      require(!cfg.ratings.empty(), name, "--ratings");
      break;
    case Command::hist:
      require(!cfg.in.empty(), name, "--in");
      if (!(cfg.bin > 0.0)) throw UsageError("--bin must be positive");
      break;
    case Command::fixture:
      require(!cfg.out.empty(), name, "--out");
      break;
    case Command::none:
      break;
  }
  switch (cfg.command) {
    case Command::score:
    case Command::delta:
    case Command::eps:
    case Command::eval_regression:
      if (cfg.model.empty() && cfg.endpoint.empty())
        throw UsageError(name + " requires --model or --endpoint");
      break;
    default:
      break;
  }
  if (cfg.timeout_ms <= 0) throw UsageError("--timeout-ms must be positive");
}

}  // namespace

std::string command_name(Command command) {
  for (const auto& info : kCommands)
    if (info.command == command) return info.name;
  return "simeval";
}

RunConfig parse_config(std::span<const std::string> args) {
  RunConfig cfg;
  ListFlags lists;

  CLI::App app{"Reference-less sentence simplicity evaluation toolkit", "simeval"};
  app.require_subcommand(0, 1);
  std::map<CLI::App*, Command> commands;
  for (const auto& info : kCommands) {
    CLI::App* sub = app.add_subcommand(info.name, info.description);
    add_options(*sub, info.command, cfg, lists);
    commands.emplace(sub, info.command);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto selected = app.get_subcommands();
    cfg.help = selected.empty() ? app.help() : selected.front()->help();
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  const auto selected = app.get_subcommands();
  if (selected.empty()) throw UsageError("missing subcommand; run with --help for the list");
  CLI::App* sub = selected.front();
  cfg.command = commands.at(sub);

  if (!cfg.config_file.empty()) merge_config_file(*sub, cfg.config_file);

  if (!lists.ratios.empty()) {
    const auto r = parse_number_list(lists.ratios, "--ratios");
    if (r.size() != 3) throw UsageError("--ratios needs three values");
    cfg.ratios = {r[0], r[1], r[2]};
  }
  if (!lists.lambdas.empty()) cfg.lambda_grid = parse_number_list(lists.lambdas, "--lambdas");
  cfg.target = lists.target;
  cfg.filter_z = lists.filter_z;
  cfg.filter = !lists.no_filter;
  cfg.fixture.heteroscedastic = !lists.homoscedastic;
  cfg.fixture.seed = cfg.seed;
  if (cfg.command == Command::split && cfg.out_dir.empty()) cfg.out_dir = ".";

  validate(cfg);
  return cfg;
}

Json config_to_json(const RunConfig& cfg) {
  Json json;
  json["command"] = command_name(cfg.command);
  auto put = [&](const char* key, const std::string& value) {
    if (!value.empty()) json[key] = value;
  };
  put("config", cfg.config_file);
  put("in", cfg.in);
  put("out", cfg.out);
  put("out_dir", cfg.out_dir);
  put("train", cfg.train);
  put("dev", cfg.dev);
  put("test", cfg.test);
  put("model", cfg.model);
  put("endpoint", cfg.endpoint);
  put("pairs", cfg.pairs);
  put("ratings", cfg.ratings);
  put("exclude", cfg.exclude);
  if (cfg.text) json["text"] = *cfg.text;
  json["seed"] = cfg.seed;
  switch (cfg.command) {
    case Command::split:
      json["ratios"] = {cfg.ratios.train, cfg.ratios.dev, cfg.ratios.test};
      break;
    case Command::soften:
      json["filter"] = cfg.filter;
      json["filter_scope"] = cfg.global_filter ? "global" : "per_level";
      json["lo"] = cfg.lo;
      json["hi"] = cfg.hi;
      break;
    case Command::train:
      json["lambda_grid"] = cfg.lambda_grid;
      json["labels"] = cfg.labels;
      break;
    case Command::eps:
      if (cfg.target) json["target"] = *cfg.target;
      break;
    case Command::eval_correlation:
      if (cfg.filter_z) json["filter_z"] = *cfg.filter_z;
      break;
    case Command::hist:
      json["bin"] = cfg.bin;
      json["field"] = cfg.field;
      break;
    case Command::fixture:
      json["articles"] = cfg.fixture.articles;
      json["sentences"] = cfg.fixture.sentences_per_doc;
      json["noise"] = cfg.fixture.label_noise;
      json["heteroscedastic"] = cfg.fixture.heteroscedastic;
      break;
    default:
      break;
  }
  if (!cfg.endpoint.empty()) json["timeout_ms"] = cfg.timeout_ms;
  return json;
}

}  // namespace simeval::cli
