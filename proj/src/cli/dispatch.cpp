#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "simeval/cli.hpp"
#include "simeval/error.hpp"
#include "simeval/evaluation.hpp"
#include "simeval/external_scorer.hpp"
#include "simeval/ratings.hpp"
#include "simeval/readability.hpp"
#include "simeval/scorer.hpp"
#include "simeval/softening.hpp"

namespace simeval::cli {

namespace {

namespace fs = std::filesystem;

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

// Writes to `path`, or to the fallback stream when no path was given.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) file_ = open_output(path);
    stream_ = path.empty() ? &fallback : &*file_;
    path_ = path;
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write failed", path_.empty() ? "<stdout>" : path_);
  }

 private:
  std::optional<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
  std::string path_;
};

void write_config_next_to(const RunConfig& cfg, const fs::path& output) {
  write_json_file(fs::path(output.string() + ".config.json"), config_to_json(cfg));
}

void check_inputs(const RunConfig& cfg) {
  for (const std::string* path : {&cfg.in, &cfg.train, &cfg.dev, &cfg.test, &cfg.model, &cfg.pairs,
                                  &cfg.ratings, &cfg.exclude}) {
    if (!path->empty() && !fs::is_regular_file(*path)) throw IoError("no such input file", *path);
  }
}

std::unique_ptr<SimplicityScorer> open_scorer(const RunConfig& cfg) {
  if (!cfg.endpoint.empty())
    return std::make_unique<ExternalScorer>(parse_endpoint(cfg.endpoint),
                                            std::chrono::milliseconds(cfg.timeout_ms));
  const ScorerModel model = load_model(cfg.model);
  if (model.provenance == Provenance::external)
    return std::make_unique<ExternalScorer>(parse_endpoint(model.endpoint),
                                            std::chrono::milliseconds(cfg.timeout_ms));
  return make_scorer(model);
}

std::string text_field(const Json& object, std::size_t line, std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    auto it = object.find(key);
    if (it != object.end()) {
      if (!it->is_string()) throw ValidationError("line " + std::to_string(line) + ": \"" + key + "\" must be a string");
      return it->get<std::string>();
    }
  }
  throw ValidationError("line " + std::to_string(line) + ": missing \"" + *keys.begin() + "\"");
}

int run_fixture(const RunConfig& cfg, std::ostream& out) {
  const auto records = generate_fixture(cfg.fixture);
  write_corpus(fs::path(cfg.out), records);
  write_config_next_to(cfg, cfg.out);
  std::set<std::string> docs;
  for (const auto& r : records) docs.insert(r.doc_id);
  out << Json{{"sentences", records.size()}, {"documents", docs.size()}, {"articles", cfg.fixture.articles}}.dump()
      << '\n';
  return 0;
}

int run_split(const RunConfig& cfg, std::ostream& out) {
  const auto records = load_corpus(cfg.in);
  validate_documents(records);
  const CorpusSplit split = split_corpus(records, cfg.ratios, cfg.seed);
  const fs::path dir(cfg.out_dir);
  write_corpus(dir / "train.jsonl", split.train);
  write_corpus(dir / "dev.jsonl", split.dev);
  write_corpus(dir / "test.jsonl", split.test);
  write_json_file(dir / "config.json", config_to_json(cfg));

  Json summary;
  for (const auto& [name, part] : {std::pair<const char*, const std::vector<SentenceRecord>*>{"train", &split.train},
                                   {"dev", &split.dev},
                                   {"test", &split.test}}) {
    std::set<std::string> articles;
    for (const auto& r : *part) articles.insert(r.article_id);
    summary[name] = {{"articles", articles.size()}, {"sentences", part->size()}};
  }
  out << summary.dump() << '\n';
  return 0;
}

int run_fkgl(const RunConfig& cfg, std::ostream& out) {
  Sink sink(cfg.out, out);
  if (cfg.text) {
    write_jsonl_line(sink.stream(), Json{{"text", *cfg.text}, {"fkgl", fkgl(*cfg.text)}});
  } else {
    for (const auto& r : load_corpus(cfg.in))
      write_jsonl_line(sink.stream(), Json{{"doc_id", r.doc_id}, {"text", r.text}, {"fkgl", fkgl(r.text)}});
  }
  sink.finish();
  if (!cfg.out.empty()) write_config_next_to(cfg, cfg.out);
  return 0;
}

void write_label_stats(std::ostream& out, const SofteningResult& result) {
  out << "labels,level,bin_lower,count\n";
  for (int level = kMinLevel; level <= kMaxLevel; ++level) {
    std::vector<double> quantized;
    std::vector<double> softened;
    for (const auto& r : result.records) {
      if (r.level != level) continue;
      quantized.push_back(static_cast<double>(r.level));
      softened.push_back(*r.soft_label);
    }
    if (quantized.empty()) continue;
    for (const auto& [name, values] : {std::pair<const char*, std::vector<double>*>{"quantized", &quantized},
                                       {"softened", &softened}}) {
      const Histogram h = distribution_summary(*values, 0.1);
      for (const auto& [bin, count] : h.counts)
        out << name << ',' << level << ',' << format_number(h.lower_edge(bin)) << ',' << count << '\n';
    }
  }
}

int run_soften(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto records = load_corpus(cfg.in);
  validate_documents(records);
  SofteningOptions options;
  options.filter = cfg.filter;
  options.lo = cfg.lo;
  options.hi = cfg.hi;
  options.scope = cfg.global_filter ? FilterScope::global : FilterScope::per_level;
  const SofteningResult result = soften_labels(records, options);

  auto file = open_output(cfg.out);
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    write_jsonl_line(file, Json{{"article_id", r.article_id},
                                {"doc_id", r.doc_id},
                                {"level", r.level},
                                {"text", r.text},
                                {"fkgl", result.fkgl[i]},
                                {"soft_label", *r.soft_label}});
  }
  file.close();
  if (!file) throw IoError("write failed", cfg.out);
  write_config_next_to(cfg, cfg.out);

  Json levels = Json::array();
  for (const auto& s : result.levels)
    levels.push_back({{"level", s.level}, {"kept", s.kept}, {"excluded", s.excluded}});
  err << Json{{"soften", {{"kept", result.records.size()}, {"levels", levels}}}}.dump() << '\n';
  if (cfg.stats) write_label_stats(out, result);
  return 0;
}

int run_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const LabelSource labels = cfg.labels == "quantized" ? LabelSource::quantized : LabelSource::soft;
  const auto train = labels == LabelSource::soft ? load_labeled_corpus(cfg.train) : load_corpus(cfg.train);
  const auto dev = load_corpus(cfg.dev);
  const TrainingResult result = train_baseline(train, dev, cfg.lambda_grid, labels);
  for (const auto& w : result.warnings) err << Json{{"warning", w}}.dump() << '\n';

  Json model = model_to_json(result.model);
  Json selection = Json::array();
  for (const auto& t : result.trials) {
    Json row{{"lambda", t.lambda}, {"solved", t.solved}};
    if (t.solved) row["dev_doc_mae"] = t.dev_doc_mae;
    selection.push_back(row);
  }
  model["selection"] = selection;
  write_json_file(cfg.out, model);
  write_config_next_to(cfg, cfg.out);
  out << Json{{"ridge_lambda", result.model.ridge_lambda}, {"selection", selection}}.dump() << '\n';
  return 0;
}

template <typename Visit>
std::vector<Json> read_objects(const std::string& path, Visit&& visit) {
  std::vector<Json> objects;
  for_each_jsonl(fs::path(path), [&](std::size_t line, const Json& object) {
    visit(line, object);
    objects.push_back(object);
  });
  return objects;
}

int run_score(const RunConfig& cfg, std::ostream& out) {
  std::vector<std::string> texts;
  auto objects = read_objects(cfg.in, [&](std::size_t line, const Json& o) { texts.push_back(text_field(o, line, {"text"})); });
  const auto scores = open_scorer(cfg)->score_batch(texts);
  Sink sink(cfg.out, out);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    objects[i]["score"] = scores[i];
    write_jsonl_line(sink.stream(), objects[i]);
  }
  sink.finish();
  if (!cfg.out.empty()) write_config_next_to(cfg, cfg.out);
  return 0;
}

int run_delta(const RunConfig& cfg, std::ostream& out) {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  read_objects(cfg.pairs, [&](std::size_t line, const Json& o) {
    inputs.push_back(text_field(o, line, {"input"}));
    outputs.push_back(text_field(o, line, {"output"}));
  });
  auto scorer = open_scorer(cfg);
  const auto in_scores = scorer->score_batch(inputs);
  const auto out_scores = scorer->score_batch(outputs);
  Sink sink(cfg.out, out);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    write_jsonl_line(sink.stream(), Json{{"input", inputs[i]},
                                         {"output", outputs[i]},
                                         {"score_input", in_scores[i]},
                                         {"score_output", out_scores[i]},
                                         {"delta_sle", delta_sle(out_scores[i], in_scores[i])}});
  }
  sink.finish();
  if (!cfg.out.empty()) write_config_next_to(cfg, cfg.out);
  return 0;
}

int run_eps(const RunConfig& cfg, std::ostream& out) {
  std::vector<std::string> texts;
  auto objects =
      read_objects(cfg.in, [&](std::size_t line, const Json& o) { texts.push_back(text_field(o, line, {"text", "output"})); });
  const auto scores = open_scorer(cfg)->score_batch(texts);
  Sink sink(cfg.out, out);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    objects[i]["score"] = scores[i];
    objects[i]["eps_sle"] = eps_sle(scores[i], *cfg.target);
    write_jsonl_line(sink.stream(), objects[i]);
  }
  sink.finish();
  if (!cfg.out.empty()) write_config_next_to(cfg, cfg.out);
  return 0;
}

int run_eval_regression(const RunConfig& cfg, std::ostream& out) {
  const auto test = load_corpus(cfg.test);
  std::vector<std::string> texts;
  for (const auto& r : test) texts.push_back(r.text);
  const auto predictions = open_scorer(cfg)->score_batch(texts);
  const RegressionReport report = evaluate_regression(predictions, test);
  const Json json{{"mae", report.mae},
                  {"doc_mae", report.doc_mae},
                  {"f1", report.f1},
                  {"sentences", report.sentences},
                  {"documents", report.documents},
                  {"f1_averaging", "macro over gold-present classes"},
                  {"rounding", "half away from zero, clamped to [0, 4]"}};
  if (cfg.out.empty()) {
    out << json.dump(2) << '\n';
  } else {
    write_json_file(cfg.out, json);
    write_config_next_to(cfg, cfg.out);
  }
  return 0;
}

int run_eval_correlation(const RunConfig& cfg, std::ostream& out) {
  auto items = load_ratings(fs::path(cfg.ratings));
  const std::size_t loaded = items.size();
  std::vector<std::string> exclude;
  if (!cfg.exclude.empty()) exclude = load_id_list(cfg.exclude);
  if (cfg.filter_z) {
    const RatingDim dims[] = {RatingDim::fluency, RatingDim::adequacy};
    items = filter_ratings(items, dims, *cfg.filter_z, exclude);
  } else if (!exclude.empty()) {
    items = filter_ratings(items, {}, 0.0, exclude);
  }

  if (!cfg.model.empty() || !cfg.endpoint.empty()) {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    for (const auto& item : items) {
      inputs.push_back(item.input_text);
      outputs.push_back(item.output_text);
    }
    auto scorer = open_scorer(cfg);
    const auto in_scores = scorer->score_batch(inputs);
    const auto out_scores = scorer->score_batch(outputs);
    for (std::size_t i = 0; i < items.size(); ++i)
      items[i].metric_scores["delta_sle"] = delta_sle(out_scores[i], in_scores[i]);
  }

  const auto rows = correlate_metrics(items, RatingDim::simplicity);
  Json table = Json::array();
  for (const auto& row : rows) {
    table.push_back({{"metric", row.metric},
                     {"r", row.r},
                     {"abs_r", row.abs_r},
                     {"p_value", row.p_value},
                     {"n", row.n},
                     {"significance", significance_marker(row.p_value)}});
  }
  Json json{{"target", "simplicity"}, {"items_loaded", loaded}, {"items_used", items.size()}};
  if (cfg.filter_z) json["filter_z"] = *cfg.filter_z;
  json["excluded_ids"] = exclude.size();
  json["rows"] = table;
  if (cfg.out.empty()) {
    out << json.dump(2) << '\n';
  } else {
    write_json_file(cfg.out, json);
    write_config_next_to(cfg, cfg.out);
  }
  return 0;
}

int run_hist(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<double> values;
  for_each_jsonl(fs::path(cfg.in), [&](std::size_t line, const Json& o) {
    auto it = o.find(cfg.field);
    if (it == o.end() || !it->is_number())
      throw ValidationError("line " + std::to_string(line) + ": no numeric \"" + cfg.field + "\" field");
    values.push_back(it->get<double>());
  });
  const Histogram h = distribution_summary(values, cfg.bin);
  Sink sink(cfg.out, out);
  sink.stream() << "bin_lower,count\n";
  for (const auto& [bin, count] : h.counts) sink.stream() << format_number(h.lower_edge(bin)) << ',' << count << '\n';
  sink.finish();
  if (!cfg.out.empty()) write_config_next_to(cfg, cfg.out);
  err << Json{{"hist", {{"n", h.total}, {"bins", h.counts.size()}, {"entropy_nats", h.entropy_nats}}}}.dump() << '\n';
  return 0;
}

Json error_envelope(const std::string& kind, const std::string& stage, const std::string& message) {
  return Json{{"error", {{"kind", kind}, {"stage", stage}, {"message", message}}}};
}

}  // namespace

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.help.empty()) {
    out << cfg.help;
    return 0;
  }
  const std::string stage = command_name(cfg.command);
  try {
    check_inputs(cfg);
  } catch (const IoError& e) {
    Json envelope = error_envelope(e.kind(), stage, e.what());
    envelope["error"]["path"] = e.path();
    err << envelope.dump() << '\n';
    return 2;
  }
  err << Json{{"config", config_to_json(cfg)}}.dump() << '\n';

  try {
    switch (cfg.command) {
      case Command::fixture: return run_fixture(cfg, out);
      case Command::split: return run_split(cfg, out);
      case Command::fkgl: return run_fkgl(cfg, out);
      case Command::soften: return run_soften(cfg, out, err);
      case Command::train: return run_train(cfg, out, err);
      case Command::score: return run_score(cfg, out);
      case Command::delta: return run_delta(cfg, out);
      case Command::eps: return run_eps(cfg, out);
      case Command::eval_regression: return run_eval_regression(cfg, out);
      case Command::eval_correlation: return run_eval_correlation(cfg, out);
      case Command::hist: return run_hist(cfg, out, err);
      case Command::none: break;
    }
    throw UsageError("no subcommand");
  } catch (const IoError& e) {
    Json envelope = error_envelope(e.kind(), stage, e.what());
    envelope["error"]["path"] = e.path();
    err << envelope.dump() << '\n';
    return 1;
  } catch (const UsageError& e) {
    err << error_envelope(e.kind(), stage, e.what()).dump() << '\n';
    return 2;
  } catch (const Error& e) {
    err << error_envelope(e.kind(), stage, e.what()).dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << error_envelope("internal", stage, e.what()).dump() << '\n';
    return 1;
  }
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const UsageError& e) {
    err << error_envelope(e.kind(), "parse_config", e.what()).dump() << '\n';
    return 2;
  }
  return dispatch(cfg, out, err);
}

}  // namespace simeval::cli
