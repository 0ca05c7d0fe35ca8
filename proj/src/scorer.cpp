#include "simeval/scorer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "simeval/error.hpp"
#include "simeval/evaluation.hpp"
#include "simeval/external_scorer.hpp"
#include "simeval/readability.hpp"

namespace simeval {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static constexpr std::array<std::string_view, kFeatureCount> names{
      "words_per_sentence", "mean_chars_per_word", "mean_syllables_per_word",
      "fkgl",               "long_word_ratio",     "log1p_word_count"};
  return names;
}

FeatureVector extract_features(std::string_view text) {
  const auto words = tokenize_words(text);
  if (words.empty()) throw ValidationError("text has no words: \"" + std::string(text) + "\"");

  TextStats stats;
  stats.word_count = words.size();
  stats.sentence_count = count_sentences(text);
  stats.syllable_count = 0;
  std::size_t chars = 0;
  std::size_t long_words = 0;
  for (auto w : words) {
    stats.syllable_count += token_syllables(w);
    const auto len = char_length(w);
    chars += len;
    if (len >= kLongWordChars) ++long_words;
  }

  const auto n = static_cast<double>(stats.word_count);
  return {n / static_cast<double>(stats.sentence_count),
          static_cast<double>(chars) / n,
          static_cast<double>(stats.syllable_count) / n,
          fkgl(stats),
          static_cast<double>(long_words) / n,
          std::log1p(n)};
}

std::string_view to_string(Provenance p) { return p == Provenance::baseline ? "baseline" : "external"; }
std::string_view to_string(LabelSource s) { return s == LabelSource::soft ? "soft" : "quantized"; }

double predict(const ScorerModel& model, const FeatureVector& features) {
  double y = model.bias;
  for (std::size_t j = 0; j < kFeatureCount; ++j)
    y += model.weights[j] * (features[j] - model.feature_mean[j]) / model.feature_scale[j];
  return y;
}

ScorerModel fit_ridge(std::span<const FeatureVector> features, std::span<const double> targets,
                      double lambda) {
  if (features.empty()) throw ValidationError("cannot fit on an empty training set");
  if (features.size() != targets.size()) throw ValidationError("features and targets differ in length");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be finite and >= 0");

  constexpr auto p = static_cast<Eigen::Index>(kFeatureCount);
  const auto n = static_cast<Eigen::Index>(features.size());

  ScorerModel model;
  model.ridge_lambda = lambda;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double mean = 0.0;
    for (const auto& f : features) mean += f[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& f : features) var += (f[j] - mean) * (f[j] - mean);
    var /= static_cast<double>(n);
    model.feature_mean[j] = mean;
    model.feature_scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }

  // Standardized design with a trailing intercept column.
  Eigen::MatrixXd design(n, p + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& f = features[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto k = static_cast<std::size_t>(j);
      design(i, j) = (f[k] - model.feature_mean[k]) / model.feature_scale[k];
    }
    design(i, p) = 1.0;
    y(i) = targets[static_cast<std::size_t>(i)];
    if (!std::isfinite(y(i))) throw ValidationError("non-finite training target");
  }

  Eigen::MatrixXd normal = design.transpose() * design;
  normal.diagonal().head(p).array() += lambda;
  const Eigen::VectorXd rhs = design.transpose() * y;

  // With lambda > 0 the penalized system is positive definite for any
  // non-empty design; only the plain least-squares case can be singular.
  Eigen::VectorXd beta;
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(normal);
    qr.setThreshold(1e-10);
    if (qr.rank() < p + 1) {
      std::ostringstream msg;
      msg << "singular normal equations at lambda=0 (rank " << qr.rank() << " of " << p + 1
          << "; collinear features)";
      throw NumericError(msg.str());
    }
    beta = qr.solve(rhs);
  } else {
    beta = normal.ldlt().solve(rhs);
  }
  for (Eigen::Index j = 0; j < p; ++j) model.weights[static_cast<std::size_t>(j)] = beta(j);
  model.bias = beta(p);
  if (!beta.allFinite()) throw NumericError("non-finite ridge solution");
  return model;
}

DevSet make_dev_set(const std::vector<SentenceRecord>& dev) {
  validate_documents(dev);
  DevSet set;
  for (const auto& r : dev) {
    set.features.push_back(extract_features(r.text));
    set.doc_ids.push_back(r.doc_id);
    set.doc_levels.emplace(r.doc_id, r.level);
  }
  return set;
}

TrainingResult train_on_features(std::span<const FeatureVector> features,
                                 std::span<const double> targets, const DevSet& dev,
                                 std::vector<double> lambda_grid) {
  if (features.empty()) throw ValidationError("training set is empty");
  if (dev.doc_levels.empty()) throw ValidationError("dev set has no documents");
  if (lambda_grid.empty()) throw ValidationError("lambda grid is empty");
  std::sort(lambda_grid.begin(), lambda_grid.end());
  lambda_grid.erase(std::unique(lambda_grid.begin(), lambda_grid.end()), lambda_grid.end());

  TrainingResult result;
  std::optional<std::size_t> best;
  for (double lambda : lambda_grid) {
    LambdaTrial trial{lambda, false, 0.0};
    ScorerModel model;
    try {
      model = fit_ridge(features, targets, lambda);
    } catch (const NumericError& e) {
      result.warnings.push_back(std::string(e.what()) + "; skipped");
      result.trials.push_back(trial);
      continue;
    }
    std::vector<double> predictions;
    predictions.reserve(dev.features.size());
    for (const auto& f : dev.features) predictions.push_back(predict(model, f));
    trial.solved = true;
    trial.dev_doc_mae = doc_mae(predictions, dev.doc_ids, dev.doc_levels);
    if (!best || trial.dev_doc_mae < result.trials[*best].dev_doc_mae) {
      best = result.trials.size();
      result.model = model;
    }
    result.trials.push_back(trial);
  }
  if (!best) throw NumericError("no lambda in the grid produced a solvable system");
  return result;
}

TrainingResult train_baseline(const std::vector<SentenceRecord>& train,
                              const std::vector<SentenceRecord>& dev,
                              std::vector<double> lambda_grid, LabelSource labels) {
  if (train.empty()) throw ValidationError("training set is empty");
  std::vector<FeatureVector> features;
  std::vector<double> targets;
  features.reserve(train.size());
  targets.reserve(train.size());
  for (const auto& r : train) {
    if (labels == LabelSource::soft && !r.soft_label)
      throw ValidationError("record in doc " + r.doc_id + " has no soft_label");
    features.push_back(extract_features(r.text));
    targets.push_back(labels == LabelSource::soft ? *r.soft_label : static_cast<double>(r.level));
  }
  auto result = train_on_features(features, targets, make_dev_set(dev), std::move(lambda_grid));
  result.model.label_source = labels;
  return result;
}

Json model_to_json(const ScorerModel& model) {
  Json json;
  json["schema_version"] = model.schema_version;
  json["provenance"] = to_string(model.provenance);
  if (model.provenance == Provenance::external) {
    json["endpoint"] = model.endpoint;
    return json;
  }
  json["label_source"] = to_string(model.label_source);
  json["feature_names"] = Json::array();
  for (auto name : feature_names()) json["feature_names"].push_back(name);
  Json weights = Json::array();
  for (double w : model.weights) weights.push_back(w);
  weights.push_back(model.bias);
  json["weights"] = weights;
  json["feature_mean"] = model.feature_mean;
  json["feature_scale"] = model.feature_scale;
  json["ridge_lambda"] = model.ridge_lambda;
  return json;
}

namespace {

template <std::size_t N>
std::array<double, N> read_array(const Json& json, const char* key) {
  auto it = json.find(key);
  if (it == json.end() || !it->is_array() || it->size() != N)
    throw ValidationError(std::string("model field \"") + key + "\" must be an array of " +
                          std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!(*it)[i].is_number()) throw ValidationError(std::string("model field \"") + key + "\" is not numeric");
    out[i] = (*it)[i].get<double>();
    if (!std::isfinite(out[i])) throw ValidationError(std::string("model field \"") + key + "\" is not finite");
  }
  return out;
}

}  // namespace

ScorerModel model_from_json(const Json& json) {
  if (!json.is_object()) throw ValidationError("model must be a JSON object");
  auto version = json.find("schema_version");
  if (version == json.end() || !version->is_number_integer())
    throw ValidationError("model has no integer schema_version");
  if (version->get<int>() != kFeatureSchemaVersion)
    throw ValidationError("model feature schema version " + std::to_string(version->get<int>()) +
                          " does not match this build (" + std::to_string(kFeatureSchemaVersion) + ")");

  ScorerModel model;
  const std::string provenance = json.value("provenance", std::string("baseline"));
  if (provenance == "external") {
    model.provenance = Provenance::external;
    model.endpoint = json.value("endpoint", std::string());
    if (model.endpoint.empty()) throw ValidationError("external model has no endpoint");
    parse_endpoint(model.endpoint);
    return model;
  }
  if (provenance != "baseline") throw ValidationError("unknown model provenance \"" + provenance + "\"");

  if (auto names = json.find("feature_names"); names != json.end()) {
    if (!names->is_array() || names->size() != kFeatureCount)
      throw ValidationError("model feature_names do not match this build");
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (!(*names)[i].is_string() || (*names)[i].get<std::string>() != feature_names()[i])
        throw ValidationError("model feature_names do not match this build");
    }
  }
  const auto label = json.value("label_source", std::string("soft"));
  if (label != "soft" && label != "quantized") throw ValidationError("unknown label_source \"" + label + "\"");
  model.label_source = label == "soft" ? LabelSource::soft : LabelSource::quantized;

  const auto weights = read_array<kFeatureCount + 1>(json, "weights");
  std::copy_n(weights.begin(), kFeatureCount, model.weights.begin());
  model.bias = weights.back();
  model.feature_mean = read_array<kFeatureCount>(json, "feature_mean");
  model.feature_scale = read_array<kFeatureCount>(json, "feature_scale");
  for (double s : model.feature_scale)
    if (!(s > 0.0)) throw ValidationError("model feature_scale must be positive");
  model.ridge_lambda = json.value("ridge_lambda", 0.0);
  if (!(model.ridge_lambda >= 0.0)) throw ValidationError("model ridge_lambda must be >= 0");
  return model;
}

void save_model(const std::filesystem::path& path, const ScorerModel& model) {
  write_json_file(path, model_to_json(model));
}

ScorerModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

double eps_sle(double score_output, double target_level) {
  if (!std::isfinite(score_output) || !std::isfinite(target_level))
    throw ValidationError("eps_sle needs finite arguments");
  return std::abs(score_output - target_level);
}

double SimplicityScorer::score(const std::string& text) {
  return score_batch(std::span<const std::string>(&text, 1)).at(0);
}

BaselineScorer::BaselineScorer(ScorerModel model) : model_(std::move(model)) {
  if (model_.provenance != Provenance::baseline) throw ValidationError("BaselineScorer needs a baseline model");
}

std::vector<double> BaselineScorer::score_batch(std::span<const std::string> texts) {
  std::vector<double> scores;
  scores.reserve(texts.size());
  for (const auto& t : texts) scores.push_back(predict(model_, extract_features(t)));
  return scores;
}

double score(const ScorerModel& model, std::string_view text) {
  if (model.provenance == Provenance::baseline) return predict(model, extract_features(text));
  return make_scorer(model)->score(std::string(text));
}

std::unique_ptr<SimplicityScorer> make_scorer(const ScorerModel& model) {
  if (model.provenance == Provenance::baseline) return std::make_unique<BaselineScorer>(model);
  return std::make_unique<ExternalScorer>(parse_endpoint(model.endpoint));
}

}  // namespace simeval
