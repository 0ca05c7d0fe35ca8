#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simeval/corpus.hpp"
#include "simeval/jsonl.hpp"

namespace simeval {

inline constexpr std::size_t kFeatureCount = 6;
inline constexpr int kFeatureSchemaVersion = 1;

// [words_per_sentence, mean_chars_per_word, mean_syllables_per_word, fkgl,
//  long_word_ratio, log(1 + word_count)]
using FeatureVector = std::array<double, kFeatureCount>;

const std::array<std::string_view, kFeatureCount>& feature_names();

// Long words have at least this many characters.
inline constexpr std::size_t kLongWordChars = 7;

FeatureVector extract_features(std::string_view text);

enum class Provenance { baseline, external };
enum class LabelSource { soft, quantized };

std::string_view to_string(Provenance p);
std::string_view to_string(LabelSource s);

struct ScorerModel {
  // Coefficients on standardized features, then the intercept.
  std::array<double, kFeatureCount> weights{};
  double bias = 0.0;
  // Training-set standardization; a constant feature gets scale 1.
  std::array<double, kFeatureCount> feature_mean{};
  std::array<double, kFeatureCount> feature_scale{1, 1, 1, 1, 1, 1};
  double ridge_lambda = 0.0;
  int schema_version = kFeatureSchemaVersion;
  Provenance provenance = Provenance::baseline;
  LabelSource label_source = LabelSource::soft;
  // Only for external models: endpoint string understood by parse_endpoint.
  std::string endpoint;
};

double predict(const ScorerModel& model, const FeatureVector& features);

// Ridge fit on standardized features with an unpenalized intercept, solved
// through the normal equations. Throws NumericError if the system is
// singular (only possible at lambda == 0 or with an all-constant design).
ScorerModel fit_ridge(std::span<const FeatureVector> features, std::span<const double> targets,
                      double lambda);

struct DevSet {
  std::vector<FeatureVector> features;
  std::vector<std::string> doc_ids;
  std::map<std::string, int> doc_levels;
};

struct LambdaTrial {
  double lambda = 0.0;
  bool solved = false;
  double dev_doc_mae = 0.0;
};

struct TrainingResult {
  ScorerModel model;
  std::vector<LambdaTrial> trials;
  std::vector<std::string> warnings;
};

inline const std::vector<double> kDefaultLambdaGrid{0.0, 0.01, 0.1, 1.0, 10.0};

// Fits one model per lambda and keeps the one with the lowest dev Doc-MAE
// (ties go to the smaller lambda). Lambdas whose system is singular are
// skipped with a warning; if none can be solved, throws NumericError.
TrainingResult train_on_features(std::span<const FeatureVector> features,
                                 std::span<const double> targets, const DevSet& dev,
                                 std::vector<double> lambda_grid);

DevSet make_dev_set(const std::vector<SentenceRecord>& dev);

// Extracts features from the corpus and delegates to train_on_features.
// With LabelSource::soft every training record needs a soft_label.
TrainingResult train_baseline(const std::vector<SentenceRecord>& train,
                              const std::vector<SentenceRecord>& dev,
                              std::vector<double> lambda_grid = kDefaultLambdaGrid,
                              LabelSource labels = LabelSource::soft);

Json model_to_json(const ScorerModel& model);
// Throws ValidationError on a schema version mismatch or malformed model.
ScorerModel model_from_json(const Json& json);
void save_model(const std::filesystem::path& path, const ScorerModel& model);
ScorerModel load_model(const std::filesystem::path& path);

// Simplicity gain of an output over its input.
inline double delta_sle(double score_output, double score_input) { return score_output - score_input; }

// Distance of a score from a target simplicity level.
double eps_sle(double score_output, double target_level);

// Anything that maps sentences to simplicity scores, in order.
class SimplicityScorer {
 public:
  virtual ~SimplicityScorer() = default;
  virtual std::vector<double> score_batch(std::span<const std::string> texts) = 0;
  double score(const std::string& text);
};

class BaselineScorer : public SimplicityScorer {
 public:
  explicit BaselineScorer(ScorerModel model);
  std::vector<double> score_batch(std::span<const std::string> texts) override;
  const ScorerModel& model() const { return model_; }

 private:
  ScorerModel model_;
};

double score(const ScorerModel& model, std::string_view text);

// Baseline models score in-process; external models connect to their
// endpoint.
std::unique_ptr<SimplicityScorer> make_scorer(const ScorerModel& model);

}  // namespace simeval
