#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simeval/corpus.hpp"

namespace simeval {

// Mean absolute error. Throws ValidationError on empty or mismatched input.
double mae(std::span<const double> predictions, std::span<const double> labels);

// Document-level MAE: each document's estimate is the mean of its sentence
// predictions, and documents are weighted equally. `doc_ids` is aligned with
// `predictions`. Every document in `doc_levels` must have a prediction and
// vice versa.
double doc_mae(std::span<const double> predictions, std::span<const std::string> doc_ids,
               const std::map<std::string, int>& doc_levels);

// Round half away from zero, then clamp to the level range.
int round_to_level(double prediction);

// Macro F1 of rounded predictions, averaged over the classes present in the
// gold labels.
double f1_rounded(std::span<const double> predictions, std::span<const int> labels);

struct RegressionReport {
  double mae = 0.0;
  double doc_mae = 0.0;
  double f1 = 0.0;
  std::size_t sentences = 0;
  std::size_t documents = 0;
};

// All three accuracy numbers against the records' quantized levels.
RegressionReport evaluate_regression(std::span<const double> predictions,
                                     const std::vector<SentenceRecord>& records);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

struct PearsonResult {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// Sample Pearson correlation with a two-sided t-test. Throws ValidationError
// for n < 3, mismatched lengths, or a zero-variance argument.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

struct RatedItem {
  std::string item_id;
  std::string input_text;
  std::string output_text;
  double simplicity = 0.0;
  std::optional<double> fluency;
  std::optional<double> adequacy;
  // Precomputed metric columns, plus "delta_sle" once scored.
  std::map<std::string, std::optional<double>> metric_scores;
};

enum class RatingDim { simplicity, fluency, adequacy };

// Keeps items rated at least mean + z * sd on every dimension in `dims`
// (population sd over `items`), then drops `exclude_ids`.
std::vector<RatedItem> filter_ratings(const std::vector<RatedItem>& items,
                                      std::span<const RatingDim> dims, double z_threshold,
                                      std::span<const std::string> exclude_ids = {});

struct CorrelationRow {
  std::string metric;
  double r = 0.0;
  double abs_r = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// Pearson correlation of every metric column with the human rating on
// `target`, sorted by |r| descending (then by name).
std::vector<CorrelationRow> correlate_metrics(const std::vector<RatedItem>& items,
                                              RatingDim target = RatingDim::simplicity);

// "**" below 0.001, "*" below 0.01, else empty.
std::string significance_marker(double p_value);

struct Histogram {
  double bin_width = 0.0;
  // Bin index k covers [k * bin_width, (k + 1) * bin_width).
  std::map<std::int64_t, std::size_t> counts;
  std::size_t total = 0;
  double entropy_nats = 0.0;

  double lower_edge(std::int64_t bin) const { return static_cast<double>(bin) * bin_width; }
};

// Left-closed histogram and the Shannon entropy (nats) of its normalized
// counts. Values within 1e-9 bin widths below an edge land on that edge.
Histogram distribution_summary(std::span<const double> values, double bin_width);

}  // namespace simeval
