#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "simeval/corpus.hpp"

namespace simeval {

// A sentence of a level group: index into the corpus plus its raw FKGL.
struct LevelMember {
  std::size_t index = 0;
  double raw_fkgl = 0.0;
};

struct LevelGroup {
  int level = 0;
  std::vector<LevelMember> members;
};

// Percentile of `values` by linear interpolation between closest ranks
// (rank = p/100 * (n-1) on the sorted sample). `values` must be non-empty.
double percentile(std::span<const double> values, double p);

// Drops members whose FKGL lies strictly below the `lo`-th or strictly above
// the `hi`-th percentile of the group. If that would empty the group it is
// returned unchanged. Throws ValidationError for an empty group.
LevelGroup filter_percentiles(const LevelGroup& group, double lo = 1.0, double hi = 99.0);

// Same cut, but with percentile bounds supplied by the caller (used for the
// corpus-wide filter).
LevelGroup filter_range(const LevelGroup& group, double min_fkgl, double max_fkgl);

// Negated FKGL rescaled to [0, 2] within the group, aligned with
// `group.members`. A group with a single distinct value maps to 1.0.
std::vector<double> rescale_group(const LevelGroup& group);

// Soft labels f' - mean(f') + level, aligned with `rescaled`.
std::vector<double> soften_group(int level, std::span<const double> rescaled);

enum class FilterScope { per_level, global };

struct SofteningOptions {
  bool filter = true;
  double lo = 1.0;
  double hi = 99.0;
  FilterScope scope = FilterScope::per_level;
};

struct LevelSummary {
  int level = 0;
  std::size_t kept = 0;
  std::size_t excluded = 0;
  double mean_rescaled = 0.0;
};

struct SofteningResult {
  // Retained records in input order, each with soft_label set.
  std::vector<SentenceRecord> records;
  // Raw FKGL of each retained record.
  std::vector<double> fkgl;
  std::vector<LevelSummary> levels;
};

// Buckets records by level. Levels without sentences yield empty groups.
std::array<LevelGroup, kLevelCount> group_by_level(const std::vector<SentenceRecord>& records,
                                                   std::span<const double> fkgl);

// Full label-softening pass over a training corpus.
SofteningResult soften_labels(const std::vector<SentenceRecord>& records,
                              const SofteningOptions& options = {});

}  // namespace simeval
