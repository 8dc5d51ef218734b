#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dfbench {

struct ScoredItem {
  std::string id;
  double score = 0.0;
  int label = 0;  // 1 = fake (positive class)
  /// Group tags (degradation kinds, fake method, ...). May be empty.
  std::vector<std::string> groups;
};

using LabeledScores = std::vector<ScoredItem>;

/// ROC-AUC in Mann-Whitney form: over all (fake, real) pairs, a win counts 1
/// and a tie 0.5. Computed from midranks in O(n log n).
/// Throws UndefinedMetric when either class is absent or a score is not finite.
double auc(const LabeledScores& items);

/// O(n_fake * n_real) pairwise definition; kept as the oracle for auc().
double auc_pairwise(const LabeledScores& items);

/// AUC per group tag, pairing that group's fakes against every real item.
/// Groups with no fakes are omitted.
std::map<std::string, double> per_group_auc(const LabeledScores& items);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Percentile interval of the AUC over stratified bootstrap resamples
/// (fakes and reals resampled separately). Resample i draws from
/// RngStream(seed, "bootstrap/<i>"), so the result is independent of threading.
Interval bootstrap_ci(const LabeledScores& items, int n_resamples, double level, std::uint64_t seed);

}  // namespace dfbench
