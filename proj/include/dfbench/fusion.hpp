#pragma once

// Score-combination rules used by challenge ensembles. All functions are pure.
// Weights are normalized internally, so ratios such as 1:2:2 can be passed as-is.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "dfbench/image.hpp"

namespace dfbench::fusion {

/// Raw two-class detector logits.
struct LogitPair {
  double l_real = 0.0;
  double l_fake = 0.0;
};

enum class ScoreSpace { probability, evidence };

struct ScoreVector {
  std::vector<double> scores;
  ScoreSpace space = ScoreSpace::probability;
};

/// Non-negative weights with a positive sum.
class FusionWeights {
 public:
  explicit FusionWeights(std::vector<double> weights);
  static FusionWeights uniform(std::size_t n);

  std::size_t size() const { return normalized_.size(); }
  /// Weights scaled to sum to 1.
  std::span<const double> normalized() const { return normalized_; }

 private:
  std::vector<double> normalized_;
};

/// w_k = A_k / sum_j A_j over per-model robust AUCs.
struct RobustWeighting {
  std::vector<double> robust_auc;
  std::vector<double> weights;

  FusionWeights as_fusion_weights() const { return FusionWeights(weights); }
};

enum class TtaView { original, hflip, rot90, center_crop, direct_resize };

std::string_view view_name(TtaView view);

/// Throws InvalidParameter unless `views` is non-empty and contains `original`.
void validate_views(std::span<const TtaView> views);

/// Renders one view. center_crop keeps the central `crop_fraction` of each
/// side; direct_resize squashes to (target, target) bilinearly.
ImageBuffer render_view(const ImageBuffer& img, TtaView view, double crop_fraction = 0.875, int target = 224);

double sigmoid(double x);

/// l_fake - l_real.
double logit_evidence(const LogitPair& lp);

/// sigmoid(sum_i w_i * e_i).
double mean_logit_fuse(std::span<const double> evidences, const FusionWeights& w);

/// sum_i w_i * p_i over probabilities in [0, 1].
double weighted_prob_fuse(std::span<const double> probs, const FusionWeights& w);

/// Nearest multiple of 0.1, halves rounded away from zero.
double quantize_prob(double p);

/// Weighted mean of already-quantized probabilities.
double discretized_vote(std::span<const double> quantized, const FusionWeights& w);

/// Ascending midranks mapped to rank / (N - 1), so ties share the averaged rank.
std::vector<double> rank_normalize(std::span<const double> scores);

/// Weighted sum of per-model rank_normalize() vectors.
std::vector<double> rank_fuse(std::span<const ScoreVector> models, const FusionWeights& w);

RobustWeighting robust_weights(std::span<const double> robust_aucs);

/// Mean over views of the weighted model sum. per_view[v][k] is model k's
/// probability on view v.
double tta_fuse(std::span<const std::vector<double>> per_view, const FusionWeights& w);

enum class PoolMode { mean, softmax };

/// Number of patches kept for a fraction: max(1, round(fraction * n)).
std::size_t topk_count(std::size_t n, double fraction);

/// Pools the top-k scores, k from `fraction` in (0, 1].
double topk_pool(std::span<const double> patch_scores, double fraction, PoolMode mode);
/// Pools the top `count` scores (clipped to the number of patches).
double topk_pool_count(std::span<const double> patch_scores, std::size_t count, PoolMode mode);

}  // namespace dfbench::fusion
