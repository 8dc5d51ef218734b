#include "dfbench/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "dfbench/errors.hpp"
#include "dfbench/kernels.hpp"

namespace dfbench::fusion {

namespace {

void check_length(std::size_t got, const FusionWeights& w, const char* what) {
  if (got != w.size()) {
    throw InvalidParameter(std::string(what) + ": " + std::to_string(got) + " inputs but " +
                           std::to_string(w.size()) + " weights");
  }
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter(std::string(what) + ": probability outside [0, 1]");
}

double weighted_sum(std::span<const double> values, const FusionWeights& w) {
  const auto weights = w.normalized();
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += weights[i] * values[i];
  return acc;
}

}  // namespace

FusionWeights::FusionWeights(std::vector<double> weights) : normalized_(std::move(weights)) {
  if (normalized_.empty()) throw InvalidParameter("fusion weights: empty");
  double sum = 0.0;
  for (double w : normalized_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidParameter("fusion weights must be finite and non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw InvalidParameter("fusion weights must have a positive sum");
  for (double& w : normalized_) w /= sum;
}

FusionWeights FusionWeights::uniform(std::size_t n) { return FusionWeights(std::vector<double>(n, 1.0)); }

std::string_view view_name(TtaView view) {
  switch (view) {
    case TtaView::original: return "original";
    case TtaView::hflip: return "hflip";
    case TtaView::rot90: return "rot90";
    case TtaView::center_crop: return "center_crop";
    case TtaView::direct_resize: return "direct_resize";
  }
  return "unknown";
}

void validate_views(std::span<const TtaView> views) {
  if (views.empty()) throw InvalidParameter("TTA view set is empty");
  if (std::find(views.begin(), views.end(), TtaView::original) == views.end()) {
    throw InvalidParameter("TTA view set must contain the original view");
  }
}

ImageBuffer render_view(const ImageBuffer& img, TtaView view, double crop_fraction, int target) {
  const int w = img.width(), h = img.height(), ch = img.channels();
  switch (view) {
    case TtaView::original: return img;
    case TtaView::hflip: {
      ImageBuffer out(w, h, ch);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int c = 0; c < ch; ++c) out.at(x, y, c) = img.at(w - 1 - x, y, c);
      return out;
    }
    case TtaView::rot90: {
      // Counter-clockwise quarter turn.
      ImageBuffer out(h, w, ch);
      for (int y = 0; y < w; ++y)
        for (int x = 0; x < h; ++x)
          for (int c = 0; c < ch; ++c) out.at(x, y, c) = img.at(w - 1 - y, x, c);
      return out;
    }
    case TtaView::center_crop: {
      if (!(crop_fraction > 0.0 && crop_fraction <= 1.0)) throw InvalidParameter("crop fraction must lie in (0, 1]");
      const Rect r = central_box(w, h, crop_fraction);
      ImageBuffer out(r.w, r.h, ch);
      for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x)
          for (int c = 0; c < ch; ++c) out.at(x, y, c) = img.at(r.x + x, r.y + y, c);
      return out;
    }
    case TtaView::direct_resize: {
      auto raster = kernels::parallel::resample(kernels::to_raster(img), target, target, Interp::bilinear);
      return ImageBuffer(target, target, ch, std::move(raster.data));
    }
  }
  throw InvalidParameter("unknown TTA view");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit_evidence(const LogitPair& lp) {
  if (!std::isfinite(lp.l_real) || !std::isfinite(lp.l_fake)) throw InvalidParameter("logits must be finite");
  return lp.l_fake - lp.l_real;
}

double mean_logit_fuse(std::span<const double> evidences, const FusionWeights& w) {
  check_length(evidences.size(), w, "mean_logit_fuse");
  for (double e : evidences)
    if (!std::isfinite(e)) throw InvalidParameter("mean_logit_fuse: evidence must be finite");
  return sigmoid(weighted_sum(evidences, w));
}

double weighted_prob_fuse(std::span<const double> probs, const FusionWeights& w) {
  check_length(probs.size(), w, "weighted_prob_fuse");
  for (double p : probs) check_probability(p, "weighted_prob_fuse");
  return std::clamp(weighted_sum(probs, w), 0.0, 1.0);
}

double quantize_prob(double p) {
  check_probability(p, "quantize_prob");
  return std::round(p * 10.0) / 10.0;
}

double discretized_vote(std::span<const double> quantized, const FusionWeights& w) {
  check_length(quantized.size(), w, "discretized_vote");
  for (double q : quantized) {
    check_probability(q, "discretized_vote");
    if (std::fabs(q * 10.0 - std::round(q * 10.0)) > 1e-9) {
      throw InvalidParameter("discretized_vote: input is not on the 0.1 grid; quantize first");
    }
  }
  return std::clamp(weighted_sum(quantized, w), 0.0, 1.0);
}

std::vector<double> rank_normalize(std::span<const double> scores) {
  const std::size_t n = scores.size();
  if (n < 2) throw InvalidParameter("rank_normalize: need at least two scores");
  for (double s : scores)
    if (!std::isfinite(s)) throw InvalidParameter("rank_normalize: scores must be finite");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0;
    for (std::size_t k = i; k < j; ++k) out[order[k]] = midrank / static_cast<double>(n - 1);
    i = j;
  }
  return out;
}

std::vector<double> rank_fuse(std::span<const ScoreVector> models, const FusionWeights& w) {
  check_length(models.size(), w, "rank_fuse");
  const std::size_t n = models.front().scores.size();
  for (const auto& m : models)
    if (m.scores.size() != n) throw InvalidParameter("rank_fuse: score vectors differ in length");
  const auto weights = w.normalized();
  std::vector<double> fused(n, 0.0);
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto ranks = rank_normalize(models[k].scores);
    for (std::size_t i = 0; i < n; ++i) fused[i] += weights[k] * ranks[i];
  }
  return fused;
}

RobustWeighting robust_weights(std::span<const double> robust_aucs) {
  if (robust_aucs.empty()) throw InvalidParameter("robust_weights: no models");
  RobustWeighting out;
  out.robust_auc.assign(robust_aucs.begin(), robust_aucs.end());
  double sum = 0.0;
  for (double a : robust_aucs) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidParameter("robust_weights: robust AUC must be positive");
    sum += a;
  }
  for (double a : robust_aucs) out.weights.push_back(a / sum);
  return out;
}

double tta_fuse(std::span<const std::vector<double>> per_view, const FusionWeights& w) {
  if (per_view.empty()) throw InvalidParameter("tta_fuse: no views");
  double acc = 0.0;
  for (std::size_t v = 0; v < per_view.size(); ++v) {
    if (per_view[v].size() != w.size()) {
      throw InvalidParameter("tta_fuse: view " + std::to_string(v) + " is missing model scores");
    }
    for (double p : per_view[v]) check_probability(p, "tta_fuse");
    acc += weighted_sum(per_view[v], w);
  }
  return std::clamp(acc / static_cast<double>(per_view.size()), 0.0, 1.0);
}

std::size_t topk_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidParameter("top-k fraction must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

double topk_pool_count(std::span<const double> patch_scores, std::size_t count, PoolMode mode) {
  if (patch_scores.empty()) throw InvalidParameter("topk_pool: no patch scores");
  if (count == 0) throw InvalidParameter("topk_pool: count must be >= 1");
  count = std::min(count, patch_scores.size());
  std::vector<double> sorted(patch_scores.begin(), patch_scores.end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(count), sorted.end(),
                    std::greater<>());
  sorted.resize(count);
  if (mode == PoolMode::mean) {
    return std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(count);
  }
  const double top = sorted.front();
  double num = 0.0, den = 0.0;
  for (double s : sorted) {
    const double e = std::exp(s - top);
    num += s * e;
    den += e;
  }
  return num / den;
}

double topk_pool(std::span<const double> patch_scores, double fraction, PoolMode mode) {
  return topk_pool_count(patch_scores, topk_count(patch_scores.size(), fraction), mode);
}

}  // namespace dfbench::fusion
