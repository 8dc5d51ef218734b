#include "dfbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "dfbench/errors.hpp"
#include "dfbench/rng.hpp"

namespace dfbench {

namespace {

struct Counts {
  std::size_t fakes = 0;
  std::size_t reals = 0;
};

Counts check(const LabeledScores& items) {
  Counts n;
  for (const auto& it : items) {
    if (!std::isfinite(it.score)) throw UndefinedMetric("AUC: non-finite score for '" + it.id + "'");
    if (it.label == 1) {
      ++n.fakes;
    } else if (it.label == 0) {
      ++n.reals;
    } else {
      throw UndefinedMetric("AUC: label must be 0 or 1 for '" + it.id + "'");
    }
  }
  if (n.fakes == 0 || n.reals == 0) throw UndefinedMetric("AUC undefined: both classes must be present");
  return n;
}

// Midrank AUC over (score, label) pairs; pairs are sorted in place.
double rank_auc(std::vector<std::pair<double, int>>& pairs, std::size_t fakes, std::size_t reals) {
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // Twice the sum of fake ranks; midranks stay integral.
  std::uint64_t twice_rank_sum = 0;
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i;
    std::size_t tied_fakes = 0;
    while (j < pairs.size() && pairs[j].first == pairs[i].first) {
      tied_fakes += pairs[j].second == 1;
      ++j;
    }
    // Ranks i+1 .. j share the midrank (i + 1 + j) / 2.
    twice_rank_sum += tied_fakes * (i + 1 + j);
    i = j;
  }
  const double nf = static_cast<double>(fakes);
  const double u_twice = static_cast<double>(twice_rank_sum) - nf * (nf + 1.0);
  return u_twice / (2.0 * nf * static_cast<double>(reals));
}

}  // namespace

double auc(const LabeledScores& items) {
  const Counts n = check(items);
  std::vector<std::pair<double, int>> pairs;
  pairs.reserve(items.size());
  for (const auto& it : items) pairs.emplace_back(it.score, it.label);
  return rank_auc(pairs, n.fakes, n.reals);
}

double auc_pairwise(const LabeledScores& items) {
  const Counts n = check(items);
  double wins = 0.0;
  for (const auto& f : items) {
    if (f.label != 1) continue;
    for (const auto& r : items) {
      if (r.label != 0) continue;
      if (f.score > r.score) {
        wins += 1.0;
      } else if (f.score == r.score) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(n.fakes) * static_cast<double>(n.reals));
}

std::map<std::string, double> per_group_auc(const LabeledScores& items) {
  LabeledScores reals;
  std::map<std::string, LabeledScores> fakes_by_group;
  for (const auto& it : items) {
    if (it.label == 0) {
      reals.push_back(it);
    } else {
      for (const auto& g : it.groups) fakes_by_group[g].push_back(it);
    }
  }
  std::map<std::string, double> out;
  for (auto& [group, fakes] : fakes_by_group) {
    LabeledScores subset = reals;
    subset.insert(subset.end(), fakes.begin(), fakes.end());
    out[group] = auc(subset);
  }
  return out;
}

Interval bootstrap_ci(const LabeledScores& items, int n_resamples, double level, std::uint64_t seed) {
  if (n_resamples < 100) throw InvalidParameter("bootstrap_ci: need at least 100 resamples");
  if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("bootstrap_ci: level must lie in (0, 1)");
  check(items);
  std::vector<double> fake_scores, real_scores;
  for (const auto& it : items) (it.label == 1 ? fake_scores : real_scores).push_back(it.score);

  std::vector<double> aucs(static_cast<std::size_t>(n_resamples));
  std::vector<std::exception_ptr> errors(aucs.size());
#pragma omp parallel for schedule(static)
  for (int b = 0; b < n_resamples; ++b) {
    try {
      RngStream rng(seed, "bootstrap/" + std::to_string(b));
      std::vector<std::pair<double, int>> pairs;
      pairs.reserve(items.size());
      // Stratified: fakes and reals drawn separately.
      for (std::size_t k = 0; k < fake_scores.size(); ++k) {
        pairs.emplace_back(fake_scores[rng.uniform_int(0, static_cast<std::int64_t>(fake_scores.size()) - 1)], 1);
      }
      for (std::size_t k = 0; k < real_scores.size(); ++k) {
        pairs.emplace_back(real_scores[rng.uniform_int(0, static_cast<std::int64_t>(real_scores.size()) - 1)], 0);
      }
      aucs[b] = rank_auc(pairs, fake_scores.size(), real_scores.size());
    } catch (...) {
      errors[b] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::sort(aucs.begin(), aucs.end());
  // Linear interpolation between order statistics.
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(aucs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, aucs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return aucs[lo] + (aucs[hi] - aucs[lo]) * frac;
  };
  const double tail = (1.0 - level) / 2.0;
  return Interval{quantile(tail), quantile(1.0 - tail)};
}

}  // namespace dfbench
