// Acceptance gate: one [PASS]/[FAIL] line per criterion, non-zero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dfbench/corpus.hpp"
#include "dfbench/degradation.hpp"
#include "dfbench/fusion.hpp"
#include "dfbench/metrics.hpp"
#include "dfbench/service.hpp"
#include "support.hpp"

using namespace dfbench;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail.str("");
      detail << what;
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Independent oracle: half-wins over every (fake, real) pair, in integers.
double oracle_auc(const LabeledScores& items) {
  long long half = 0, pairs = 0;
  for (const auto& f : items) {
    if (f.label != 1) continue;
    for (const auto& r : items) {
      if (r.label != 0) continue;
      ++pairs;
      half += f.score > r.score ? 2 : (f.score == r.score ? 1 : 0);
    }
  }
  return static_cast<double>(half) / (2.0 * static_cast<double>(pairs));
}

LabeledScores random_instance(RngStream& rng) {
  LabeledScores out;
  const auto n = rng.uniform_int(2, 200);
  const auto levels = rng.uniform_int(2, 50);  // few levels -> many ties
  for (std::int64_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(rng.uniform_int(0, levels)) / static_cast<double>(levels);
    out.push_back({"i" + std::to_string(i), s, static_cast<int>(rng.uniform_int(0, 1)), {}});
  }
  out[0].label = 0;
  out[1].label = 1;
  return out;
}

void auc_oracle(Outcome& o) {
  const auto t0 = Clock::now();
  RngStream rng(20260320, "acceptance/auc");
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto items = random_instance(rng);
    const double want = oracle_auc(items);
    worst = std::max({worst, std::fabs(auc(items) - want), std::fabs(auc_pairwise(items) - want)});
  }
  LabeledScores fixture{{"f0", 0.9, 1, {}}, {"f1", 0.4, 1, {}}, {"r0", 0.6, 0, {}}, {"r1", 0.1, 0, {}}};
  const double fx = auc(fixture);
  const double elapsed = seconds_since(t0);
  o.require(worst <= 1e-12, "max |fast - oracle| = " + std::to_string(worst));
  o.require(fx == 0.75, "fixture AUC " + std::to_string(fx) + " != 0.75");
  o.require(elapsed < 10.0, "runtime " + std::to_string(elapsed) + " s");
  if (o.pass) o.detail << "1000 instances, max error " << worst << ", fixture 0.75, " << elapsed << " s";
}

void auc_monotone(Outcome& o) {
  const std::vector<std::function<double(double)>> transforms = {
      [](double x) { return 3.0 * x - 1.0; },
      [](double x) { return std::exp(2.0 * x); },
      [](double x) { return x * x * x; },
      [](double x) { return std::log(x + 1e-3); },
      [](double x) { return 1.0 / (1.0 + std::exp(-8.0 * (x - 0.5))); },
  };
  RngStream rng(7, "acceptance/monotone");
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto items = random_instance(rng);
    const double base = auc(items);
    for (const auto& f : transforms) {
      auto moved = items;
      for (auto& it : moved) it.score = f(it.score);
      worst = std::max(worst, std::fabs(auc(moved) - base));
    }
  }
  o.require(worst <= 1e-12, "max deviation " + std::to_string(worst));
  if (o.pass) o.detail << "100 instances x 5 transforms, max deviation " << worst;
}

std::vector<DegradationStep> one_of_each() {
  return {GaussianNoise{15},       PoissonNoise{0.8},
          SpeckleNoise{0.2},       SaltPepper{0.05},
          Jpeg{40},                GaussianBlur{1.5},
          Resize{0.5, Interp::bicubic}, ColorContrast{10, 1.2},
          Grayscale{},             Pixelate{4},
          SelfOverlay{2.5, 0.3, 20, 10}, TextDistractor{"AB12", 2, 2, 1, 255, Rect{20, 15, 24, 18}}};
}

void degradation_determinism(Outcome& o) {
  const auto img = testing::natural_image(96, 80, 3);
  int checks = 0;
  for (const auto& step : one_of_each()) {
    const std::string name(kind_name(kind_of(step)));
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      DegradationRecipe recipe;
      recipe.seed = seed;
      recipe.steps = {step};
      const auto a = apply_recipe(img, recipe);
      const auto b = apply_recipe(img, recipe);
      o.require(a == b, name + " seed " + std::to_string(seed) + ": repeated application differs");
      const auto replay = apply_recipe(img, parse_recipe(serialize_recipe(recipe)));
      o.require(replay == a, name + " seed " + std::to_string(seed) + ": serialized recipe differs");
      ++checks;
    }
  }
  DegradationRecipe chain;
  chain.seed = 99;
  chain.steps = one_of_each();
  const auto parsed = parse_recipe(serialize_recipe(chain));
  o.require(parsed == chain, "full recipe does not round-trip structurally");
  o.require(apply_recipe(img, parsed) == apply_recipe(img, chain), "full recipe replay differs");
  if (o.pass) o.detail << checks << " kind/seed cases plus a 12-step chain, all bit-identical";
}

void noise_calibration(Outcome& o) {
  const ImageBuffer flat(256, 256, 1, 128);
  std::ostringstream seen;
  for (double sigma : {5.0, 20.0, 50.0}) {
    const auto out = apply_step(flat, GaussianNoise{sigma}, RngStream(11, "acceptance/gauss"));
    double s = 0, ss = 0;
    for (auto v : out.data()) {
      const double d = static_cast<double>(v) - 128.0;
      s += d;
      ss += d * d;
    }
    const double n = static_cast<double>(out.size());
    const double sd = std::sqrt(ss / n - (s / n) * (s / n));
    o.require(std::fabs(sd / sigma - 1.0) <= 0.05, "sigma " + std::to_string(sigma) + ": empirical " + std::to_string(sd));
    seen << "sigma " << sigma << "->" << sd << " ";
  }
  const ImageBuffer flat3(256, 256, 3, 128);
  for (double p : {0.01, 0.1, 0.5}) {
    const auto out = apply_step(flat3, SaltPepper{p}, RngStream(12, "acceptance/sp"));
    std::size_t changed = 0;
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x) changed += out.at(x, y, 0) != 128;
    const double n = 256.0 * 256.0;
    const double z = (static_cast<double>(changed) - n * p) / std::sqrt(n * p * (1 - p));
    o.require(std::fabs(z) <= 3.0, "salt-pepper p=" + std::to_string(p) + ": z=" + std::to_string(z));
    seen << "p " << p << " z=" << z << " ";
  }
  if (o.pass) o.detail << seen.str();
}

void identity_cases(Outcome& o) {
  const auto img = testing::natural_image(72, 64, 5);
  const RngStream rng(5, "acceptance/identity");
  o.require(apply_step(img, GaussianNoise{0}, rng) == img, "gaussian sigma=0");
  o.require(apply_step(img, SelfOverlay{2.0, 0.0, 10, 10}, rng) == img, "overlay alpha=0");
  o.require(apply_step(img, Pixelate{1}, rng) == img, "pixelate block=1");
  o.require(apply_step(img, ColorContrast{0, 1}, rng) == img, "brightness=0 contrast=1");
  if (o.pass) o.detail << "sigma=0, alpha=0, block=1, brightness=0/contrast=1 all identical";
}

void fusion_fixtures(Outcome& o) {
  using namespace dfbench::fusion;
  const double w = weighted_prob_fuse(std::vector<double>{0.2, 0.8}, FusionWeights({0.35, 0.65}));
  const double d = discretized_vote(std::vector<double>{0.9, 0.8, 0.7}, FusionWeights({1, 2, 2}));
  const double q = quantize_prob(0.87);
  const auto k = topk_count(196, 0.10);
  const std::vector<std::vector<double>> views{{0.2, 0.4}, {0.6, 0.8}};
  const double t = tta_fuse(views, FusionWeights({0.5, 0.5}));
  o.require(std::fabs(w - 0.59) <= 1e-12, "weighted " + std::to_string(w));
  o.require(std::fabs(d - 0.78) <= 1e-12, "discretized " + std::to_string(d));
  o.require(std::fabs(q - 0.9) <= 1e-12, "quantize " + std::to_string(q));
  o.require(k == 20, "topk count " + std::to_string(k));
  o.require(std::fabs(t - 0.5) <= 1e-12, "tta " + std::to_string(t));
  if (o.pass) o.detail << "0.59, 0.78, 0.9, 20, 0.5";
}

void rank_fusion_invariance(Outcome& o) {
  using namespace dfbench::fusion;
  const std::vector<std::function<double(double)>> transforms = {
      [](double x) { return std::exp(5.0 * x); },
      [](double x) { return std::log(x + 1e-6) * 3.0 - 2.0; },
      [](double x) { return x * x * x + x; },
  };
  RngStream rng(31, "acceptance/rank");
  const FusionWeights weights({0.55, 0.30, 0.15});
  int trials = 0;
  for (int t = 0; t < 100; ++t) {
    const auto n = rng.uniform_int(2, 60);
    std::vector<ScoreVector> models(3);
    for (auto& m : models)
      for (std::int64_t i = 0; i < n; ++i) m.scores.push_back(static_cast<double>(rng.uniform_int(0, 20)) / 20.0);
    const auto base = rank_fuse(models, weights);
    auto moved = models;
    for (auto& m : moved) {
      const auto& f = transforms[static_cast<std::size_t>(rng.uniform_int(0, 2))];
      for (auto& x : m.scores) x = f(x);
      m.space = ScoreSpace::evidence;
    }
    const auto after = rank_fuse(moved, weights);
    for (std::size_t i = 0; i < base.size(); ++i) {
      for (std::size_t j = 0; j < base.size(); ++j) {
        const int a = (base[i] > base[j]) - (base[i] < base[j]);
        const int b = (after[i] > after[j]) - (after[i] < after[j]);
        o.require(a == b, "trial " + std::to_string(t) + ": order of items " + std::to_string(i) + "," +
                              std::to_string(j) + " changed");
      }
    }
    ++trials;
  }
  if (o.pass) o.detail << trials << " trials, fused ordering unchanged";
}

void protocol_fixture(Outcome& o) {
  using namespace dfbench::service;
  const auto results = testing::load_challenge_results();
  testing::ServiceSandbox box;
  auto svc = box.open();
  const auto report = testing::replay_challenge(box, *svc, results, 7);
  const auto board = svc->leaderboard();
  o.require(board.size() == results.size(), "leaderboard has " + std::to_string(board.size()) + " entries");
  for (std::size_t i = 0; i < std::min(board.size(), results.size()); ++i) {
    o.require(board[i].team == results[i].team && board[i].rank == results[i].rank,
              "rank " + std::to_string(i + 1) + ": got " + board[i].team + ", want " + results[i].team);
  }
  bool inversion = false;
  for (const auto& s : report.shifts) inversion |= s.team == "AntInternational" && s.before == 1 && s.after == 3;
  o.require(inversion, "AntInternational did not move from public rank 1 to final rank 3");

  bool quota = false;
  try {
    svc->ingest_submission("ShallowReal", PhaseName::public_test, testing::exact_auc_rows(box.pub, 200000),
                           parse_timestamp("2026-03-19T18:00:00Z"));
  } catch (const Rejection& r) {
    quota = r.kind() == RejectionKind::quota_exceeded;
  }
  o.require(quota, "second public submission was not rejected for quota");

  bool window = false;
  const auto deadline = box.config.phases.at(PhaseName::public_test).closes_at;
  try {
    svc->ingest_submission("Latecomer", PhaseName::public_test, testing::exact_auc_rows(box.pub, 200000),
                           deadline + std::chrono::seconds(1));
  } catch (const Rejection& r) {
    window = r.kind() == RejectionKind::window_closed;
  }
  o.require(window, "post-deadline submission was not rejected");
  if (o.pass) o.detail << "14-team order reproduced, public-best team ranks 3, quota and window rejections raised";
}

void corpus_build(Outcome& o) {
  testing::TempDir dir("acceptance_corpus");
  const auto specs = challenge_specs(0.1);
  int needed = 0;
  for (const auto& s : specs) needed += s.total;
  const auto t0 = Clock::now();
  fs::create_directories(dir / "reals");
  for (int i = 0; i < needed; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "real_%05d", i);
    RngStream rng(2026, std::string("reals/") + name);
    write_png(synthetic_face(128, rng), dir / "reals" / (std::string(name) + ".png"));
  }
  const auto sources = scan_sources(dir / "reals");
  const auto profiles = load_profiles(DFBENCH_CONFIG_DIR "/profiles.yaml");
  const auto built = build_corpus(sources, specs, profiles, 2026, dir / "corpus");
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 300.0, "build took " + std::to_string(elapsed) + " s");

  const auto manifest = read_manifest(dir / "corpus" / "manifest.csv");
  std::map<Phase, std::pair<int, int>> counts;
  for (const auto& r : manifest) (r.label ? counts[r.split].second : counts[r.split].first)++;
  for (const auto& s : specs) {
    const auto [reals, fakes] = counts[s.split];
    o.require(reals + fakes == s.total && reals == fakes,
              std::string(phase_name(s.split)) + ": " + std::to_string(reals) + " real / " + std::to_string(fakes) +
                  " fake");
  }

  const auto prov = read_provenance(dir / "corpus" / "sources.csv");
  o.require(prov.size() == manifest.size(), "provenance size mismatch");
  std::set<std::string> used;
  for (std::size_t i = 0; i < std::min(prov.size(), manifest.size()); ++i) {
    o.require(used.insert(prov[i].source_id).second, "source reused: " + prov[i].source_id);
    const auto replay = apply_recipe(read_image(dir / "corpus" / prov[i].clean_path), manifest[i].recipe);
    o.require(replay == read_image(dir / "corpus" / manifest[i].path), "replay differs for " + manifest[i].id);
  }

  const auto view_text = format_view(participant_view(manifest, 17));
  const auto table = csv::parse_table(view_text);
  o.require(!table.has_column("label") && !table.has_column("fake_method"), "view has label columns");
  o.require(view_text.find(kPseudoFakeMethod) == std::string::npos, "view mentions the fake method");
  o.require(parse_view(view_text).size() == manifest.size(), "view row count mismatch");
  if (o.pass) {
    o.detail << manifest.size() << " items (100/10/100/100) balanced, replay exact, view label-free, " << elapsed
             << " s";
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, void (*)(Outcome&)>> criteria = {
      {"AUC oracle equivalence", auc_oracle},
      {"AUC monotone invariance", auc_monotone},
      {"Degradation determinism", degradation_determinism},
      {"Noise calibration", noise_calibration},
      {"Identity cases", identity_cases},
      {"Fusion fixtures", fusion_fixtures},
      {"Rank-fusion invariance", rank_fusion_invariance},
      {"Protocol fixture", protocol_fixture},
      {"Corpus build at 1/10 scale", corpus_build},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail.str("");
      o.detail << "exception: " << e.what();
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
