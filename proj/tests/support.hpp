#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dfbench/corpus.hpp"
#include "dfbench/csv.hpp"
#include "dfbench/image.hpp"
#include "dfbench/rng.hpp"
#include "dfbench/service.hpp"

namespace dfbench::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("dfbench_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Smooth gradients plus mild texture; compresses like a photograph.
inline ImageBuffer natural_image(int w, int h, std::uint64_t seed = 1) {
  ImageBuffer img(w, h, 3);
  RngStream rng(seed, "natural");
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / w, fy = static_cast<double>(y) / h;
      const double base[3] = {
          120 + 60 * std::sin(6.0 * fx) * std::cos(4.0 * fy),
          110 + 50 * std::cos(5.0 * fx + 2.0 * fy),
          100 + 40 * std::sin(3.0 * fy + 1.0),
      };
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = to_sample(base[c] + rng.normal(0.0, 2.0));
    }
  }
  return img;
}

inline ImageBuffer random_image(int w, int h, int ch, std::uint64_t seed) {
  ImageBuffer img(w, h, ch);
  RngStream rng(seed, "random_image");
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return img;
}

/// Manifest of n reals then n fakes in `split`, ids "<prefix>_<i>".
inline Manifest balanced_manifest(Phase split, int n_per_class, const std::string& prefix) {
  Manifest m;
  for (int i = 0; i < 2 * n_per_class; ++i) {
    ManifestRecord r;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%05d", prefix.c_str(), i);
    r.id = buf;
    r.path = "images/" + r.id + ".png";
    r.split = split;
    r.label = i < n_per_class ? 0 : 1;
    r.fake_method = r.label ? std::string(kPseudoFakeMethod) : std::string(kRealMethod);
    m.push_back(r);
  }
  return m;
}

/// Scores whose AUC against `m` is exactly wins / (n_fake * n_real).
/// Reals get (i+1)/(n+1); a fake beating c reals gets (c+0.5)/(n+1).
inline std::vector<service::SubmissionRow> exact_auc_rows(const Manifest& m, long long wins) {
  std::vector<const ManifestRecord*> reals, fakes;
  for (const auto& r : m) (r.label ? fakes : reals).push_back(&r);
  const auto n = static_cast<long long>(reals.size());
  const auto nf = static_cast<long long>(fakes.size());
  std::vector<service::SubmissionRow> rows;
  for (long long i = 0; i < n; ++i) {
    rows.push_back({reals[i]->id, static_cast<double>(i + 1) / static_cast<double>(n + 1)});
  }
  for (long long j = 0; j < nf; ++j) {
    const long long c = wins / nf + (j < wins % nf ? 1 : 0);
    rows.push_back({fakes[j]->id, (static_cast<double>(c) + 0.5) / static_cast<double>(n + 1)});
  }
  return rows;
}

struct ResultRow {
  int rank = 0;
  std::string team;
  double public_auc = 0.0;
  std::optional<double> private_auc;
};

inline std::vector<ResultRow> load_challenge_results() {
  const auto table = csv::read_table(std::filesystem::path(DFBENCH_FIXTURE_DIR) / "challenge_results.csv");
  std::vector<ResultRow> rows;
  for (const auto& r : table.rows) {
    ResultRow t;
    t.rank = std::stoi(r[table.column("rank")]);
    t.team = r[table.column("team")];
    t.public_auc = std::stod(r[table.column("public_auc")]);
    const auto& priv = r[table.column("private_auc")];
    if (!priv.empty()) t.private_auc = std::stod(priv);
    rows.push_back(t);
  }
  return rows;
}

/// AUC value -> win count for 500 x 500 items; every fixture value is a multiple of 1/250000.
inline long long wins_for(double auc_value) { return std::llround(auc_value * 250000.0); }

/// Settable clock shared with a BenchService.
struct ManualClock {
  std::shared_ptr<service::Timestamp> now = std::make_shared<service::Timestamp>();

  void set(std::string_view text) { *now = service::parse_timestamp(text); }
  service::Clock fn() const {
    return [t = now] { return *t; };
  }
};

/// Labeled manifest plus a challenge-replica config: validation (daily quota),
/// a 24 h single-shot public phase and an operator-only private phase.
struct ServiceSandbox {
  TempDir dir{"service"};
  Manifest val, pub, priv;
  service::ServiceConfig config;
  ManualClock clock;

  explicit ServiceSandbox(int n_per_class = 500, int n_val = 10) {
    val = balanced_manifest(Phase::val, n_val, "val");
    pub = balanced_manifest(Phase::public_test, n_per_class, "pub");
    priv = balanced_manifest(Phase::private_test, n_per_class, "priv");
    Manifest all = val;
    all.insert(all.end(), pub.begin(), pub.end());
    all.insert(all.end(), priv.begin(), priv.end());
    write_manifest(all, dir / "manifest.csv");
    std::filesystem::create_directories(dir / "private_scores");

    using service::PhaseName;
    config.challenge_replica = true;
    config.private_scores_dir = dir / "private_scores";
    config.operator_token_env = "DFBENCH_TEST_OPERATOR_TOKEN";
    auto& v = config.phases[PhaseName::validation];
    v.name = PhaseName::validation;
    v.opens_at = service::parse_timestamp("2026-01-10T00:00:00Z");
    v.closes_at = service::parse_timestamp("2026-03-18T23:59:59Z");
    v.quota = 10;
    v.quota_period = service::QuotaPeriod::day;
    v.manifest = dir / "manifest.csv";
    v.split = Phase::val;
    auto& p = config.phases[PhaseName::public_test];
    p.name = PhaseName::public_test;
    p.opens_at = service::parse_timestamp("2026-03-19T00:00:00Z");
    p.closes_at = service::parse_timestamp("2026-03-20T00:00:00Z");
    p.quota = 1;
    p.manifest = dir / "manifest.csv";
    p.split = Phase::public_test;
    auto& q = config.phases[PhaseName::private_test];
    q.name = PhaseName::private_test;
    q.manifest = dir / "manifest.csv";
    q.split = Phase::private_test;
    clock.set("2026-03-19T12:00:00Z");
  }

  std::unique_ptr<service::BenchService> open(const std::string& data = "data") const {
    return std::make_unique<service::BenchService>(config, dir / data, clock.fn());
  }

  void write_private(const std::string& team, const std::vector<service::SubmissionRow>& rows) const {
    service::write_submission(rows, config.private_scores_dir / (team + ".csv"));
  }
};

/// Replays the challenge results fixture: every team submits once to the public
/// phase, the operator drops private files for the teams that have them, and
/// the top-k rescore runs. Returns the rescore report.
inline service::RescoreReport replay_challenge(ServiceSandbox& box, service::BenchService& svc,
                                               const std::vector<ResultRow>& results, std::size_t k) {
  int minute = 0;
  for (const auto& r : results) {
    const auto t = service::parse_timestamp("2026-03-19T12:00:00Z") + std::chrono::minutes(minute++);
    const auto receipt =
        svc.ingest_submission(r.team, service::PhaseName::public_test, exact_auc_rows(box.pub, wins_for(r.public_auc)), t);
    svc.score_submission(receipt.id);
    if (r.private_auc) box.write_private(r.team, exact_auc_rows(box.priv, wins_for(*r.private_auc)));
  }
  return svc.rescore_private(k);
}

}  // namespace dfbench::testing
