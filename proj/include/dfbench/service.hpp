#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfbench/errors.hpp"
#include "dfbench/profile.hpp"

namespace dfbench::service {

using Timestamp = std::chrono::sys_seconds;
/// Injected time source.
using Clock = std::function<Timestamp()>;

Clock system_clock();

/// "YYYY-MM-DDTHH:MM:SSZ" (UTC only).
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

enum class PhaseName { validation, public_test, private_test };

std::string_view phase_label(PhaseName phase);
/// Throws ParseError for unknown names.
PhaseName parse_phase_name(std::string_view name);

enum class QuotaPeriod { phase, day };

struct PhaseConfig {
  PhaseName name = PhaseName::validation;
  Timestamp opens_at{};
  Timestamp closes_at{};  // inclusive
  int quota = 1;
  QuotaPeriod quota_period = QuotaPeriod::phase;
  /// Labeled manifest; server side only.
  std::filesystem::path manifest;
  /// Manifest split holding this phase's items.
  Phase split = Phase::val;
};

struct ServiceConfig {
  std::map<PhaseName, PhaseConfig> phases;
  /// Operator-produced private score files, one <team>.csv per team.
  std::filesystem::path private_scores_dir;
  std::string operator_token_env = "DFBENCH_OPERATOR_TOKEN";
  /// Enforces the 24 h public window and single public submission.
  bool challenge_replica = false;
};

/// Throws InvalidParameter on a broken config.
void validate_config(const ServiceConfig& config);
/// Relative paths are resolved against `base_dir`.
ServiceConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir = {});
ServiceConfig load_config(const std::filesystem::path& path);

struct SubmissionRow {
  std::string id;
  double score = 0.0;
};

enum class RejectionKind {
  malformed,
  unknown_phase,
  phase_not_accepting,
  window_closed,
  quota_exceeded,
  duplicate_id,
  extra_id,
  missing_id,
  score_out_of_range,
};

/// Kebab-case wire name, e.g. "quota-exceeded".
std::string_view rejection_name(RejectionKind kind);

class Rejection : public Error {
 public:
  Rejection(RejectionKind kind, std::string message, std::vector<std::string> ids = {});
  RejectionKind kind() const { return kind_; }
  /// Offending ids, for the id-level kinds.
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  RejectionKind kind_;
  std::vector<std::string> ids_;
};

/// Header `id,score`. Throws Rejection(malformed) on bad structure or
/// unparseable numbers; range is checked at ingest.
std::vector<SubmissionRow> parse_submission(std::string_view csv_text);
std::string format_submission(std::span<const SubmissionRow> rows);
std::vector<SubmissionRow> read_submission(const std::filesystem::path& path);
void write_submission(std::span<const SubmissionRow> rows, const std::filesystem::path& path);

/// Coverage, duplicate and range checks against the expected id set.
void check_rows(std::span<const SubmissionRow> rows, const std::map<std::string, int>& labels);

/// Team names become file names: 1-64 printable chars, no path separators.
void validate_team(std::string_view team);

struct Receipt {
  std::uint64_t id = 0;
  std::string team;
  PhaseName phase = PhaseName::validation;
  Timestamp received_at{};
  std::optional<double> auc;
};

struct LeaderboardEntry {
  std::string team;
  std::optional<double> public_auc;
  std::optional<double> private_auc;
  /// Time of the public submission; ranking tie-break.
  Timestamp submitted_at{};
  std::uint64_t receipt = 0;
  int rank = 0;
};

/// Private AUC when present, else public, descending; every team with a
/// private score ranks above every team without one. Ties go to the earlier
/// submission, then the lower receipt, then team name. Assigns ranks 1..n.
std::vector<LeaderboardEntry> rank_entries(std::vector<LeaderboardEntry> entries);

enum class LeaderboardView { final_standings, validation };

/// Latest scored submission per team. The final view pairs public_test with
/// private_test scores; the validation view ranks validation scores alone.
std::vector<LeaderboardEntry> compute_leaderboard(std::span<const Receipt> receipts, LeaderboardView view);

struct StoredSubmission {
  Receipt receipt;
  /// Relative to the data directory.
  std::string artifact;
};

/// Replays <data_dir>/log.jsonl. A torn final record is skipped.
std::vector<StoredSubmission> read_store(const std::filesystem::path& data_dir);

struct RankShift {
  std::string team;
  int before = 0;
  int after = 0;
  bool flagged = false;  // moved 3 or more positions
};

struct RescoreReport {
  std::size_t requested_k = 0;
  std::size_t applied_k = 0;
  std::vector<std::string> rescored;
  std::vector<std::string> warnings;
  std::vector<RankShift> shifts;
  std::vector<LeaderboardEntry> leaderboard;
};

std::vector<RankShift> rank_shifts(std::span<const LeaderboardEntry> before, std::span<const LeaderboardEntry> after,
                                   int threshold = 3);

/// Phase-aware submission store and scorer. The record log
/// (<data>/log.jsonl) is the source of truth and is replayed on startup;
/// submissions/ and index/leaderboard.json are derived from it.
class BenchService {
 public:
  BenchService(ServiceConfig config, std::filesystem::path data_dir, Clock clock = system_clock());

  const ServiceConfig& config() const { return config_; }

  /// Validates and persists; throws Rejection. Uses the injected clock.
  Receipt ingest_submission(const std::string& team, PhaseName phase, std::span<const SubmissionRow> rows);
  Receipt ingest_submission(const std::string& team, PhaseName phase, std::span<const SubmissionRow> rows,
                            Timestamp now);

  /// AUC of a persisted receipt against hidden labels. The first result is
  /// committed to the log; later calls recompute the same value.
  double score_submission(std::uint64_t receipt);

  std::optional<Receipt> receipt(std::uint64_t id) const;
  std::vector<LeaderboardEntry> leaderboard(LeaderboardView view = LeaderboardView::final_standings) const;

  /// Scores the operator's private files for the top `k` public entries.
  /// k larger than the number of ranked teams is clipped with a warning.
  RescoreReport rescore_private(std::size_t k);

  /// Compares against the token in the configured environment variable.
  /// False when the variable is unset or empty.
  bool operator_token_matches(std::string_view token) const;

 private:
  const std::map<std::string, int>& labels_for(PhaseName phase) const;
  std::uint64_t commit_submission(const std::string& team, PhaseName phase, std::span<const SubmissionRow> rows,
                                  Timestamp now);
  void append_log(const std::string& line);
  void write_index() const;
  std::vector<LeaderboardEntry> leaderboard_locked(LeaderboardView view) const;

  ServiceConfig config_;
  std::filesystem::path data_dir_;
  Clock clock_;
  std::map<PhaseName, std::map<std::string, int>> labels_;
  mutable std::mutex mutex_;  // single writer
  std::map<std::uint64_t, StoredSubmission> submissions_;
  std::uint64_t next_receipt_ = 1;
};

}  // namespace dfbench::service
