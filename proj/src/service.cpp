#include "dfbench/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "dfbench/corpus.hpp"
#include "dfbench/csv.hpp"
#include "dfbench/metrics.hpp"
#include "json.hpp"

namespace dfbench::service {

namespace fs = std::filesystem;
namespace chr = std::chrono;
using json = nlohmann::ordered_json;

Clock system_clock() {
  return [] { return chr::floor<chr::seconds>(chr::system_clock::now()); };
}

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
  int v = 0;
  const auto* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, v);
  if (ec != std::errc{} || ptr != first + len) throw ParseError("bad timestamp '" + std::string(text) + "'");
  return v;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  // 2026-03-20T23:59:59Z
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
      text[16] != ':' || text[19] != 'Z') {
    throw ParseError("timestamp must look like YYYY-MM-DDTHH:MM:SSZ, got '" + std::string(text) + "'");
  }
  const chr::year_month_day ymd{chr::year{parse_fixed(text, 0, 4)},
                                chr::month{static_cast<unsigned>(parse_fixed(text, 5, 2))},
                                chr::day{static_cast<unsigned>(parse_fixed(text, 8, 2))}};
  const int hh = parse_fixed(text, 11, 2), mm = parse_fixed(text, 14, 2), ss = parse_fixed(text, 17, 2);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) throw ParseError("timestamp out of range: '" + std::string(text) + "'");
  return chr::sys_days{ymd} + chr::hours{hh} + chr::minutes{mm} + chr::seconds{ss};
}

std::string format_timestamp(Timestamp t) {
  const auto day = chr::floor<chr::days>(t);
  const chr::year_month_day ymd{day};
  const chr::hh_mm_ss hms{t - day};
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

std::string_view phase_label(PhaseName phase) {
  switch (phase) {
    case PhaseName::validation: return "validation";
    case PhaseName::public_test: return "public_test";
    case PhaseName::private_test: return "private_test";
  }
  return "unknown";
}

PhaseName parse_phase_name(std::string_view name) {
  if (name == "validation") return PhaseName::validation;
  if (name == "public_test") return PhaseName::public_test;
  if (name == "private_test") return PhaseName::private_test;
  throw ParseError("unknown phase '" + std::string(name) + "'");
}

// ---- config ----

void validate_config(const ServiceConfig& config) {
  if (config.phases.empty()) throw InvalidParameter("service config defines no phases");
  for (const auto& [name, p] : config.phases) {
    const std::string label(phase_label(name));
    if (p.name != name) throw InvalidParameter("phase entry '" + label + "' has a mismatched name");
    if (p.quota < 1) throw InvalidParameter(label + ": quota must be >= 1");
    if (p.manifest.empty()) throw InvalidParameter(label + ": manifest is required");
    if (name != PhaseName::private_test && !(p.opens_at < p.closes_at)) {
      throw InvalidParameter(label + ": opens_at must precede closes_at");
    }
  }
  if (config.operator_token_env.empty()) throw InvalidParameter("operator_token_env must be non-empty");
  if (config.challenge_replica) {
    auto it = config.phases.find(PhaseName::public_test);
    if (it == config.phases.end()) throw InvalidParameter("challenge replica requires a public_test phase");
    const auto& p = it->second;
    if (p.closes_at - p.opens_at != chr::hours{24}) {
      throw InvalidParameter("challenge replica: public_test window must last exactly 24 hours");
    }
    if (p.quota != 1 || p.quota_period != QuotaPeriod::phase) {
      throw InvalidParameter("challenge replica: public_test allows exactly one submission per team");
    }
  }
}

namespace {

const std::set<std::string> kTopKeys = {"challenge_replica", "operator_token_env", "private_scores_dir", "phases"};
const std::set<std::string> kPhaseKeys = {"opens_at", "closes_at", "quota", "quota_period", "manifest", "split"};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

PhaseConfig default_phase(PhaseName name) {
  PhaseConfig p;
  p.name = name;
  switch (name) {
    case PhaseName::validation:
      p.quota = 10;
      p.quota_period = QuotaPeriod::day;
      p.split = Phase::val;
      break;
    case PhaseName::public_test: p.split = Phase::public_test; break;
    case PhaseName::private_test: p.split = Phase::private_test; break;
  }
  return p;
}

}  // namespace

ServiceConfig parse_config(std::string_view yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("service config: ") + e.what());
  }
  if (!root.IsMap()) throw ParseError("service config: top level must be a mapping");
  ServiceConfig cfg;
  try {
    for (const auto& kv : root) {
      const auto key = kv.first.as<std::string>();
      if (!kTopKeys.count(key)) throw ParseError("service config: unknown key '" + key + "'");
    }
    if (root["challenge_replica"]) cfg.challenge_replica = root["challenge_replica"].as<bool>();
    if (root["operator_token_env"]) cfg.operator_token_env = root["operator_token_env"].as<std::string>();
    if (root["private_scores_dir"]) {
      cfg.private_scores_dir = resolve(base_dir, root["private_scores_dir"].as<std::string>());
    }
    const auto phases = root["phases"];
    if (!phases || !phases.IsMap()) throw ParseError("service config: 'phases' mapping is required");
    for (const auto& kv : phases) {
      const PhaseName name = parse_phase_name(kv.first.as<std::string>());
      PhaseConfig p = default_phase(name);
      const auto& node = kv.second;
      if (!node.IsMap()) throw ParseError("service config: phase entries must be mappings");
      for (const auto& field : node) {
        const auto key = field.first.as<std::string>();
        if (!kPhaseKeys.count(key)) throw ParseError("service config: unknown phase key '" + key + "'");
      }
      if (node["opens_at"]) p.opens_at = parse_timestamp(node["opens_at"].as<std::string>());
      if (node["closes_at"]) p.closes_at = parse_timestamp(node["closes_at"].as<std::string>());
      if (node["quota"]) p.quota = node["quota"].as<int>();
      if (node["quota_period"]) {
        const auto period = node["quota_period"].as<std::string>();
        if (period == "day") {
          p.quota_period = QuotaPeriod::day;
        } else if (period == "phase") {
          p.quota_period = QuotaPeriod::phase;
        } else {
          throw ParseError("service config: quota_period must be 'day' or 'phase'");
        }
      }
      if (node["manifest"]) p.manifest = resolve(base_dir, node["manifest"].as<std::string>());
      if (node["split"]) p.split = parse_phase(node["split"].as<std::string>());
      cfg.phases[name] = p;
    }
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("service config: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

ServiceConfig load_config(const fs::path& path) {
  return parse_config(csv::read_text(path), path.parent_path());
}

// ---- submissions ----

std::string_view rejection_name(RejectionKind kind) {
  switch (kind) {
    case RejectionKind::malformed: return "malformed";
    case RejectionKind::unknown_phase: return "unknown-phase";
    case RejectionKind::phase_not_accepting: return "phase-not-accepting";
    case RejectionKind::window_closed: return "window-closed";
    case RejectionKind::quota_exceeded: return "quota-exceeded";
    case RejectionKind::duplicate_id: return "duplicate-id";
    case RejectionKind::extra_id: return "extra-id";
    case RejectionKind::missing_id: return "missing-id";
    case RejectionKind::score_out_of_range: return "score-out-of-range";
  }
  return "unknown";
}

Rejection::Rejection(RejectionKind kind, std::string message, std::vector<std::string> ids)
    : Error(std::string(rejection_name(kind)) + ": " + message), kind_(kind), ids_(std::move(ids)) {}

namespace {

std::string list_ids(const std::vector<std::string>& ids) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > shown) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

std::string score_text(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<SubmissionRow> parse_submission(std::string_view csv_text) {
  csv::Table table;
  try {
    table = csv::parse_table(csv_text);
  } catch (const Error& e) {
    throw Rejection(RejectionKind::malformed, e.what());
  }
  if (table.header != csv::Row{"id", "score"}) {
    throw Rejection(RejectionKind::malformed, "header must be exactly 'id,score'");
  }
  std::vector<SubmissionRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    std::string_view text = r[1];
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
      throw Rejection(RejectionKind::malformed,
                      "row " + std::to_string(i + 2) + ": score '" + r[1] + "' is not a decimal number");
    }
    if (r[0].empty()) throw Rejection(RejectionKind::malformed, "row " + std::to_string(i + 2) + ": empty id");
    rows.push_back({r[0], v});
  }
  return rows;
}

std::string format_submission(std::span<const SubmissionRow> rows) {
  std::string out = "id,score\n";
  for (const auto& r : rows) {
    const std::string fields[] = {r.id, score_text(r.score)};
    out += csv::format_row(fields);
  }
  return out;
}

std::vector<SubmissionRow> read_submission(const fs::path& path) { return parse_submission(csv::read_text(path)); }

void write_submission(std::span<const SubmissionRow> rows, const fs::path& path) {
  csv::write_file_atomic(path, format_submission(rows));
}

void check_rows(std::span<const SubmissionRow> rows, const std::map<std::string, int>& labels) {
  std::set<std::string> seen;
  std::vector<std::string> duplicates, extras, out_of_range;
  for (const auto& r : rows) {
    if (!seen.insert(r.id).second) duplicates.push_back(r.id);
    if (!labels.count(r.id)) extras.push_back(r.id);
    if (!std::isfinite(r.score) || r.score < 0.0 || r.score > 1.0) out_of_range.push_back(r.id);
  }
  if (!duplicates.empty()) {
    throw Rejection(RejectionKind::duplicate_id, "ids listed more than once: " + list_ids(duplicates), duplicates);
  }
  if (!extras.empty()) throw Rejection(RejectionKind::extra_id, "ids not in this phase: " + list_ids(extras), extras);
  std::vector<std::string> missing;
  for (const auto& [id, label] : labels)
    if (!seen.count(id)) missing.push_back(id);
  if (!missing.empty()) throw Rejection(RejectionKind::missing_id, "no score for ids: " + list_ids(missing), missing);
  if (!out_of_range.empty()) {
    throw Rejection(RejectionKind::score_out_of_range, "scores must be finite and in [0, 1] for ids: " +
                                                           list_ids(out_of_range),
                    out_of_range);
  }
}

void validate_team(std::string_view team) {
  if (team.empty() || team.size() > 64) throw Rejection(RejectionKind::malformed, "team name must be 1-64 characters");
  if (team == "." || team == "..") throw Rejection(RejectionKind::malformed, "invalid team name");
  for (unsigned char c : team) {
    if (c < 0x20 || c == 0x7f || c == '/' || c == '\\') {
      throw Rejection(RejectionKind::malformed, "team name contains a forbidden character");
    }
  }
}

// ---- ranking ----

std::vector<LeaderboardEntry> rank_entries(std::vector<LeaderboardEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    const bool ap = a.private_auc.has_value(), bp = b.private_auc.has_value();
    if (ap != bp) return ap;
    const double ka = ap ? *a.private_auc : a.public_auc.value_or(-1.0);
    const double kb = bp ? *b.private_auc : b.public_auc.value_or(-1.0);
    if (ka != kb) return ka > kb;
    if (a.submitted_at != b.submitted_at) return a.submitted_at < b.submitted_at;
    if (a.receipt != b.receipt) return a.receipt < b.receipt;
    return a.team < b.team;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = static_cast<int>(i + 1);
  return entries;
}

std::vector<RankShift> rank_shifts(std::span<const LeaderboardEntry> before, std::span<const LeaderboardEntry> after,
                                   int threshold) {
  std::map<std::string, int> old_rank;
  for (const auto& e : before) old_rank[e.team] = e.rank;
  std::vector<RankShift> out;
  for (const auto& e : after) {
    auto it = old_rank.find(e.team);
    if (it == old_rank.end()) continue;
    out.push_back({e.team, it->second, e.rank, std::abs(e.rank - it->second) >= threshold});
  }
  return out;
}

// ---- service ----

namespace {

std::map<std::string, int> load_labels(const PhaseConfig& p) {
  std::map<std::string, int> labels;
  for (const auto& rec : read_manifest(p.manifest)) {
    if (rec.split == p.split) labels[rec.id] = rec.label;
  }
  if (labels.empty()) {
    throw InvalidParameter(std::string(phase_label(p.name)) + ": manifest has no items in split '" +
                           std::string(phase_name(p.split)) + "'");
  }
  return labels;
}

std::string artifact_name(std::uint64_t receipt) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "submissions/%06llu.csv", static_cast<unsigned long long>(receipt));
  return buf;
}

json entry_json(const LeaderboardEntry& e) {
  json j;
  j["rank"] = e.rank;
  j["team"] = e.team;
  j["public_auc"] = e.public_auc ? json(*e.public_auc) : json(nullptr);
  j["private_auc"] = e.private_auc ? json(*e.private_auc) : json(nullptr);
  j["submitted_at"] = format_timestamp(e.submitted_at);
  return j;
}

}  // namespace

std::vector<StoredSubmission> read_store(const fs::path& data_dir) {
  const fs::path path = data_dir / "log.jsonl";
  std::vector<StoredSubmission> out;
  if (!fs::exists(path)) return out;
  std::map<std::uint64_t, std::size_t> position;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception&) {
      if (in.peek() == std::char_traits<char>::eof()) {
        std::cerr << "warning: ignoring incomplete trailing record in " << path << "\n";
        break;
      }
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": unreadable record");
    }
    try {
      const auto event = rec.at("event").get<std::string>();
      const auto id = rec.at("receipt").get<std::uint64_t>();
      if (event == "submission") {
        StoredSubmission s;
        s.receipt.id = id;
        s.receipt.team = rec.at("team").get<std::string>();
        s.receipt.phase = parse_phase_name(rec.at("phase").get<std::string>());
        s.receipt.received_at = parse_timestamp(rec.at("received_at").get<std::string>());
        s.artifact = rec.at("artifact").get<std::string>();
        if (position.count(id)) throw ParseError("duplicate receipt " + std::to_string(id));
        position[id] = out.size();
        out.push_back(std::move(s));
      } else if (event == "score") {
        auto it = position.find(id);
        if (it == position.end()) throw ParseError("score for unknown receipt " + std::to_string(id));
        out[it->second].receipt.auc = rec.at("auc").get<double>();
      } else {
        throw ParseError("unknown event '" + event + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LeaderboardEntry> compute_leaderboard(std::span<const Receipt> receipts, LeaderboardView view) {
  std::vector<const Receipt*> ordered;
  for (const auto& r : receipts) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(), [](const Receipt* a, const Receipt* b) { return a->id < b->id; });

  std::map<std::string, LeaderboardEntry> by_team;
  const PhaseName ranked = view == LeaderboardView::validation ? PhaseName::validation : PhaseName::public_test;
  for (const Receipt* r : ordered) {
    if (!r->auc || r->phase != ranked) continue;
    auto& e = by_team[r->team];
    e.team = r->team;
    e.public_auc = r->auc;
    e.submitted_at = r->received_at;
    e.receipt = r->id;
  }
  if (view == LeaderboardView::final_standings) {
    for (const Receipt* r : ordered) {
      if (!r->auc || r->phase != PhaseName::private_test) continue;
      auto& e = by_team[r->team];
      if (e.team.empty()) {
        e.team = r->team;
        e.submitted_at = r->received_at;
        e.receipt = r->id;
      }
      e.private_auc = r->auc;
    }
  }
  std::vector<LeaderboardEntry> entries;
  for (auto& [team, e] : by_team) entries.push_back(std::move(e));
  return rank_entries(std::move(entries));
}

BenchService::BenchService(ServiceConfig config, fs::path data_dir, Clock clock)
    : config_(std::move(config)), data_dir_(std::move(data_dir)), clock_(std::move(clock)) {
  validate_config(config_);
  for (const auto& [name, p] : config_.phases) labels_[name] = load_labels(p);
  fs::create_directories(data_dir_ / "submissions");
  fs::create_directories(data_dir_ / "index");
  for (auto& s : read_store(data_dir_)) {
    next_receipt_ = std::max(next_receipt_, s.receipt.id + 1);
    const auto id = s.receipt.id;
    submissions_.emplace(id, std::move(s));
  }
  write_index();
}

const std::map<std::string, int>& BenchService::labels_for(PhaseName phase) const {
  auto it = labels_.find(phase);
  if (it == labels_.end()) {
    throw Rejection(RejectionKind::unknown_phase, "phase '" + std::string(phase_label(phase)) + "' is not configured");
  }
  return it->second;
}

void BenchService::append_log(const std::string& line) {
  std::ofstream out(data_dir_ / "log.jsonl", std::ios::app | std::ios::binary);
  out << line << '\n';
  out.flush();
  if (!out) throw IoError("cannot append to " + (data_dir_ / "log.jsonl").string());
}

std::uint64_t BenchService::commit_submission(const std::string& team, PhaseName phase,
                                              std::span<const SubmissionRow> rows, Timestamp now) {
  // Caller holds mutex_.
  const std::uint64_t id = next_receipt_;
  const std::string artifact = artifact_name(id);
  write_submission(rows, data_dir_ / artifact);
  json rec;
  rec["event"] = "submission";
  rec["receipt"] = id;
  rec["team"] = team;
  rec["phase"] = phase_label(phase);
  rec["received_at"] = format_timestamp(now);
  rec["artifact"] = artifact;
  append_log(rec.dump());
  submissions_[id] = StoredSubmission{Receipt{id, team, phase, now, std::nullopt}, artifact};
  next_receipt_ = id + 1;
  return id;
}

Receipt BenchService::ingest_submission(const std::string& team, PhaseName phase, std::span<const SubmissionRow> rows) {
  return ingest_submission(team, phase, rows, clock_());
}

Receipt BenchService::ingest_submission(const std::string& team, PhaseName phase, std::span<const SubmissionRow> rows,
                                        Timestamp now) {
  validate_team(team);
  auto pit = config_.phases.find(phase);
  if (pit == config_.phases.end()) {
    throw Rejection(RejectionKind::unknown_phase, "phase '" + std::string(phase_label(phase)) + "' is not configured");
  }
  const PhaseConfig& p = pit->second;
  if (phase == PhaseName::private_test) {
    throw Rejection(RejectionKind::phase_not_accepting, "private_test is scored by the operator only");
  }
  if (now < p.opens_at || now > p.closes_at) {
    throw Rejection(RejectionKind::window_closed, std::string(phase_label(phase)) + " accepts submissions from " +
                                                      format_timestamp(p.opens_at) + " to " +
                                                      format_timestamp(p.closes_at));
  }
  check_rows(rows, labels_for(phase));

  std::lock_guard lock(mutex_);
  int used = 0;
  for (const auto& [id, s] : submissions_) {
    if (s.receipt.team != team || s.receipt.phase != phase) continue;
    if (p.quota_period == QuotaPeriod::day &&
        chr::floor<chr::days>(s.receipt.received_at) != chr::floor<chr::days>(now)) {
      continue;
    }
    ++used;
  }
  if (used >= p.quota) {
    throw Rejection(RejectionKind::quota_exceeded,
                    "team '" + team + "' already used " + std::to_string(used) + " of " + std::to_string(p.quota) +
                        (p.quota_period == QuotaPeriod::day ? " submissions today" : " submissions") + " in " +
                        std::string(phase_label(phase)));
  }
  const std::uint64_t id = commit_submission(team, phase, rows, now);
  write_index();
  return submissions_.at(id).receipt;
}

double BenchService::score_submission(std::uint64_t receipt_id) {
  StoredSubmission s;
  {
    std::lock_guard lock(mutex_);
    auto it = submissions_.find(receipt_id);
    if (it == submissions_.end()) throw InvalidParameter("unknown receipt " + std::to_string(receipt_id));
    s = it->second;
  }
  const auto& labels = labels_for(s.receipt.phase);
  const auto rows = read_submission(data_dir_ / s.artifact);
  LabeledScores items;
  items.reserve(rows.size());
  for (const auto& r : rows) {
    auto it = labels.find(r.id);
    if (it == labels.end()) throw InvalidParameter("receipt " + std::to_string(receipt_id) + ": unknown id " + r.id);
    items.push_back({r.id, r.score, it->second, {}});
  }
  const double value = auc(items);

  std::lock_guard lock(mutex_);
  auto& stored = submissions_.at(receipt_id);
  if (!stored.receipt.auc) {
    json rec;
    rec["event"] = "score";
    rec["receipt"] = receipt_id;
    rec["auc"] = value;
    append_log(rec.dump());
    stored.receipt.auc = value;
    write_index();
  }
  return value;
}

std::optional<Receipt> BenchService::receipt(std::uint64_t id) const {
  std::lock_guard lock(mutex_);
  auto it = submissions_.find(id);
  if (it == submissions_.end()) return std::nullopt;
  return it->second.receipt;
}

std::vector<LeaderboardEntry> BenchService::leaderboard(LeaderboardView view) const {
  std::lock_guard lock(mutex_);
  return leaderboard_locked(view);
}

std::vector<LeaderboardEntry> BenchService::leaderboard_locked(LeaderboardView view) const {
  std::vector<Receipt> receipts;
  receipts.reserve(submissions_.size());
  for (const auto& [id, s] : submissions_) receipts.push_back(s.receipt);
  return compute_leaderboard(receipts, view);
}

void BenchService::write_index() const {
  // Caller holds mutex_ (or is the constructor).
  json doc;
  doc["final_standings"] = json::array();
  for (const auto& e : leaderboard_locked(LeaderboardView::final_standings)) doc["final_standings"].push_back(entry_json(e));
  doc["validation"] = json::array();
  for (const auto& e : leaderboard_locked(LeaderboardView::validation)) doc["validation"].push_back(entry_json(e));
  csv::write_file_atomic(data_dir_ / "index" / "leaderboard.json", doc.dump(2) + "\n");
}

RescoreReport BenchService::rescore_private(std::size_t k) {
  static std::mutex rescore_mutex;
  std::lock_guard rescore_lock(rescore_mutex);

  RescoreReport report;
  report.requested_k = k;
  const auto before = leaderboard();

  // Candidates ranked on public AUC alone.
  std::vector<LeaderboardEntry> public_only;
  for (auto e : before) {
    if (!e.public_auc) continue;
    e.private_auc.reset();
    public_only.push_back(std::move(e));
  }
  public_only = rank_entries(std::move(public_only));
  if (k > public_only.size()) {
    report.warnings.push_back("k=" + std::to_string(k) + " exceeds the " + std::to_string(public_only.size()) +
                              " ranked teams; clipped");
    k = public_only.size();
  }
  report.applied_k = k;

  if (k > 0) {
    if (!config_.phases.count(PhaseName::private_test)) {
      throw InvalidParameter("rescore: no private_test phase configured");
    }
    const auto& labels = labels_for(PhaseName::private_test);
    for (std::size_t i = 0; i < k; ++i) {
      const std::string& team = public_only[i].team;
      const fs::path file = config_.private_scores_dir / (team + ".csv");
      if (!fs::exists(file)) {
        report.warnings.push_back("no private score file for '" + team + "' (" + file.string() + ")");
        continue;
      }
      std::uint64_t id = 0;
      try {
        const auto rows = read_submission(file);
        check_rows(rows, labels);
        std::lock_guard lock(mutex_);
        id = commit_submission(team, PhaseName::private_test, rows, clock_());
      } catch (const Rejection& r) {
        report.warnings.push_back("private score file for '" + team + "' rejected: " + r.what());
        continue;
      }
      score_submission(id);
      report.rescored.push_back(team);
    }
  }
  report.leaderboard = leaderboard();
  report.shifts = rank_shifts(before, report.leaderboard);
  return report;
}

bool BenchService::operator_token_matches(std::string_view token) const {
  const char* expected = std::getenv(config_.operator_token_env.c_str());
  if (expected == nullptr || *expected == '\0' || token.empty()) return false;
  const std::string_view want(expected);
  if (want.size() != token.size()) return false;
  unsigned char diff = 0;
  for (std::size_t i = 0; i < want.size(); ++i) diff |= static_cast<unsigned char>(want[i] ^ token[i]);
  return diff == 0;
}

}  // namespace dfbench::service
