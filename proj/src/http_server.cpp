#include "dfbench/http_server.hpp"

#include <charconv>
#include <iostream>

#include "httplib.h"
#include "json.hpp"

namespace dfbench::service {

using json = nlohmann::ordered_json;

namespace {

int status_for(RejectionKind kind) {
  switch (kind) {
    case RejectionKind::unknown_phase: return 404;
    case RejectionKind::phase_not_accepting:
    case RejectionKind::window_closed: return 403;
    case RejectionKind::quota_exceeded: return 429;
    default: return 422;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message,
                const std::vector<std::string>& ids = {}) {
  json body;
  body["error"] = kind;
  body["message"] = message;
  if (!ids.empty()) body["ids"] = ids;
  send_json(res, status, body);
}

json receipt_json(const Receipt& r) {
  json j;
  j["receipt"] = r.id;
  j["team"] = r.team;
  j["phase"] = phase_label(r.phase);
  j["received_at"] = format_timestamp(r.received_at);
  j["auc"] = r.auc ? json(*r.auc) : json(nullptr);
  return j;
}

json entries_json(const std::vector<LeaderboardEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    json j;
    j["rank"] = e.rank;
    j["team"] = e.team;
    j["public_auc"] = e.public_auc ? json(*e.public_auc) : json(nullptr);
    j["private_auc"] = e.private_auc ? json(*e.private_auc) : json(nullptr);
    j["submitted_at"] = format_timestamp(e.submitted_at);
    out.push_back(std::move(j));
  }
  return out;
}

bool parse_u64(const std::string& text, std::uint64_t& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return !text.empty() && ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

struct HttpServer::Impl {
  BenchService& service;
  httplib::Server server;

  explicit Impl(BenchService& s) : service(s) { routes(); }

  void routes() {
    server.Post("/phases/:name/submissions", [this](const httplib::Request& req, httplib::Response& res) {
      std::string team = req.get_header_value("X-Team");
      if (team.empty()) team = req.get_param_value("team");
      try {
        PhaseName phase;
        try {
          phase = parse_phase_name(req.path_params.at("name"));
        } catch (const ParseError& e) {
          throw Rejection(RejectionKind::unknown_phase, e.what());
        }
        const auto rows = parse_submission(req.body);
        const Receipt r = service.ingest_submission(team, phase, rows);
        service.score_submission(r.id);
        send_json(res, 201, receipt_json(*service.receipt(r.id)));
      } catch (const Rejection& e) {
        send_error(res, status_for(e.kind()), rejection_name(e.kind()), e.what(), e.ids());
      } catch (const Error& e) {
        send_error(res, 500, "internal", e.what());
      }
    });

    server.Get("/leaderboard", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string view = req.get_param_value("view");
      if (!view.empty() && view != "final" && view != "validation") {
        send_error(res, 400, "bad-request", "view must be 'final' or 'validation'");
        return;
      }
      const auto board =
          service.leaderboard(view == "validation" ? LeaderboardView::validation : LeaderboardView::final_standings);
      json body;
      body["view"] = view == "validation" ? "validation" : "final";
      body["entries"] = entries_json(board);
      send_json(res, 200, body);
    });

    server.Get("/receipts/:id", [this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t id = 0;
      if (!parse_u64(req.path_params.at("id"), id)) {
        send_error(res, 400, "bad-request", "receipt id must be a positive integer");
        return;
      }
      const auto r = service.receipt(id);
      if (!r) {
        send_error(res, 404, "not-found", "no receipt " + std::to_string(id));
        return;
      }
      send_json(res, 200, receipt_json(*r));
    });

    server.Post("/admin/rescore", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string auth = req.get_header_value("Authorization");
      const std::string prefix = "Bearer ";
      const std::string token = auth.rfind(prefix, 0) == 0 ? auth.substr(prefix.size()) : std::string{};
      if (!service.operator_token_matches(token)) {
        send_error(res, 401, "unauthorized", "operator token required");
        return;
      }
      std::uint64_t k = 0;
      if (!parse_u64(req.get_param_value("k"), k)) {
        send_error(res, 400, "bad-request", "k must be a non-negative integer");
        return;
      }
      try {
        const auto report = service.rescore_private(static_cast<std::size_t>(k));
        json body;
        body["requested_k"] = report.requested_k;
        body["applied_k"] = report.applied_k;
        body["rescored"] = report.rescored;
        body["warnings"] = report.warnings;
        json shifts = json::array();
        for (const auto& s : report.shifts) {
          shifts.push_back({{"team", s.team}, {"before", s.before}, {"after", s.after}, {"flagged", s.flagged}});
        }
        body["shifts"] = std::move(shifts);
        body["entries"] = entries_json(report.leaderboard);
        send_json(res, 200, body);
      } catch (const Error& e) {
        send_error(res, 500, "internal", e.what());
      }
    });
  }
};

HttpServer::HttpServer(BenchService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace dfbench::service
