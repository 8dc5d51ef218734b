// dfbench: corpus synthesis, degradation, scoring, fusion and the challenge server.

#include <csignal>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dfbench/corpus.hpp"
#include "dfbench/csv.hpp"
#include "dfbench/degradation.hpp"
#include "dfbench/detector_client.hpp"
#include "dfbench/fusion.hpp"
#include "dfbench/http_server.hpp"
#include "dfbench/metrics.hpp"
#include "dfbench/profile.hpp"
#include "dfbench/service.hpp"

namespace fs = std::filesystem;
using namespace dfbench;

namespace {

std::uint64_t view_seed_for(std::uint64_t seed) { return splitmix64(seed ^ fnv1a64("participant_view")); }

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidParameter("not a number: '" + item + "'");
    }
  }
  return out;
}

Manifest split_rows(const Manifest& m, std::optional<Phase> split) {
  if (!split) return m;
  Manifest out;
  for (const auto& r : m)
    if (r.split == *split) out.push_back(r);
  return out;
}

void write_view_file(const Manifest& manifest, Phase split, std::uint64_t seed, const fs::path& path) {
  const auto view = participant_view(split_rows(manifest, split), seed);
  csv::write_file_atomic(path, format_view(view));
  csv::write_file_atomic(fs::path(path).replace_extension(".seed"), std::to_string(seed) + "\n");
}

void print_board(const std::vector<service::LeaderboardEntry>& board, std::ostream& out) {
  out << std::left << std::setw(6) << "rank" << std::setw(24) << "team" << std::setw(12) << "public" << "private\n";
  auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  for (const auto& e : board) {
    out << std::left << std::setw(6) << e.rank << std::setw(24) << e.team << std::setw(12) << fmt(e.public_auc)
        << fmt(e.private_auc) << "\n";
  }
}

// Aligns several submission files on the first file's id order.
struct AlignedScores {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> per_input;  // [input][item]
};

AlignedScores align_inputs(const std::vector<std::string>& files) {
  if (files.empty()) throw InvalidParameter("fuse: no inputs");
  AlignedScores a;
  std::map<std::string, std::size_t> pos;
  for (std::size_t f = 0; f < files.size(); ++f) {
    const auto rows = service::read_submission(files[f]);
    if (f == 0) {
      for (const auto& r : rows) {
        if (!pos.emplace(r.id, a.ids.size()).second) throw InvalidParameter(files[f] + ": duplicate id " + r.id);
        a.ids.push_back(r.id);
      }
    }
    if (rows.size() != a.ids.size()) throw InvalidParameter(files[f] + ": row count differs from " + files[0]);
    std::vector<double> col(a.ids.size());
    std::vector<bool> seen(a.ids.size(), false);
    for (const auto& r : rows) {
      auto it = pos.find(r.id);
      if (it == pos.end()) throw InvalidParameter(files[f] + ": id " + r.id + " not in " + files[0]);
      if (seen[it->second]) throw InvalidParameter(files[f] + ": duplicate id " + r.id);
      seen[it->second] = true;
      col[it->second] = r.score;
    }
    a.per_input.push_back(std::move(col));
  }
  return a;
}

double prob_to_logit(double p) {
  const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(q / (1.0 - q));
}

service::HttpServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness benchmark harness for deepfake detectors"};
  app.require_subcommand(1);

  // make-reals
  auto* make_reals = app.add_subcommand("make-reals", "Write procedural face-like stand-in real images");
  std::string mr_out;
  int mr_count = 310, mr_size = 128;
  std::uint64_t mr_seed = 1;
  make_reals->add_option("--out", mr_out, "Output directory")->required();
  make_reals->add_option("--count", mr_count, "Number of images")->check(CLI::PositiveNumber);
  make_reals->add_option("--size", mr_size, "Side length in pixels")->check(CLI::Range(16, 4096));
  make_reals->add_option("--seed", mr_seed, "Random seed");

  // synth
  auto* synth = app.add_subcommand("synth", "Build a labeled, degraded four-split corpus");
  std::string sy_reals, sy_out, sy_profiles;
  std::uint64_t sy_seed = 0;
  double sy_scale = 1.0;
  synth->add_option("--reals", sy_reals, "Directory of real source images")->required()->check(CLI::ExistingDirectory);
  synth->add_option("--out", sy_out, "Output corpus directory")->required();
  synth->add_option("--profiles", sy_profiles, "Degradation profile YAML")->required()->check(CLI::ExistingFile);
  synth->add_option("--seed", sy_seed, "Master seed")->required();
  synth->add_option("--scale", sy_scale, "Split size multiplier (0.1 gives 100/10/100/100)")
      ->check(CLI::Range(1e-6, 100.0));

  // view
  auto* view = app.add_subcommand("view", "Write the label-free participant view of one split");
  std::string vw_manifest, vw_split, vw_out;
  std::optional<std::uint64_t> vw_seed;
  view->add_option("--manifest", vw_manifest, "Labeled manifest")->required()->check(CLI::ExistingFile);
  view->add_option("--split", vw_split, "train|val|public_test|private_test")->required();
  view->add_option("--out", vw_out, "Output CSV")->required();
  view->add_option("--seed", vw_seed, "Row shuffle seed (recorded in <out>.seed)");

  // degrade
  auto* degrade = app.add_subcommand("degrade", "Apply a degradation recipe to one image");
  std::string dg_in, dg_out, dg_recipe;
  degrade->add_option("--in", dg_in, "Input PNG/JPEG")->required()->check(CLI::ExistingFile);
  degrade->add_option("--out", dg_out, "Output PNG")->required();
  degrade->add_option("--recipe", dg_recipe, "Recipe JSON, or @file")->required();

  // score
  auto* score = app.add_subcommand("score", "Score a submission against a labeled manifest");
  std::string sc_manifest, sc_submission, sc_split;
  bool sc_by_group = false;
  int sc_ci = 0;
  double sc_level = 0.95;
  std::uint64_t sc_seed = 0;
  score->add_option("--manifest", sc_manifest, "Labeled manifest")->required()->check(CLI::ExistingFile);
  score->add_option("--submission", sc_submission, "Submission CSV (id,score)")->required()->check(CLI::ExistingFile);
  score->add_option("--split", sc_split, "Restrict to one split");
  score->add_flag("--by-group", sc_by_group, "Per degradation kind and fake method AUC");
  score->add_option("--ci", sc_ci, "Bootstrap resamples for a confidence interval (>= 100)");
  score->add_option("--level", sc_level, "Confidence level")->check(CLI::Range(0.5, 0.999));
  score->add_option("--seed", sc_seed, "Bootstrap seed");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Fuse per-model submission CSVs");
  std::string fu_method, fu_weights, fu_out, fu_robust, fu_pool = "mean";
  std::vector<std::string> fu_inputs;
  int fu_views = 1;
  double fu_fraction = 0.1;
  fuse->add_option("--method", fu_method, "Fusion rule")
      ->required()
      ->check(CLI::IsMember({"logit-mean", "weighted", "discretized", "rank", "robust-tta", "topk"}));
  fuse->add_option("--weights", fu_weights, "Comma-separated model weights (default uniform)");
  fuse->add_option("--inputs", fu_inputs, "Input CSVs; for robust-tta ordered view-major")->required();
  fuse->add_option("--out", fu_out, "Fused submission CSV")->required();
  fuse->add_option("--views", fu_views, "robust-tta: number of views")->check(CLI::PositiveNumber);
  fuse->add_option("--robust-auc", fu_robust, "robust-tta: per-model robust AUCs, used as weights");
  fuse->add_option("--fraction", fu_fraction, "topk: fraction of inputs (patches) kept");
  fuse->add_option("--pool", fu_pool, "topk: mean|softmax")->check(CLI::IsMember({"mean", "softmax"}));

  // serve
  auto* serve = app.add_subcommand("serve", "Run the challenge server");
  std::string sv_data, sv_config, sv_host = "127.0.0.1";
  int sv_port = 8080;
  serve->add_option("--data", sv_data, "Data directory")->required();
  serve->add_option("--config", sv_config, "Service config YAML")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", sv_port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", sv_host, "Bind address");

  // leaderboard
  auto* board = app.add_subcommand("leaderboard", "Print the leaderboard from a data directory");
  std::string lb_data, lb_view = "final";
  bool lb_json = false;
  board->add_option("--data", lb_data, "Data directory")->required()->check(CLI::ExistingDirectory);
  board->add_option("--view", lb_view, "final|validation")->check(CLI::IsMember({"final", "validation"}));
  board->add_flag("--json", lb_json, "Print the derived index instead of a table");

  // rescore
  auto* rescore = app.add_subcommand("rescore", "Score operator private files for the top-k public entries");
  std::string rs_data, rs_config;
  std::size_t rs_k = 0;
  rescore->add_option("--data", rs_data, "Data directory")->required();
  rescore->add_option("--config", rs_config, "Service config YAML")->required()->check(CLI::ExistingFile);
  rescore->add_option("--k", rs_k, "Number of top public teams")->required();

  // run-detector
  auto* run_det = app.add_subcommand("run-detector", "Stream a participant view through a detector process");
  std::string rd_view, rd_cmd, rd_out, rd_root;
  run_det->add_option("--view", rd_view, "Participant view CSV")->required()->check(CLI::ExistingFile);
  run_det->add_option("--cmd", rd_cmd, "Detector command (run with sh -c)")->required();
  run_det->add_option("--out", rd_out, "Submission CSV")->required();
  run_det->add_option("--image-root", rd_root, "Base for relative image paths (default: the view's directory)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*make_reals) {
      fs::create_directories(mr_out);
      for (int i = 0; i < mr_count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "real_%05d", i);
        RngStream rng(mr_seed, std::string("reals/") + name);
        write_png(synthetic_face(mr_size, rng), fs::path(mr_out) / (std::string(name) + ".png"));
      }
      std::cout << "wrote " << mr_count << " images to " << mr_out << "\n";
    } else if (*synth) {
      const auto sources = scan_sources(sy_reals);
      const auto profiles = load_profiles(sy_profiles);
      const auto specs = challenge_specs(sy_scale);
      const auto result = build_corpus(sources, specs, profiles, sy_seed, sy_out);
      const std::uint64_t vseed = view_seed_for(sy_seed);
      for (Phase p : {Phase::val, Phase::public_test, Phase::private_test}) {
        write_view_file(result.manifest, p, vseed, fs::path(sy_out) / ("view_" + std::string(phase_name(p)) + ".csv"));
      }
      std::map<Phase, std::pair<int, int>> counts;
      for (const auto& r : result.manifest) (r.label ? counts[r.split].second : counts[r.split].first)++;
      for (const auto& [p, c] : counts) {
        std::cout << phase_name(p) << ": " << c.first << " real, " << c.second << " fake\n";
      }
      std::cout << "manifest: " << (fs::path(sy_out) / "manifest.csv").string() << "\n";
    } else if (*view) {
      const auto manifest = read_manifest(vw_manifest);
      const std::uint64_t seed = vw_seed.value_or(view_seed_for(0));
      write_view_file(manifest, parse_phase(vw_split), seed, vw_out);
      std::cout << "wrote " << vw_out << " (shuffle seed " << seed << ")\n";
    } else if (*degrade) {
      std::string text = dg_recipe;
      if (!text.empty() && text[0] == '@') text = csv::read_text(text.substr(1));
      const auto recipe = parse_recipe(text);
      write_png(apply_recipe(read_image(dg_in), recipe), dg_out);
    } else if (*score) {
      std::optional<Phase> split;
      if (!sc_split.empty()) split = parse_phase(sc_split);
      const auto manifest = split_rows(read_manifest(sc_manifest), split);
      std::map<std::string, int> labels;
      std::map<std::string, const ManifestRecord*> by_id;
      for (const auto& r : manifest) {
        labels[r.id] = r.label;
        by_id[r.id] = &r;
      }
      const auto rows = service::read_submission(sc_submission);
      service::check_rows(rows, labels);
      LabeledScores items;
      for (const auto& row : rows) {
        const auto& rec = *by_id.at(row.id);
        ScoredItem it{row.id, row.score, rec.label, {}};
        if (rec.label == 1) {
          it.groups.push_back("method:" + rec.fake_method);
          std::set<std::string> kinds;
          for (const auto& step : rec.recipe.steps) kinds.insert(std::string(kind_name(kind_of(step))));
          if (kinds.empty()) kinds.insert("clean");
          for (const auto& k : kinds) it.groups.push_back("degradation:" + k);
        }
        items.push_back(std::move(it));
      }
      std::size_t fakes = 0;
      for (const auto& it : items) fakes += it.label == 1;
      std::cout << std::setprecision(6) << std::fixed;
      std::cout << "items: " << items.size() << " (fake " << fakes << ", real " << items.size() - fakes << ")\n";
      std::cout << "auc: " << auc(items) << "\n";
      if (sc_ci > 0) {
        const auto ci = bootstrap_ci(items, sc_ci, sc_level, sc_seed);
        std::cout << "ci" << static_cast<int>(std::lround(sc_level * 100)) << ": [" << ci.low << ", " << ci.high
                  << "] (" << sc_ci << " resamples, seed " << sc_seed << ")\n";
      }
      if (sc_by_group) {
        for (const auto& [group, value] : per_group_auc(items)) std::cout << "group " << group << ": " << value << "\n";
      }
    } else if (*fuse) {
      const auto a = align_inputs(fu_inputs);
      const std::size_t n_items = a.ids.size();
      std::vector<service::SubmissionRow> out(n_items);
      for (std::size_t i = 0; i < n_items; ++i) out[i].id = a.ids[i];
      const std::size_t n_inputs = a.per_input.size();

      if (fu_method == "robust-tta") {
        if (n_inputs % static_cast<std::size_t>(fu_views) != 0) {
          throw InvalidParameter("robust-tta: input count is not a multiple of --views");
        }
        const std::size_t n_models = n_inputs / static_cast<std::size_t>(fu_views);
        const auto weights = !fu_robust.empty()
                                 ? fusion::robust_weights(parse_doubles(fu_robust)).as_fusion_weights()
                                 : (fu_weights.empty() ? fusion::FusionWeights::uniform(n_models)
                                                       : fusion::FusionWeights(parse_doubles(fu_weights)));
        for (std::size_t i = 0; i < n_items; ++i) {
          std::vector<std::vector<double>> per_view(static_cast<std::size_t>(fu_views));
          for (std::size_t v = 0; v < per_view.size(); ++v)
            for (std::size_t m = 0; m < n_models; ++m) per_view[v].push_back(a.per_input[v * n_models + m][i]);
          out[i].score = fusion::tta_fuse(per_view, weights);
        }
      } else if (fu_method == "topk") {
        const auto mode = fu_pool == "softmax" ? fusion::PoolMode::softmax : fusion::PoolMode::mean;
        for (std::size_t i = 0; i < n_items; ++i) {
          std::vector<double> patches;
          for (const auto& col : a.per_input) patches.push_back(col[i]);
          out[i].score = std::clamp(fusion::topk_pool(patches, fu_fraction, mode), 0.0, 1.0);
        }
      } else {
        const auto weights = fu_weights.empty() ? fusion::FusionWeights::uniform(n_inputs)
                                                : fusion::FusionWeights(parse_doubles(fu_weights));
        if (fu_method == "rank") {
          std::vector<fusion::ScoreVector> models;
          for (const auto& col : a.per_input) models.push_back({col, fusion::ScoreSpace::probability});
          const auto fused = fusion::rank_fuse(models, weights);
          for (std::size_t i = 0; i < n_items; ++i) out[i].score = fused[i];
        } else {
          for (std::size_t i = 0; i < n_items; ++i) {
            std::vector<double> v;
            for (const auto& col : a.per_input) v.push_back(col[i]);
            if (fu_method == "logit-mean") {
              for (double& x : v) x = prob_to_logit(x);
              out[i].score = fusion::mean_logit_fuse(v, weights);
            } else if (fu_method == "weighted") {
              out[i].score = fusion::weighted_prob_fuse(v, weights);
            } else {
              for (double& x : v) x = fusion::quantize_prob(x);
              out[i].score = fusion::discretized_vote(v, weights);
            }
          }
        }
      }
      service::write_submission(out, fu_out);
      std::cout << "wrote " << n_items << " fused scores to " << fu_out << "\n";
    } else if (*serve) {
      service::BenchService svc(service::load_config(sv_config), sv_data);
      service::HttpServer server(svc);
      const int port = server.bind(sv_host, sv_port);
      g_server = &server;
      std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
      });
      std::cout << "listening on " << sv_host << ":" << port << std::endl;
      server.serve();
      g_server = nullptr;
    } else if (*board) {
      if (lb_json) {
        std::cout << csv::read_text(fs::path(lb_data) / "index" / "leaderboard.json");
      } else {
        std::vector<service::Receipt> receipts;
        for (const auto& s : service::read_store(lb_data)) receipts.push_back(s.receipt);
        print_board(service::compute_leaderboard(receipts, lb_view == "validation"
                                                               ? service::LeaderboardView::validation
                                                               : service::LeaderboardView::final_standings),
                    std::cout);
      }
    } else if (*rescore) {
      service::BenchService svc(service::load_config(rs_config), rs_data);
      const auto report = svc.rescore_private(rs_k);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "rescored " << report.rescored.size() << " of k=" << report.applied_k << "\n";
      for (const auto& s : report.shifts) {
        if (s.flagged) std::cout << "shift: " << s.team << " moved " << s.before << " -> " << s.after << "\n";
      }
      print_board(report.leaderboard, std::cout);
    } else if (*run_det) {
      const auto rows = parse_view(csv::read_text(rd_view));
      const fs::path root = rd_root.empty() ? fs::path(rd_view).parent_path() : fs::path(rd_root);
      std::vector<DetectorRequest> requests;
      for (const auto& r : rows) {
        fs::path p(r.path);
        if (p.is_relative()) p = root / p;
        requests.push_back({r.id, p.string()});
      }
      const auto result = run_detector(rd_cmd, requests);
      for (const auto& line : result.log) std::cerr << "detector: " << line << "\n";
      service::write_submission(result.rows, rd_out);
      std::cout << "wrote " << result.rows.size() << " scores to " << rd_out << " (" << result.log.size()
                << " issues)\n";
    }
  } catch (const service::Rejection& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
