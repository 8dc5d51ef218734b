#include "dfbench/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <map>
#include <set>
#include <sstream>

#include "dfbench/csv.hpp"
#include "dfbench/errors.hpp"

namespace dfbench {

namespace fs = std::filesystem;

// --- manifest ---------------------------------------------------------------

namespace {

const csv::Row kManifestHeader = {"id", "path", "label", "split", "fake_method", "recipe", "face_box"};

int parse_label(const std::string& s) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ParseError("manifest: label must be 0 or 1, got '" + s + "'");
}

}  // namespace

std::string format_manifest(const Manifest& manifest) {
  csv::Table t;
  t.header = kManifestHeader;
  for (const auto& r : manifest) {
    t.rows.push_back({r.id, r.path, std::to_string(r.label), std::string(phase_name(r.split)), r.fake_method,
                      serialize_recipe(r.recipe), r.face_box ? format_rect(*r.face_box) : ""});
  }
  return csv::format_table(t);
}

Manifest parse_manifest(std::string_view csv_text) {
  const auto t = csv::parse_table(csv_text);
  const auto c_id = t.column("id"), c_path = t.column("path"), c_label = t.column("label"),
             c_split = t.column("split"), c_method = t.column("fake_method"), c_recipe = t.column("recipe"),
             c_box = t.column("face_box");
  Manifest out;
  std::set<std::string> ids;
  for (const auto& row : t.rows) {
    ManifestRecord r;
    r.id = row[c_id];
    if (!ids.insert(r.id).second) throw ParseError("manifest: duplicate id '" + r.id + "'");
    r.path = row[c_path];
    r.label = parse_label(row[c_label]);
    r.split = parse_phase(row[c_split]);
    r.fake_method = row[c_method];
    if ((r.label == 0) != (r.fake_method == kRealMethod)) {
      throw ParseError("manifest: row '" + r.id + "' violates label=0 <=> fake_method=none");
    }
    r.recipe = parse_recipe(row[c_recipe]);
    r.face_box = parse_rect(row[c_box]);
    out.push_back(std::move(r));
  }
  return out;
}

Manifest read_manifest(const fs::path& path) { return parse_manifest(csv::read_text(path)); }

void write_manifest(const Manifest& manifest, const fs::path& path) {
  csv::write_file_atomic(path, format_manifest(manifest));
}

std::vector<SplitSpec> challenge_specs(double scale) {
  auto scaled = [&](int n) { return std::max(2, static_cast<int>(std::lround(n * scale))); };
  return {
      {Phase::train, scaled(1000), 0.5},
      {Phase::val, scaled(100), 0.5},
      {Phase::public_test, scaled(1000), 0.5},
      {Phase::private_test, scaled(1000), 0.5},
  };
}

// --- pseudo-fakes -----------------------------------------------------------

void validate_pseudo_fake_params(const PseudoFakeParams& p) {
  if (!(p.warp_magnitude > 0.0 && p.warp_magnitude <= 0.1)) {
    throw InvalidParameter("pseudo-fake: warp_magnitude must lie in (0, 0.1]");
  }
  if (!(p.mask_softness >= 0.0)) throw InvalidParameter("pseudo-fake: mask_softness must be >= 0");
  if (!(p.color_shift >= 0.0 && p.color_shift <= 255.0)) {
    throw InvalidParameter("pseudo-fake: color_shift must lie in [0, 255]");
  }
  if (!(p.blend_alpha_lo >= 0.0 && p.blend_alpha_lo <= p.blend_alpha_hi && p.blend_alpha_hi <= 1.0)) {
    throw InvalidParameter("pseudo-fake: blend alpha range must satisfy 0 <= lo <= hi <= 1");
  }
}

PseudoFake synth_pseudo_fake(const ImageBuffer& src, const PseudoFakeParams& params, RngStream& rng,
                             std::optional<Rect> face_box) {
  validate_pseudo_fake_params(params);
  const int width = src.width();
  const int height = src.height();
  const int channels = src.channels();
  const Rect box = face_box.value_or(central_box(width, height));

  // Ellipse strictly inside the box: centre jitter 5% plus semi-axis at most 45%.
  const double cx = box.x + box.w * (0.5 + rng.uniform(-0.05, 0.05));
  const double cy = box.y + box.h * (0.5 + rng.uniform(-0.05, 0.05));
  const double ax = box.w * 0.5 * rng.uniform(0.6, 0.9);
  const double ay = box.h * 0.5 * rng.uniform(0.6, 0.9);

  const double w = params.warp_magnitude;
  const double scale = 1.0 + rng.uniform(-w, w);
  const double theta = rng.uniform(-w, w);
  const double tx = rng.uniform(-w, w) * width;
  const double ty = rng.uniform(-w, w) * height;
  double shift[3] = {0.0, 0.0, 0.0};
  for (int c = 0; c < channels; ++c) shift[c] = rng.uniform(-params.color_shift, params.color_shift);
  const double alpha = rng.uniform(params.blend_alpha_lo, params.blend_alpha_hi);

  if (ax < 1.0 || ay < 1.0) throw DegenerateMask("pseudo-fake: ellipse smaller than one pixel");

  std::vector<float> mask(static_cast<std::size_t>(width) * height, 0.0f);
  const double min_axis = std::min(ax, ay);
  std::size_t covered = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double nx = (x - cx) / ax;
      const double ny = (y - cy) / ay;
      const double inside = (1.0 - std::sqrt(nx * nx + ny * ny)) * min_axis;
      double m;
      if (params.mask_softness > 0.0) {
        m = std::clamp(inside / params.mask_softness, 0.0, 1.0);
      } else {
        m = inside > 0.0 ? 1.0 : 0.0;
      }
      mask[static_cast<std::size_t>(y) * width + x] = static_cast<float>(m);
      covered += m > 0.0;
    }
  }
  if (covered == 0) throw DegenerateMask("pseudo-fake: empty blend mask");

  const double cos_t = std::cos(-theta);
  const double sin_t = std::sin(-theta);
  auto warped = [&](int x, int y, int c) {
    // Inverse map: undo translation, rotation and scale about the ellipse centre.
    const double dx = (x - cx - tx) / scale;
    const double dy = (y - cy - ty) / scale;
    const double sx = std::clamp(cx + cos_t * dx - sin_t * dy, 0.0, width - 1.0);
    const double sy = std::clamp(cy + sin_t * dx + cos_t * dy, 0.0, height - 1.0);
    const int x0 = static_cast<int>(sx);
    const int y0 = static_cast<int>(sy);
    const int x1 = std::min(x0 + 1, width - 1);
    const int y1 = std::min(y0 + 1, height - 1);
    const double fx = sx - x0;
    const double fy = sy - y0;
    const double top = (1.0 - fx) * src.at(x0, y0, c) + fx * src.at(x1, y0, c);
    const double bottom = (1.0 - fx) * src.at(x0, y1, c) + fx * src.at(x1, y1, c);
    return (1.0 - fy) * top + fy * bottom;
  };

  ImageBuffer out = src;
  std::size_t changed = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double m = mask[static_cast<std::size_t>(y) * width + x];
      if (m == 0.0) continue;
      const double a = alpha * m;
      bool differs = false;
      for (int c = 0; c < channels; ++c) {
        const std::uint8_t v = to_sample(src.at(x, y, c) * (1.0 - a) + (warped(x, y, c) + shift[c]) * a);
        differs = differs || v != src.at(x, y, c);
        out.at(x, y, c) = v;
      }
      changed += differs;
    }
  }
  if (changed * 100 < static_cast<std::size_t>(width) * height) {
    throw DegenerateMask("pseudo-fake: composite differs from source on fewer than 1% of pixels");
  }
  return PseudoFake{std::move(out), std::move(mask)};
}

// --- sources and planning ---------------------------------------------------

std::vector<SourceImage> scan_sources(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<std::string, Rect> boxes;
  const fs::path faces = dir / "faces.csv";
  if (fs::exists(faces)) {
    const auto t = csv::read_table(faces);
    const auto ci = t.column("id"), cx = t.column("x"), cy = t.column("y"), cw = t.column("w"), ch = t.column("h");
    for (const auto& row : t.rows) {
      boxes[row[ci]] = Rect{std::stoi(row[cx]), std::stoi(row[cy]), std::stoi(row[cw]), std::stoi(row[ch])};
    }
  }
  std::vector<SourceImage> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".png" && ext != ".jpg" && ext != ".jpeg") continue;
    SourceImage s;
    s.id = entry.path().stem().string();
    s.path = entry.path();
    if (auto it = boxes.find(s.id); it != boxes.end()) s.face_box = it->second;
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].id == out[i - 1].id) throw IoError("duplicate source id '" + out[i].id + "' in " + dir.string());
  }
  return out;
}

std::vector<PlannedItem> plan_corpus(std::span<const std::string> source_ids, std::span<const SplitSpec> specs,
                                     std::uint64_t seed) {
  std::size_t needed = 0;
  std::set<Phase> seen;
  for (const auto& spec : specs) {
    if (spec.total < 0) throw InvalidParameter("split total must be non-negative");
    if (!(spec.real_fraction >= 0.0 && spec.real_fraction <= 1.0)) {
      throw InvalidParameter("real_fraction must lie in [0, 1]");
    }
    if (!seen.insert(spec.split).second) {
      throw InvalidParameter("split '" + std::string(phase_name(spec.split)) + "' specified twice");
    }
    needed += static_cast<std::size_t>(spec.total);
  }
  std::vector<std::string> pool(source_ids.begin(), source_ids.end());
  std::sort(pool.begin(), pool.end());
  if (std::adjacent_find(pool.begin(), pool.end()) != pool.end()) {
    throw InvalidParameter("source ids must be unique");
  }
  if (pool.size() < needed) {
    throw CapacityError("corpus needs " + std::to_string(needed) + " source images but only " +
                        std::to_string(pool.size()) + " are available (short by " +
                        std::to_string(needed - pool.size()) + ")");
  }
  RngStream assign(seed, "corpus/assign");
  assign.shuffle(std::span<std::string>(pool));

  std::vector<PlannedItem> out;
  std::size_t next = 0;
  for (const auto& spec : specs) {
    const int reals = static_cast<int>(std::floor(spec.total * spec.real_fraction));
    std::vector<PlannedItem> items;
    for (int i = 0; i < spec.total; ++i) {
      items.push_back(PlannedItem{"", spec.split, i < reals ? 0 : 1, pool[next++]});
    }
    RngStream order(seed, "corpus/order/" + std::string(phase_name(spec.split)));
    order.shuffle(std::span<PlannedItem>(items));
    for (std::size_t i = 0; i < items.size(); ++i) {
      std::ostringstream id;
      id << phase_name(spec.split) << '_';
      id.width(5);
      id.fill('0');
      id << i;
      items[i].id = id.str();
    }
    out.insert(out.end(), items.begin(), items.end());
  }
  return out;
}

// --- build ------------------------------------------------------------------

BuildResult build_corpus(std::span<const SourceImage> sources, std::span<const SplitSpec> specs,
                         const ProfileSet& profiles, std::uint64_t seed, const fs::path& out_dir,
                         const BuildOptions& options) {
  validate_pseudo_fake_params(options.fake_params);
  for (const auto& spec : specs) {
    if (!profiles.contains(spec.split)) {
      throw InvalidProfile("no degradation profile for split '" + std::string(phase_name(spec.split)) + "'");
    }
  }
  std::map<std::string, const SourceImage*> by_id;
  std::vector<std::string> ids;
  for (const auto& s : sources) {
    if (!by_id.emplace(s.id, &s).second) throw InvalidParameter("duplicate source id '" + s.id + "'");
    ids.push_back(s.id);
  }
  const auto plan = plan_corpus(ids, specs, seed);

  for (const auto& spec : specs) {
    fs::create_directories(out_dir / "images" / phase_name(spec.split));
    fs::create_directories(out_dir / "clean" / phase_name(spec.split));
  }

  BuildResult result;
  result.manifest.resize(plan.size());
  result.provenance.resize(plan.size());
  std::vector<std::exception_ptr> errors(plan.size());
  const auto n = static_cast<std::ptrdiff_t>(plan.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const PlannedItem& item = plan[i];
      const SourceImage& source = *by_id.at(item.source_id);
      const ImageBuffer original = read_image(source.path);
      const Rect face = source.face_box.value_or(central_box(original.width(), original.height()));

      ImageBuffer clean = original;
      if (item.label == 1) {
        bool made = false;
        for (int attempt = 0; attempt < options.max_fake_attempts && !made; ++attempt) {
          RngStream rng(seed, "fake/" + item.id + "/" + std::to_string(attempt));
          try {
            clean = synth_pseudo_fake(original, options.fake_params, rng, face).image;
            made = true;
          } catch (const DegenerateMask&) {
          }
        }
        if (!made) {
          throw DegenerateMask("could not synthesise a pseudo-fake for '" + item.id + "' in " +
                               std::to_string(options.max_fake_attempts) + " attempts");
        }
      }

      RngStream recipe_rng(seed, "recipe/" + item.id);
      const auto recipe = sample_recipe(profiles.at(item.split), recipe_rng,
                                        SampleContext{clean.width(), clean.height(), face});
      const ImageBuffer degraded = apply_recipe(clean, recipe);

      const std::string split(phase_name(item.split));
      const std::string rel = "images/" + split + "/" + item.id + ".png";
      const std::string clean_rel = "clean/" + split + "/" + item.id + ".png";
      write_png(degraded, out_dir / rel);
      write_png(clean, out_dir / clean_rel);

      ManifestRecord rec;
      rec.id = item.id;
      rec.path = rel;
      rec.label = item.label;
      rec.split = item.split;
      rec.fake_method = std::string(item.label ? kPseudoFakeMethod : kRealMethod);
      rec.recipe = recipe;
      rec.face_box = face;
      result.manifest[i] = std::move(rec);
      result.provenance[i] = ProvenanceRecord{item.id, item.source_id, clean_rel};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<std::size_t> order(plan.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return result.manifest[a].id < result.manifest[b].id; });
  BuildResult sorted;
  for (auto i : order) {
    sorted.manifest.push_back(std::move(result.manifest[i]));
    sorted.provenance.push_back(std::move(result.provenance[i]));
  }

  write_manifest(sorted.manifest, out_dir / "manifest.csv");
  csv::Table prov;
  prov.header = {"id", "source_id", "clean_path"};
  for (const auto& p : sorted.provenance) prov.rows.push_back({p.id, p.source_id, p.clean_path});
  csv::write_file_atomic(out_dir / "sources.csv", csv::format_table(prov));
  return sorted;
}

std::vector<ProvenanceRecord> read_provenance(const fs::path& path) {
  const auto t = csv::read_table(path);
  const auto ci = t.column("id"), cs = t.column("source_id"), cp = t.column("clean_path");
  std::vector<ProvenanceRecord> out;
  for (const auto& row : t.rows) out.push_back({row[ci], row[cs], row[cp]});
  return out;
}

// --- participant view -------------------------------------------------------

ParticipantView participant_view(const Manifest& manifest, std::uint64_t shuffle_seed) {
  ParticipantView view;
  view.shuffle_seed = shuffle_seed;
  for (const auto& r : manifest) view.rows.push_back(ViewRecord{r.id, r.path, r.split, r.recipe, r.face_box});
  RngStream rng(shuffle_seed, "participant_view");
  rng.shuffle(std::span<ViewRecord>(view.rows));
  return view;
}

std::string format_view(const ParticipantView& view) {
  csv::Table t;
  t.header = {"id", "path", "split", "recipe", "face_box"};
  for (const auto& r : view.rows) {
    t.rows.push_back({r.id, r.path, std::string(phase_name(r.split)), serialize_recipe(r.recipe),
                      r.face_box ? format_rect(*r.face_box) : ""});
  }
  return csv::format_table(t);
}

std::vector<ViewRecord> parse_view(std::string_view csv_text) {
  const auto t = csv::parse_table(csv_text);
  const auto ci = t.column("id"), cp = t.column("path");
  const bool has_split = t.has_column("split"), has_recipe = t.has_column("recipe"),
             has_box = t.has_column("face_box");
  std::vector<ViewRecord> out;
  for (const auto& row : t.rows) {
    ViewRecord r;
    r.id = row[ci];
    r.path = row[cp];
    if (has_split) r.split = parse_phase(row[t.column("split")]);
    if (has_recipe) r.recipe = parse_recipe(row[t.column("recipe")]);
    if (has_box) r.face_box = parse_rect(row[t.column("face_box")]);
    out.push_back(std::move(r));
  }
  return out;
}

// --- synthetic reals --------------------------------------------------------

ImageBuffer synthetic_face(int size, RngStream& rng) {
  ImageBuffer img(size, size, 3);
  auto rand_color = [&](double lo, double hi) {
    return std::array<double, 3>{rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
  };
  const auto bg_top = rand_color(20, 235);
  const auto bg_bottom = rand_color(20, 235);
  const double skin_base = rng.uniform(90, 230);
  const std::array<double, 3> skin = {skin_base, skin_base * rng.uniform(0.7, 0.85), skin_base * rng.uniform(0.55, 0.75)};
  const auto hair = rand_color(10, 120);
  const double s = size;
  const double fx = s * (0.5 + rng.uniform(-0.04, 0.04));
  const double fy = s * (0.52 + rng.uniform(-0.04, 0.04));
  const double fa = s * rng.uniform(0.22, 0.28);
  const double fb = s * rng.uniform(0.28, 0.34);
  const double eye_dx = fa * rng.uniform(0.35, 0.45);
  const double eye_y = fy - fb * rng.uniform(0.15, 0.3);
  const double eye_r = s * rng.uniform(0.025, 0.04);
  const double mouth_y = fy + fb * rng.uniform(0.4, 0.55);
  const double mouth_w = fa * rng.uniform(0.35, 0.55);
  const double light = rng.uniform(-1.0, 1.0);

  auto ellipse = [](double x, double y, double cx, double cy, double a, double b) {
    const double nx = (x - cx) / a, ny = (y - cy) / b;
    return nx * nx + ny * ny;
  };

  for (int y = 0; y < size; ++y) {
    RngStream row_rng = rng.substream(static_cast<std::uint64_t>(y));
    for (int x = 0; x < size; ++x) {
      const double t = y / s;
      std::array<double, 3> px;
      for (int c = 0; c < 3; ++c) px[c] = bg_top[c] * (1.0 - t) + bg_bottom[c] * t;
      if (ellipse(x, y, fx, fy - fb * 0.25, fa * 1.15, fb * 0.95) < 1.0) px = hair;
      const double d = ellipse(x, y, fx, fy, fa, fb);
      if (d < 1.0) {
        const double shade = 1.0 - 0.25 * d + 0.1 * light * (x - fx) / fa;
        for (int c = 0; c < 3; ++c) px[c] = skin[c] * shade;
        for (double side : {-1.0, 1.0}) {
          const double e = ellipse(x, y, fx + side * eye_dx, eye_y, eye_r * 1.6, eye_r);
          if (e < 1.0) px = {240, 240, 240};
          if (ellipse(x, y, fx + side * eye_dx, eye_y, eye_r * 0.7, eye_r * 0.7) < 1.0) px = {35, 25, 20};
        }
        if (ellipse(x, y, fx, mouth_y, mouth_w, s * 0.02) < 1.0) px = {skin[0] * 0.75, skin[1] * 0.4, skin[2] * 0.4};
      }
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = to_sample(px[c] + row_rng.normal(0.0, 2.0));
    }
  }
  return img;
}

}  // namespace dfbench
