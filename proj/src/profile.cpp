#include "dfbench/profile.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dfbench/errors.hpp"
#include "dfbench/kernels.hpp"
#include "dfbench/text_raster.hpp"

namespace dfbench {

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::train: return "train";
    case Phase::val: return "val";
    case Phase::public_test: return "public_test";
    case Phase::private_test: return "private_test";
  }
  return "unknown";
}

Phase parse_phase(std::string_view name) {
  for (auto p : kAllPhases)
    if (phase_name(p) == name) return p;
  throw ParseError("unknown phase: " + std::string(name));
}

std::set<DegradationKind> DegradationProfile::kinds() const {
  std::set<DegradationKind> out;
  for (const auto& e : entries) out.insert(e.kind);
  return out;
}

namespace {

const ParamSpec* find_spec(DegradationKind kind, std::string_view name) {
  for (const auto& spec : param_specs(kind))
    if (spec.name == name) return &spec;
  return nullptr;
}

ParamRange range_for(const ProfileEntry& entry, const ParamSpec& spec) {
  const auto it = entry.ranges.find(std::string(spec.name));
  if (it != entry.ranges.end()) return it->second;
  return ParamRange{spec.lo, spec.hi};
}

double draw(RngStream& rng, const ParamSpec& spec, const ParamRange& range) {
  if (spec.integer) {
    const auto lo = static_cast<std::int64_t>(std::ceil(range.lo));
    const auto hi = static_cast<std::int64_t>(std::floor(range.hi));
    return static_cast<double>(rng.uniform_int(lo, hi));
  }
  // An exclusive lower bound of 0 must never be hit exactly.
  double v = rng.uniform(range.lo, range.hi);
  if (spec.lo_exclusive && v <= spec.lo) v = range.hi;
  return v;
}

std::string describe(const DegradationProfile& p) { return "profile '" + std::string(phase_name(p.phase)) + "'"; }

}  // namespace

void validate_profile(const DegradationProfile& profile) {
  if (profile.entries.empty()) throw InvalidProfile(describe(profile) + " has no entries");
  if (profile.max_steps < 1) throw InvalidProfile(describe(profile) + ": max_steps must be >= 1");
  std::set<DegradationKind> seen;
  for (const auto& e : profile.entries) {
    const std::string where = describe(profile) + ", kind " + std::string(kind_name(e.kind));
    if (!seen.insert(e.kind).second) throw InvalidProfile(where + " listed twice");
    if (!(e.probability >= 0.0 && e.probability <= 1.0)) {
      throw InvalidProfile(where + ": selection probability must lie in [0, 1]");
    }
    for (const auto& [name, range] : e.ranges) {
      const ParamSpec* spec = find_spec(e.kind, name);
      if (!spec) throw InvalidProfile(where + ": unknown parameter '" + name + "'");
      const bool lo_ok = spec->lo_exclusive ? range.lo > spec->lo : range.lo >= spec->lo;
      if (!lo_ok || !(range.hi <= spec->hi) || !(range.lo <= range.hi)) {
        std::ostringstream msg;
        msg << where << ": range " << name << " [" << range.lo << ", " << range.hi
            << "] is outside the legal range [" << spec->lo << ", " << spec->hi << "]";
        throw InvalidProfile(msg.str());
      }
      if (spec->integer && std::ceil(range.lo) > std::floor(range.hi)) {
        throw InvalidProfile(where + ": integer range " + name + " contains no integer");
      }
    }
    if (!e.interps.empty() && e.kind != DegradationKind::resize) {
      throw InvalidProfile(where + ": 'interp' only applies to resize");
    }
  }
}

void validate_ladder(const ProfileSet& profiles) {
  for (auto phase : kAllPhases) {
    if (!profiles.contains(phase)) {
      throw InvalidProfile("profile set is missing phase '" + std::string(phase_name(phase)) + "'");
    }
  }
  for (const auto& [phase, profile] : profiles) {
    if (profile.phase != phase) throw InvalidProfile("profile keyed under the wrong phase");
    validate_profile(profile);
  }

  auto require_superset = [&](Phase lower, Phase upper, std::initializer_list<DegradationKind> added) {
    std::set<DegradationKind> needed = profiles.at(lower).kinds();
    needed.insert(added.begin(), added.end());
    const auto have = profiles.at(upper).kinds();
    for (auto k : needed) {
      if (!have.contains(k)) {
        throw InvalidProfile("profile '" + std::string(phase_name(upper)) + "' must include kind '" +
                             std::string(kind_name(k)) + "'");
      }
    }
  };
  require_superset(Phase::train, Phase::val, {DegradationKind::speckle_noise, DegradationKind::poisson_noise});
  require_superset(Phase::val, Phase::public_test,
                   {DegradationKind::salt_pepper, DegradationKind::grayscale, DegradationKind::self_overlay});
  require_superset(Phase::public_test, Phase::private_test, {});

  const auto pub = profiles.at(Phase::public_test).kinds();
  const auto priv = profiles.at(Phase::private_test).kinds();
  const auto extra = std::count_if(priv.begin(), priv.end(), [&](auto k) { return !pub.contains(k); });
  if (extra != 2) {
    throw InvalidProfile("profile 'private_test' must add exactly two kinds to 'public_test', adds " +
                         std::to_string(extra));
  }
}

ProfileSet parse_profiles(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("malformed profile file: ") + e.what());
  }
  if (!root.IsMap() || !root["phases"] || !root["phases"].IsMap()) {
    throw ParseError("profile file needs a top-level 'phases' map");
  }
  for (const auto& kv : root) {
    if (kv.first.as<std::string>() != "phases") {
      throw ParseError("unknown top-level key '" + kv.first.as<std::string>() + "' in profile file");
    }
  }

  ProfileSet out;
  try {
    for (const auto& phase_node : root["phases"]) {
      DegradationProfile profile;
      profile.phase = parse_phase(phase_node.first.as<std::string>());
      const YAML::Node& body = phase_node.second;
      for (const auto& kv : body) {
        const auto key = kv.first.as<std::string>();
        if (key != "max_steps" && key != "entries") {
          throw ParseError("unknown key '" + key + "' in phase '" + std::string(phase_name(profile.phase)) + "'");
        }
      }
      if (body["max_steps"]) profile.max_steps = body["max_steps"].as<int>();
      for (const auto& entry_node : body["entries"]) {
        ProfileEntry entry;
        if (!entry_node["kind"]) throw ParseError("profile entry without 'kind'");
        entry.kind = parse_kind(entry_node["kind"].as<std::string>());
        if (!entry_node["probability"]) throw ParseError("profile entry without 'probability'");
        entry.probability = entry_node["probability"].as<double>();
        for (const auto& kv : entry_node) {
          const auto key = kv.first.as<std::string>();
          if (key == "kind" || key == "probability") continue;
          if (key == "interp") {
            for (const auto& i : kv.second) entry.interps.push_back(parse_interp(i.as<std::string>()));
            continue;
          }
          if (!find_spec(entry.kind, key)) {
            throw ParseError("unknown parameter '" + key + "' for kind '" + std::string(kind_name(entry.kind)) + "'");
          }
          if (!kv.second.IsSequence() || kv.second.size() != 2) {
            throw ParseError("parameter '" + key + "' must be a [lo, hi] pair");
          }
          entry.ranges[key] = ParamRange{kv.second[0].as<double>(), kv.second[1].as<double>()};
        }
        profile.entries.push_back(std::move(entry));
      }
      const Phase phase = profile.phase;
      if (!out.emplace(phase, std::move(profile)).second) {
        throw ParseError("phase '" + std::string(phase_name(phase)) + "' defined twice");
      }
    }
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("bad value in profile file: ") + e.what());
  }
  for (const auto& [phase, profile] : out) validate_profile(profile);
  return out;
}

ProfileSet load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_profiles(buf.str());
}

namespace {

TextDistractor sample_text(const ProfileEntry& entry, RngStream& rng, const SampleContext& ctx) {
  const auto specs = param_specs(DegradationKind::text_distractor);
  TextDistractor t;
  const int length = static_cast<int>(draw(rng, specs[0], range_for(entry, specs[0])));
  t.glyph_scale = static_cast<int>(draw(rng, specs[1], range_for(entry, specs[1])));
  t.value = static_cast<int>(draw(rng, specs[2], range_for(entry, specs[2])));
  for (int i = 0; i < length; ++i) {
    t.text += kTextAlphabet[static_cast<std::size_t>(rng.uniform_int(0, kTextAlphabet.size() - 1))];
  }
  t.exclusion = ctx.face_box;

  const Rect extent = text_bounds(t.text, 0, 0, t.glyph_scale);
  const int max_x = std::max(0, ctx.width - extent.w);
  const int max_y = std::max(0, ctx.height - extent.h);
  constexpr int kPlacementAttempts = 32;
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    t.x = static_cast<int>(rng.uniform_int(0, max_x));
    t.y = static_cast<int>(rng.uniform_int(0, max_y));
    if (!t.exclusion || !text_bounds(t.text, t.x, t.y, t.glyph_scale).intersects(*t.exclusion)) break;
  }
  // If every attempt overlapped, rasterization still clips against the exclusion box.
  return t;
}

DegradationStep sample_step(const ProfileEntry& entry, RngStream& rng, const SampleContext& ctx) {
  const auto specs = param_specs(entry.kind);
  auto value = [&](std::size_t i) { return draw(rng, specs[i], range_for(entry, specs[i])); };
  switch (entry.kind) {
    case DegradationKind::gaussian_noise: return GaussianNoise{value(0)};
    case DegradationKind::poisson_noise: return PoissonNoise{value(0)};
    case DegradationKind::speckle_noise: return SpeckleNoise{value(0)};
    case DegradationKind::salt_pepper: return SaltPepper{value(0)};
    case DegradationKind::jpeg: return Jpeg{static_cast<int>(value(0))};
    case DegradationKind::gaussian_blur: return GaussianBlur{value(0)};
    case DegradationKind::resize: {
      const double factor = value(0);
      static constexpr Interp kAll[] = {Interp::nearest, Interp::bilinear, Interp::bicubic};
      const std::span<const Interp> pool =
          entry.interps.empty() ? std::span<const Interp>(kAll) : std::span<const Interp>(entry.interps);
      const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1));
      return Resize{factor, pool[pick]};
    }
    case DegradationKind::color_contrast: {
      const double brightness = value(0);
      return ColorContrast{brightness, value(1)};
    }
    case DegradationKind::grayscale: return Grayscale{};
    case DegradationKind::pixelate: return Pixelate{static_cast<int>(value(0))};
    case DegradationKind::self_overlay: {
      SelfOverlay s;
      s.scale = value(0);
      s.alpha = value(1);
      s.offset_x = static_cast<int>(rng.uniform_int(0, kernels::overlay_extent(ctx.width, s.scale) - ctx.width));
      s.offset_y = static_cast<int>(rng.uniform_int(0, kernels::overlay_extent(ctx.height, s.scale) - ctx.height));
      return s;
    }
    case DegradationKind::text_distractor: return sample_text(entry, rng, ctx);
  }
  throw InvalidProfile("unhandled kind");
}

}  // namespace

DegradationRecipe sample_recipe(const DegradationProfile& profile, RngStream& rng, const SampleContext& context) {
  validate_profile(profile);
  if (context.width < ImageBuffer::kMinSide || context.height < ImageBuffer::kMinSide) {
    throw InvalidParameter("sample_recipe: context needs the image size");
  }
  DegradationRecipe recipe;
  recipe.seed = rng.next_u64();
  for (const auto& entry : profile.entries) {
    if (!rng.bernoulli(entry.probability)) continue;
    recipe.steps.push_back(sample_step(entry, rng, context));
  }
  rng.shuffle(std::span<DegradationStep>(recipe.steps));
  if (recipe.steps.size() > static_cast<std::size_t>(profile.max_steps)) recipe.steps.resize(profile.max_steps);
  return recipe;
}

}  // namespace dfbench
