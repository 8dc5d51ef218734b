#include "dfbench/degradation.hpp"

#include <cmath>
#include "json.hpp"
#include <sstream>

#include "dfbench/errors.hpp"
#include "dfbench/kernels.hpp"
#include "dfbench/text_raster.hpp"

namespace dfbench {

using ordered_json = nlohmann::ordered_json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr ParamSpec kGaussianNoiseParams[] = {{"sigma", 0.0, 80.0, false}};
constexpr ParamSpec kPoissonParams[] = {{"scale", 0.0, 1000.0, false, true}};
constexpr ParamSpec kSpeckleParams[] = {{"sigma", 0.0, 1.0, false}};
constexpr ParamSpec kSaltPepperParams[] = {{"p", 0.0, 1.0, false}};
constexpr ParamSpec kJpegParams[] = {{"quality", 1.0, 100.0, true}};
constexpr ParamSpec kBlurParams[] = {{"sigma", 0.0, 10.0, false}};
constexpr ParamSpec kResizeParams[] = {{"factor", 0.0, 1.0, false, true}};
constexpr ParamSpec kColorParams[] = {{"brightness", -64.0, 64.0, false}, {"contrast", 0.5, 1.5, false}};
constexpr ParamSpec kPixelateParams[] = {{"block", 1.0, 64.0, true}};
constexpr ParamSpec kOverlayParams[] = {{"scale", 2.0, 4.0, false}, {"alpha", 0.0, 0.33, false}};
constexpr ParamSpec kTextParams[] = {
    {"length", 1.0, 32.0, true}, {"glyph_scale", 1.0, 8.0, true}, {"value", 0.0, 255.0, true}};

void check_range(std::string_view kind, const ParamSpec& spec, double v) {
  const bool below = spec.lo_exclusive ? !(v > spec.lo) : !(v >= spec.lo);
  if (below || !(v <= spec.hi) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << kind << ": parameter " << spec.name << "=" << v << " outside " << (spec.lo_exclusive ? "(" : "[")
        << spec.lo << ", " << spec.hi << "]";
    throw InvalidParameter(msg.str());
  }
}

template <typename... Values>
void check_all(DegradationKind kind, Values... values) {
  const auto specs = param_specs(kind);
  const double vs[] = {static_cast<double>(values)...};
  for (std::size_t i = 0; i < sizeof...(Values); ++i) check_range(kind_name(kind), specs[i], vs[i]);
}

}  // namespace

std::string_view kind_name(DegradationKind kind) {
  switch (kind) {
    case DegradationKind::gaussian_noise: return "gaussian_noise";
    case DegradationKind::poisson_noise: return "poisson_noise";
    case DegradationKind::speckle_noise: return "speckle_noise";
    case DegradationKind::salt_pepper: return "salt_pepper";
    case DegradationKind::jpeg: return "jpeg";
    case DegradationKind::gaussian_blur: return "gaussian_blur";
    case DegradationKind::resize: return "resize";
    case DegradationKind::color_contrast: return "color_contrast";
    case DegradationKind::grayscale: return "grayscale";
    case DegradationKind::pixelate: return "pixelate";
    case DegradationKind::self_overlay: return "self_overlay";
    case DegradationKind::text_distractor: return "text_distractor";
  }
  return "unknown";
}

DegradationKind parse_kind(std::string_view name) {
  for (auto kind : kAllKinds)
    if (kind_name(kind) == name) return kind;
  throw ParseError("unknown degradation kind: " + std::string(name));
}

std::string_view interp_name(Interp interp) {
  switch (interp) {
    case Interp::nearest: return "nearest";
    case Interp::bilinear: return "bilinear";
    case Interp::bicubic: return "bicubic";
  }
  return "unknown";
}

Interp parse_interp(std::string_view name) {
  if (name == "nearest") return Interp::nearest;
  if (name == "bilinear") return Interp::bilinear;
  if (name == "bicubic") return Interp::bicubic;
  throw ParseError("unknown interpolation: " + std::string(name));
}

DegradationKind kind_of(const DegradationStep& step) {
  return static_cast<DegradationKind>(step.index());
}

std::span<const ParamSpec> param_specs(DegradationKind kind) {
  switch (kind) {
    case DegradationKind::gaussian_noise: return kGaussianNoiseParams;
    case DegradationKind::poisson_noise: return kPoissonParams;
    case DegradationKind::speckle_noise: return kSpeckleParams;
    case DegradationKind::salt_pepper: return kSaltPepperParams;
    case DegradationKind::jpeg: return kJpegParams;
    case DegradationKind::gaussian_blur: return kBlurParams;
    case DegradationKind::resize: return kResizeParams;
    case DegradationKind::color_contrast: return kColorParams;
    case DegradationKind::grayscale: return {};
    case DegradationKind::pixelate: return kPixelateParams;
    case DegradationKind::self_overlay: return kOverlayParams;
    case DegradationKind::text_distractor: return kTextParams;
  }
  return {};
}

void validate_step(const DegradationStep& step) {
  const DegradationKind kind = kind_of(step);
  std::visit(overloaded{
                 [&](const GaussianNoise& s) { check_all(kind, s.sigma); },
                 [&](const PoissonNoise& s) { check_all(kind, s.scale); },
                 [&](const SpeckleNoise& s) { check_all(kind, s.sigma); },
                 [&](const SaltPepper& s) { check_all(kind, s.p); },
                 [&](const Jpeg& s) { check_all(kind, s.quality); },
                 [&](const GaussianBlur& s) { check_all(kind, s.sigma); },
                 [&](const Resize& s) { check_all(kind, s.factor); },
                 [&](const ColorContrast& s) { check_all(kind, s.brightness, s.contrast); },
                 [&](const Grayscale&) {},
                 [&](const Pixelate& s) { check_all(kind, s.block); },
                 [&](const SelfOverlay& s) {
                   check_all(kind, s.scale, s.alpha);
                   if (s.offset_x < 0 || s.offset_y < 0) {
                     throw InvalidParameter("self_overlay: offsets must be non-negative");
                   }
                 },
                 [&](const TextDistractor& s) {
                   check_all(kind, static_cast<double>(s.text.size()), s.glyph_scale, s.value);
                   for (char c : s.text) {
                     if (!glyph_supported(c)) {
                       throw InvalidParameter(std::string("text_distractor: unsupported character '") + c + "'");
                     }
                   }
                   if (s.exclusion && (s.exclusion->w < 0 || s.exclusion->h < 0)) {
                     throw InvalidParameter("text_distractor: negative exclusion box size");
                   }
                 },
             },
             step);
}

void validate_step(const DegradationStep& step, int width, int height) {
  validate_step(step);
  if (const auto* s = std::get_if<SelfOverlay>(&step)) {
    const int max_x = kernels::overlay_extent(width, s->scale) - width;
    const int max_y = kernels::overlay_extent(height, s->scale) - height;
    if (s->offset_x > max_x || s->offset_y > max_y) {
      std::ostringstream msg;
      msg << "self_overlay: offset (" << s->offset_x << ", " << s->offset_y << ") outside [0, " << max_x
          << "] x [0, " << max_y << "]";
      throw InvalidParameter(msg.str());
    }
  }
}

ImageBuffer apply_step(const ImageBuffer& img, const DegradationStep& step, const RngStream& rng) {
  validate_step(step, img.width(), img.height());
  namespace k = kernels::parallel;
  return std::visit(
      overloaded{
          [&](const GaussianNoise& s) { return k::gaussian_noise(img, s.sigma, rng); },
          [&](const PoissonNoise& s) { return k::poisson_noise(img, s.scale, rng); },
          [&](const SpeckleNoise& s) { return k::speckle_noise(img, s.sigma, rng); },
          [&](const SaltPepper& s) { return k::salt_pepper(img, s.p, rng); },
          [&](const Jpeg& s) { return kernels::jpeg_round_trip(img, s.quality); },
          [&](const GaussianBlur& s) { return k::gaussian_blur(img, s.sigma); },
          [&](const Resize& s) { return k::resize_round_trip(img, s.factor, s.interp); },
          [&](const ColorContrast& s) { return k::color_contrast(img, s.brightness, s.contrast); },
          [&](const Grayscale&) { return k::grayscale(img); },
          [&](const Pixelate& s) { return k::pixelate(img, s.block); },
          [&](const SelfOverlay& s) { return k::self_overlay(img, s.scale, s.alpha, s.offset_x, s.offset_y); },
          [&](const TextDistractor& s) { return kernels::text_distractor(img, s); },
      },
      step);
}

ImageBuffer apply_recipe(const ImageBuffer& img, const DegradationRecipe& recipe) {
  ImageBuffer current = img;
  for (std::size_t i = 0; i < recipe.steps.size(); ++i) {
    const RngStream rng(recipe.seed, "step/" + std::to_string(i));
    current = apply_step(current, recipe.steps[i], rng);
  }
  return current;
}

// --- serialization -------------------------------------------------------

namespace {

ordered_json step_to_json(const DegradationStep& step) {
  ordered_json j;
  j["kind"] = std::string(kind_name(kind_of(step)));
  std::visit(overloaded{
                 [&](const GaussianNoise& s) { j["sigma"] = s.sigma; },
                 [&](const PoissonNoise& s) { j["scale"] = s.scale; },
                 [&](const SpeckleNoise& s) { j["sigma"] = s.sigma; },
                 [&](const SaltPepper& s) { j["p"] = s.p; },
                 [&](const Jpeg& s) { j["quality"] = s.quality; },
                 [&](const GaussianBlur& s) { j["sigma"] = s.sigma; },
                 [&](const Resize& s) {
                   j["factor"] = s.factor;
                   j["interp"] = std::string(interp_name(s.interp));
                 },
                 [&](const ColorContrast& s) {
                   j["brightness"] = s.brightness;
                   j["contrast"] = s.contrast;
                 },
                 [&](const Grayscale&) {},
                 [&](const Pixelate& s) { j["block"] = s.block; },
                 [&](const SelfOverlay& s) {
                   j["scale"] = s.scale;
                   j["alpha"] = s.alpha;
                   j["offset_x"] = s.offset_x;
                   j["offset_y"] = s.offset_y;
                 },
                 [&](const TextDistractor& s) {
                   j["text"] = s.text;
                   j["x"] = s.x;
                   j["y"] = s.y;
                   j["glyph_scale"] = s.glyph_scale;
                   j["value"] = s.value;
                   if (s.exclusion) {
                     j["exclusion"] = {s.exclusion->x, s.exclusion->y, s.exclusion->w, s.exclusion->h};
                   } else {
                     j["exclusion"] = nullptr;
                   }
                 },
             },
             step);
  return j;
}

// Reads required fields and rejects anything unrecognised.
class FieldReader {
 public:
  explicit FieldReader(const ordered_json& j) : j_(j) {
    if (!j.is_object()) throw ParseError("recipe step must be an object");
  }

  double number(const char* key) {
    const auto& v = get(key);
    if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
  }
  int integer(const char* key) {
    const auto& v = get(key);
    if (!v.is_number_integer()) throw ParseError(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
  }
  std::string string(const char* key) {
    const auto& v = get(key);
    if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }
  const ordered_json& raw(const char* key) { return get(key); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (key == "kind") continue;
      bool known = false;
      for (const auto& seen : seen_) known = known || seen == key;
      if (!known) throw ParseError("unknown field '" + key + "' in recipe step");
    }
  }

 private:
  const ordered_json& get(const char* key) {
    const auto it = j_.find(key);
    if (it == j_.end()) throw ParseError(std::string("missing field '") + key + "' in recipe step");
    seen_.emplace_back(key);
    return *it;
  }

  const ordered_json& j_;
  std::vector<std::string> seen_;
};

DegradationStep step_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ParseError("recipe step needs a string 'kind'");
  }
  FieldReader r(j);
  DegradationStep step;
  switch (parse_kind(j["kind"].get<std::string>())) {
    case DegradationKind::gaussian_noise: step = GaussianNoise{r.number("sigma")}; break;
    case DegradationKind::poisson_noise: step = PoissonNoise{r.number("scale")}; break;
    case DegradationKind::speckle_noise: step = SpeckleNoise{r.number("sigma")}; break;
    case DegradationKind::salt_pepper: step = SaltPepper{r.number("p")}; break;
    case DegradationKind::jpeg: step = Jpeg{r.integer("quality")}; break;
    case DegradationKind::gaussian_blur: step = GaussianBlur{r.number("sigma")}; break;
    case DegradationKind::resize: {
      const double factor = r.number("factor");
      step = Resize{factor, parse_interp(r.string("interp"))};
      break;
    }
    case DegradationKind::color_contrast: {
      const double brightness = r.number("brightness");
      step = ColorContrast{brightness, r.number("contrast")};
      break;
    }
    case DegradationKind::grayscale: step = Grayscale{}; break;
    case DegradationKind::pixelate: step = Pixelate{r.integer("block")}; break;
    case DegradationKind::self_overlay: {
      SelfOverlay s;
      s.scale = r.number("scale");
      s.alpha = r.number("alpha");
      s.offset_x = r.integer("offset_x");
      s.offset_y = r.integer("offset_y");
      step = s;
      break;
    }
    case DegradationKind::text_distractor: {
      TextDistractor s;
      s.text = r.string("text");
      s.x = r.integer("x");
      s.y = r.integer("y");
      s.glyph_scale = r.integer("glyph_scale");
      s.value = r.integer("value");
      const auto& box = r.raw("exclusion");
      if (!box.is_null()) {
        if (!box.is_array() || box.size() != 4) throw ParseError("exclusion must be [x, y, w, h] or null");
        s.exclusion = Rect{box[0].get<int>(), box[1].get<int>(), box[2].get<int>(), box[3].get<int>()};
      }
      step = s;
      break;
    }
  }
  r.finish();
  validate_step(step);
  return step;
}

}  // namespace

std::string serialize_step(const DegradationStep& step) { return step_to_json(step).dump(); }

std::string serialize_recipe(const DegradationRecipe& recipe) {
  ordered_json j;
  j["seed"] = recipe.seed;
  j["steps"] = ordered_json::array();
  for (const auto& step : recipe.steps) j["steps"].push_back(step_to_json(step));
  return j.dump();
}

DegradationRecipe parse_recipe(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed recipe: ") + e.what());
  }
  if (!j.is_object() || !j.contains("seed") || !j.contains("steps")) {
    throw ParseError("recipe needs 'seed' and 'steps'");
  }
  if (j.size() != 2) throw ParseError("recipe has unknown top-level fields");
  if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
    throw ParseError("recipe seed must be an integer");
  }
  if (!j["steps"].is_array()) throw ParseError("recipe steps must be an array");
  DegradationRecipe recipe;
  recipe.seed = j["seed"].get<std::uint64_t>();
  for (const auto& s : j["steps"]) recipe.steps.push_back(step_from_json(s));
  return recipe;
}

}  // namespace dfbench
