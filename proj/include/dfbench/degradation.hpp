#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dfbench/image.hpp"
#include "dfbench/rng.hpp"

namespace dfbench {

enum class DegradationKind {
  gaussian_noise,
  poisson_noise,
  speckle_noise,
  salt_pepper,
  jpeg,
  gaussian_blur,
  resize,
  color_contrast,
  grayscale,
  pixelate,
  self_overlay,
  text_distractor,
};

inline constexpr DegradationKind kAllKinds[] = {
    DegradationKind::gaussian_noise, DegradationKind::poisson_noise, DegradationKind::speckle_noise,
    DegradationKind::salt_pepper,    DegradationKind::jpeg,          DegradationKind::gaussian_blur,
    DegradationKind::resize,         DegradationKind::color_contrast, DegradationKind::grayscale,
    DegradationKind::pixelate,       DegradationKind::self_overlay,  DegradationKind::text_distractor,
};

std::string_view kind_name(DegradationKind kind);
/// Throws ParseError for unknown names.
DegradationKind parse_kind(std::string_view name);

enum class Interp { nearest, bilinear, bicubic };

std::string_view interp_name(Interp interp);
Interp parse_interp(std::string_view name);

/// Additive N(0, sigma) per sample, sigma in sample units [0, 80].
struct GaussianNoise {
  double sigma = 0.0;
  friend bool operator==(const GaussianNoise&, const GaussianNoise&) = default;
};

/// Poisson(x * scale) / scale per sample.
struct PoissonNoise {
  double scale = 1.0;
  friend bool operator==(const PoissonNoise&, const PoissonNoise&) = default;
};

/// x * (1 + n), n ~ N(0, sigma).
struct SpeckleNoise {
  double sigma = 0.0;
  friend bool operator==(const SpeckleNoise&, const SpeckleNoise&) = default;
};

/// Each pixel (all channels jointly) replaced with probability p by 0 or 255.
struct SaltPepper {
  double p = 0.0;
  friend bool operator==(const SaltPepper&, const SaltPepper&) = default;
};

struct Jpeg {
  int quality = 90;
  friend bool operator==(const Jpeg&, const Jpeg&) = default;
};

struct GaussianBlur {
  double sigma = 0.0;
  friend bool operator==(const GaussianBlur&, const GaussianBlur&) = default;
};

/// Down-scale by `factor`, then back up to the original size.
struct Resize {
  double factor = 1.0;
  Interp interp = Interp::bilinear;
  friend bool operator==(const Resize&, const Resize&) = default;
};

struct ColorContrast {
  double brightness = 0.0;
  double contrast = 1.0;
  friend bool operator==(const ColorContrast&, const ColorContrast&) = default;
};

struct Grayscale {
  friend bool operator==(const Grayscale&, const Grayscale&) = default;
};

struct Pixelate {
  int block = 1;
  friend bool operator==(const Pixelate&, const Pixelate&) = default;
};

/// Blend with a crop of the image enlarged by `scale`; crop origin is (offset_x, offset_y)
/// in the enlarged image.
struct SelfOverlay {
  double scale = 2.0;
  double alpha = 0.0;
  int offset_x = 0;
  int offset_y = 0;
  friend bool operator==(const SelfOverlay&, const SelfOverlay&) = default;
};

/// Bitmap text stamped at (x, y), never touching `exclusion`.
struct TextDistractor {
  std::string text;
  int x = 0;
  int y = 0;
  int glyph_scale = 1;
  int value = 255;
  std::optional<Rect> exclusion;
  friend bool operator==(const TextDistractor&, const TextDistractor&) = default;
};

using DegradationStep =
    std::variant<GaussianNoise, PoissonNoise, SpeckleNoise, SaltPepper, Jpeg, GaussianBlur, Resize,
                 ColorContrast, Grayscale, Pixelate, SelfOverlay, TextDistractor>;

DegradationKind kind_of(const DegradationStep& step);

/// Legal global range of one numeric parameter.
struct ParamSpec {
  std::string_view name;
  double lo;
  double hi;
  bool integer;
  bool lo_exclusive = false;
};

/// Numeric parameters a profile may sample for `kind`, in serialization order.
std::span<const ParamSpec> param_specs(DegradationKind kind);

/// Throws InvalidParameter if any parameter is outside its legal range.
void validate_step(const DegradationStep& step);
/// Also checks image-dependent constraints (overlay offset bounds).
void validate_step(const DegradationStep& step, int width, int height);

ImageBuffer apply_step(const ImageBuffer& img, const DegradationStep& step, const RngStream& rng);

struct DegradationRecipe {
  std::vector<DegradationStep> steps;
  std::uint64_t seed = 0;
  friend bool operator==(const DegradationRecipe&, const DegradationRecipe&) = default;
};

/// Step i runs with RngStream(recipe.seed, "step/<i>").
ImageBuffer apply_recipe(const ImageBuffer& img, const DegradationRecipe& recipe);

/// Compact JSON with a fixed field order; doubles are written in shortest round-trip form.
std::string serialize_recipe(const DegradationRecipe& recipe);
DegradationRecipe parse_recipe(std::string_view text);

std::string serialize_step(const DegradationStep& step);

}  // namespace dfbench
