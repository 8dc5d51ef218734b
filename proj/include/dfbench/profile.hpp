#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dfbench/degradation.hpp"
#include "dfbench/image.hpp"
#include "dfbench/rng.hpp"

namespace dfbench {

enum class Phase { train, val, public_test, private_test };

inline constexpr Phase kAllPhases[] = {Phase::train, Phase::val, Phase::public_test, Phase::private_test};

std::string_view phase_name(Phase phase);
Phase parse_phase(std::string_view name);

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const ParamRange&, const ParamRange&) = default;
};

struct ProfileEntry {
  DegradationKind kind{};
  double probability = 0.0;
  /// Keyed by ParamSpec::name. Missing parameters sample the kind's full legal range.
  std::map<std::string, ParamRange> ranges;
  /// Resize only; empty means all three.
  std::vector<Interp> interps;
};

/// Per-phase distribution over degradation pipelines.
struct DegradationProfile {
  Phase phase = Phase::train;
  std::vector<ProfileEntry> entries;
  int max_steps = 4;

  std::set<DegradationKind> kinds() const;
};

using ProfileSet = std::map<Phase, DegradationProfile>;

/// Throws InvalidProfile on empty entries, bad probabilities or out-of-range ranges.
void validate_profile(const DegradationProfile& profile);

/// Checks the cross-phase difficulty ladder: val adds speckle and Poisson noise
/// to train, public_test adds salt-and-pepper, grayscale and overlay to val,
/// and private_test adds exactly two further kinds to public_test.
void validate_ladder(const ProfileSet& profiles);

/// Parses the YAML profile file format. Unknown kinds and fields are rejected.
ProfileSet parse_profiles(std::string_view yaml_text);
ProfileSet load_profiles(const std::filesystem::path& path);

/// Image facts a sampler needs for geometry-dependent parameters.
struct SampleContext {
  int width = 0;
  int height = 0;
  /// Exclusion region for text distractors.
  std::optional<Rect> face_box;
};

/// Each entry is kept independently with its probability, parameters are drawn
/// uniformly from their ranges, the kept steps are shuffled and truncated to
/// max_steps. The recipe seed is the first draw from `rng`.
DegradationRecipe sample_recipe(const DegradationProfile& profile, RngStream& rng, const SampleContext& context);

}  // namespace dfbench
