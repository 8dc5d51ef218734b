#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfbench/degradation.hpp"
#include "dfbench/image.hpp"
#include "dfbench/profile.hpp"
#include "dfbench/rng.hpp"

namespace dfbench {

inline constexpr std::string_view kRealMethod = "none";
/// Tag for self-blended pseudo-fakes; kept distinct from any real generator name.
inline constexpr std::string_view kPseudoFakeMethod = "sbi_pseudo";

/// One corpus item. label 0 = real, 1 = fake.
struct ManifestRecord {
  std::string id;
  std::string path;
  int label = 0;
  Phase split = Phase::train;
  std::string fake_method{kRealMethod};
  DegradationRecipe recipe;
  std::optional<Rect> face_box;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

using Manifest = std::vector<ManifestRecord>;

/// Header: id,path,label,split,fake_method,recipe,face_box
std::string format_manifest(const Manifest& manifest);
Manifest parse_manifest(std::string_view csv_text);
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct SplitSpec {
  Phase split = Phase::train;
  int total = 0;
  double real_fraction = 0.5;
};

/// 1000/100/1000/1000 items, half real, scaled by `scale` (rounded, at least 2).
std::vector<SplitSpec> challenge_specs(double scale = 1.0);

struct PseudoFakeParams {
  double mask_softness = 6.0;    // pixels
  double warp_magnitude = 0.04;  // fraction of width, (0, 0.1]
  double color_shift = 12.0;     // sample units
  double blend_alpha_lo = 0.5;
  double blend_alpha_hi = 1.0;
};

void validate_pseudo_fake_params(const PseudoFakeParams& params);

struct PseudoFake {
  ImageBuffer image;
  /// Blend weight per pixel in [0, 1]; zero outside the ellipse.
  std::vector<float> mask;
};

/// Self-blended forgery: an affinely warped, colour-shifted copy of `src` is
/// alpha-blended back under a soft ellipse inside the face box (central 60%
/// when absent). Throws DegenerateMask when the mask is empty or the composite
/// differs from `src` on fewer than 1% of pixels.
PseudoFake synth_pseudo_fake(const ImageBuffer& src, const PseudoFakeParams& params, RngStream& rng,
                             std::optional<Rect> face_box = std::nullopt);

struct SourceImage {
  std::string id;
  std::filesystem::path path;
  std::optional<Rect> face_box;
};

/// PNG/JPEG files in `dir`, sorted by id (file stem). An optional faces.csv
/// (id,x,y,w,h) supplies face boxes.
std::vector<SourceImage> scan_sources(const std::filesystem::path& dir);

struct PlannedItem {
  std::string id;
  Phase split = Phase::train;
  int label = 0;
  std::string source_id;
};

/// Assigns disjoint source ids to splits and labels. Throws CapacityError when
/// there are not enough sources. Output is ordered by split, then id.
std::vector<PlannedItem> plan_corpus(std::span<const std::string> source_ids, std::span<const SplitSpec> specs,
                                     std::uint64_t seed);

struct BuildOptions {
  PseudoFakeParams fake_params;
  int max_fake_attempts = 16;
};

struct ProvenanceRecord {
  std::string id;
  std::string source_id;
  std::string clean_path;
};

struct BuildResult {
  Manifest manifest;
  std::vector<ProvenanceRecord> provenance;
};

/// Writes images/<split>/<id>.png (degraded), clean/<split>/<id>.png (before
/// degradation), manifest.csv and sources.csv under `out_dir`. Items render in
/// parallel; all outputs are independent of the thread count.
BuildResult build_corpus(std::span<const SourceImage> sources, std::span<const SplitSpec> specs,
                         const ProfileSet& profiles, std::uint64_t seed, const std::filesystem::path& out_dir,
                         const BuildOptions& options = {});

std::vector<ProvenanceRecord> read_provenance(const std::filesystem::path& path);

/// Label-free projection handed to participants.
struct ViewRecord {
  std::string id;
  std::string path;
  Phase split = Phase::train;
  DegradationRecipe recipe;
  std::optional<Rect> face_box;
};

struct ParticipantView {
  std::uint64_t shuffle_seed = 0;
  std::vector<ViewRecord> rows;
};

/// Drops label and fake_method, shuffles rows with `shuffle_seed`.
ParticipantView participant_view(const Manifest& manifest, std::uint64_t shuffle_seed);

/// Header: id,path,split,recipe,face_box
std::string format_view(const ParticipantView& view);
/// Accepts any manifest-like CSV with at least id and path columns.
std::vector<ViewRecord> parse_view(std::string_view csv_text);

/// Procedural face-like image used as a stand-in real when no dataset is at hand.
ImageBuffer synthetic_face(int size, RngStream& rng);

}  // namespace dfbench
