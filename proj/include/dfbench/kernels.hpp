#pragma once

// Pixel kernels behind apply_step.
//
// `parallel` holds the production kernels, OpenMP-parallel over rows. Every
// random draw comes from a per-row substream, so outputs do not depend on
// the thread count. `reference` holds naive serial versions kept as test
// oracles and as the baseline for bench/.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dfbench/degradation.hpp"
#include "dfbench/image.hpp"
#include "dfbench/rng.hpp"

namespace dfbench::kernels {

/// Normalized 1-D Gaussian taps of radius ceil(3 * sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Planar-free description of an interleaved raster of arbitrary size.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

Raster to_raster(const ImageBuffer& img);

namespace parallel {

ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma, const RngStream& rng);
ImageBuffer speckle_noise(const ImageBuffer& img, double sigma, const RngStream& rng);
ImageBuffer poisson_noise(const ImageBuffer& img, double scale, const RngStream& rng);
ImageBuffer salt_pepper(const ImageBuffer& img, double p, const RngStream& rng);
ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma);
Raster resample(const Raster& src, int out_width, int out_height, Interp interp);
ImageBuffer resize_round_trip(const ImageBuffer& img, double factor, Interp interp);
ImageBuffer color_contrast(const ImageBuffer& img, double brightness, double contrast);
ImageBuffer grayscale(const ImageBuffer& img);
ImageBuffer pixelate(const ImageBuffer& img, int block);
ImageBuffer self_overlay(const ImageBuffer& img, double scale, double alpha, int offset_x, int offset_y);

}  // namespace parallel

namespace reference {

ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma, const RngStream& rng);
ImageBuffer speckle_noise(const ImageBuffer& img, double sigma, const RngStream& rng);
ImageBuffer poisson_noise(const ImageBuffer& img, double scale, const RngStream& rng);
ImageBuffer salt_pepper(const ImageBuffer& img, double p, const RngStream& rng);
/// Direct 2-D convolution (not separable).
ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma);
/// Direct per-pixel 2-D interpolation.
Raster resample(const Raster& src, int out_width, int out_height, Interp interp);
ImageBuffer resize_round_trip(const ImageBuffer& img, double factor, Interp interp);
ImageBuffer color_contrast(const ImageBuffer& img, double brightness, double contrast);
ImageBuffer grayscale(const ImageBuffer& img);
ImageBuffer pixelate(const ImageBuffer& img, int block);
ImageBuffer self_overlay(const ImageBuffer& img, double scale, double alpha, int offset_x, int offset_y);

}  // namespace reference

/// Side length of the enlarged overlay image for `scale`.
inline int overlay_extent(int side, double scale) {
  return static_cast<int>(std::lround(side * scale));
}

ImageBuffer jpeg_round_trip(const ImageBuffer& img, int quality);
ImageBuffer text_distractor(const ImageBuffer& img, const TextDistractor& step);

}  // namespace dfbench::kernels
