#include "dfbench/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "dfbench/errors.hpp"

namespace dfbench::kernels {

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-static_cast<double>(i) * i / (2.0 * sigma * sigma));
    taps[i + radius] = w;
    sum += w;
  }
  for (double& w : taps) w /= sum;
  return taps;
}

Raster to_raster(const ImageBuffer& img) {
  return Raster{img.width(), img.height(), img.channels(), img.bytes()};
}

namespace {

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

// Keys cubic convolution, a = -0.5.
double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::fabs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return (((t - 5.0) * t + 8.0) * t - 4.0) * a;
  return 0.0;
}

// Source taps and weights for one output coordinate along one axis.
struct AxisTaps {
  std::array<int, 4> index{};
  std::array<double, 4> weight{};
  int count = 0;
};

AxisTaps axis_taps(int out_pos, int src_len, int out_len, Interp interp) {
  AxisTaps t;
  const double ratio = static_cast<double>(src_len) / out_len;
  if (interp == Interp::nearest) {
    t.count = 1;
    t.index[0] = clamp_index(static_cast<int>(std::floor((out_pos + 0.5) * ratio)), src_len);
    t.weight[0] = 1.0;
    return t;
  }
  const double src = (out_pos + 0.5) * ratio - 0.5;
  const double base = std::floor(src);
  const double frac = src - base;
  const int i0 = static_cast<int>(base);
  if (interp == Interp::bilinear) {
    t.count = 2;
    t.index = {clamp_index(i0, src_len), clamp_index(i0 + 1, src_len), 0, 0};
    t.weight = {1.0 - frac, frac, 0.0, 0.0};
    return t;
  }
  t.count = 4;
  for (int k = 0; k < 4; ++k) {
    t.index[k] = clamp_index(i0 - 1 + k, src_len);
    t.weight[k] = cubic_weight(frac - (k - 1));
  }
  return t;
}

ImageBuffer same_shape_as(const ImageBuffer& img) {
  return ImageBuffer(img.width(), img.height(), img.channels());
}

}  // namespace

namespace parallel {

ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma, const RngStream& rng) {
  ImageBuffer out = same_shape_as(img);
  const int height = img.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    RngStream row_rng = rng.substream(static_cast<std::uint64_t>(y));
    const auto src = img.row(y);
    auto dst = out.row(y);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = to_sample(src[i] + sigma * row_rng.normal());
  }
  return out;
}

ImageBuffer speckle_noise(const ImageBuffer& img, double sigma, const RngStream& rng) {
  ImageBuffer out = same_shape_as(img);
  const int height = img.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    RngStream row_rng = rng.substream(static_cast<std::uint64_t>(y));
    const auto src = img.row(y);
    auto dst = out.row(y);
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = to_sample(src[i] * (1.0 + sigma * row_rng.normal()));
    }
  }
  return out;
}

ImageBuffer poisson_noise(const ImageBuffer& img, double scale, const RngStream& rng) {
  ImageBuffer out = same_shape_as(img);
  const int height = img.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    RngStream row_rng = rng.substream(static_cast<std::uint64_t>(y));
    const auto src = img.row(y);
    auto dst = out.row(y);
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double k = static_cast<double>(row_rng.poisson(src[i] * scale));
      dst[i] = to_sample(k / scale);
    }
  }
  return out;
}

ImageBuffer salt_pepper(const ImageBuffer& img, double p, const RngStream& rng) {
  ImageBuffer out = img;
  const int height = img.height();
  const int width = img.width();
  const int channels = img.channels();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    RngStream row_rng = rng.substream(static_cast<std::uint64_t>(y));
    auto dst = out.row(y);
    for (int x = 0; x < width; ++x) {
      if (row_rng.uniform() < p) {
        const std::uint8_t v = row_rng.uniform() < 0.5 ? 0 : 255;
        for (int c = 0; c < channels; ++c) dst[x * channels + c] = v;
      }
    }
  }
  return out;
}

ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int width = img.width();
  const int height = img.height();
  const int channels = img.channels();
  std::vector<double> horizontal(img.size());

#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    const auto src = img.row(y);
    double* dst = horizontal.data() + static_cast<std::size_t>(y) * width * channels;
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += taps[k + radius] * src[clamp_index(x + k, width) * channels + c];
        }
        dst[x * channels + c] = acc;
      }
    }
  }

  ImageBuffer out = same_shape_as(img);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    auto dst = out.row(y);
    for (std::size_t i = 0; i < stride; ++i) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[k + radius] * horizontal[clamp_index(y + k, height) * stride + i];
      }
      dst[i] = to_sample(acc);
    }
  }
  return out;
}

Raster resample(const Raster& src, int out_width, int out_height, Interp interp) {
  const int channels = src.channels;
  std::vector<AxisTaps> xtaps(out_width);
  for (int x = 0; x < out_width; ++x) xtaps[x] = axis_taps(x, src.width, out_width, interp);

  // Horizontal pass: src.height x out_width.
  std::vector<double> horizontal(static_cast<std::size_t>(src.height) * out_width * channels);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < src.height; ++y) {
    const std::uint8_t* row = src.data.data() + static_cast<std::size_t>(y) * src.width * channels;
    double* dst = horizontal.data() + static_cast<std::size_t>(y) * out_width * channels;
    for (int x = 0; x < out_width; ++x) {
      const AxisTaps& t = xtaps[x];
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (int k = 0; k < t.count; ++k) acc += t.weight[k] * row[t.index[k] * channels + c];
        dst[x * channels + c] = acc;
      }
    }
  }

  Raster out{out_width, out_height, channels,
             std::vector<std::uint8_t>(static_cast<std::size_t>(out_width) * out_height * channels)};
  const std::size_t stride = static_cast<std::size_t>(out_width) * channels;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_height; ++y) {
    const AxisTaps t = axis_taps(y, src.height, out_height, interp);
    std::uint8_t* dst = out.data.data() + static_cast<std::size_t>(y) * stride;
    for (std::size_t i = 0; i < stride; ++i) {
      double acc = 0.0;
      for (int k = 0; k < t.count; ++k) acc += t.weight[k] * horizontal[t.index[k] * stride + i];
      dst[i] = to_sample(acc);
    }
  }
  return out;
}

ImageBuffer resize_round_trip(const ImageBuffer& img, double factor, Interp interp) {
  const int small_w = std::max(1, static_cast<int>(std::lround(img.width() * factor)));
  const int small_h = std::max(1, static_cast<int>(std::lround(img.height() * factor)));
  const Raster small = resample(to_raster(img), small_w, small_h, interp);
  Raster back = resample(small, img.width(), img.height(), interp);
  return ImageBuffer(img.width(), img.height(), img.channels(), std::move(back.data));
}

ImageBuffer color_contrast(const ImageBuffer& img, double brightness, double contrast) {
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = to_sample(contrast * (v - 128.0) + 128.0 + brightness);
  ImageBuffer out = same_shape_as(img);
  const auto src = img.data();
  auto dst = out.data();
  const auto n = static_cast<std::ptrdiff_t>(src.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) dst[i] = lut[src[i]];
  return out;
}

ImageBuffer grayscale(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  ImageBuffer out = same_shape_as(img);
  const auto n = static_cast<std::ptrdiff_t>(img.width()) * img.height();
  const auto src = img.data();
  auto dst = out.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::uint8_t y = to_sample(0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2]);
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = y;
  }
  return out;
}

ImageBuffer pixelate(const ImageBuffer& img, int block) {
  if (block == 1) return img;
  ImageBuffer out = same_shape_as(img);
  const int width = img.width();
  const int height = img.height();
  const int channels = img.channels();
  const int tiles_y = (height + block - 1) / block;
#pragma omp parallel for schedule(static)
  for (int ty = 0; ty < tiles_y; ++ty) {
    const int y0 = ty * block;
    const int y1 = std::min(height, y0 + block);
    for (int x0 = 0; x0 < width; x0 += block) {
      const int x1 = std::min(width, x0 + block);
      const double count = static_cast<double>((y1 - y0) * (x1 - x0));
      for (int c = 0; c < channels; ++c) {
        std::uint64_t sum = 0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) sum += img.at(x, y, c);
        const std::uint8_t mean = to_sample(static_cast<double>(sum) / count);
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) out.at(x, y, c) = mean;
      }
    }
  }
  return out;
}

ImageBuffer self_overlay(const ImageBuffer& img, double scale, double alpha, int offset_x, int offset_y) {
  const int width = img.width();
  const int height = img.height();
  const int channels = img.channels();
  const int big_w = overlay_extent(width, scale);
  const int big_h = overlay_extent(height, scale);
  ImageBuffer out = same_shape_as(img);
  std::vector<AxisTaps> xtaps(width);
  for (int x = 0; x < width; ++x) xtaps[x] = axis_taps(x + offset_x, width, big_w, Interp::bilinear);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    const AxisTaps ty = axis_taps(y + offset_y, height, big_h, Interp::bilinear);
    for (int x = 0; x < width; ++x) {
      const AxisTaps& tx = xtaps[x];
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (int j = 0; j < ty.count; ++j) {
          double row_acc = 0.0;
          for (int i = 0; i < tx.count; ++i) row_acc += tx.weight[i] * img.at(tx.index[i], ty.index[j], c);
          acc += ty.weight[j] * row_acc;
        }
        const std::uint8_t overlay = to_sample(acc);
        out.at(x, y, c) = to_sample((1.0 - alpha) * img.at(x, y, c) + alpha * overlay);
      }
    }
  }
  return out;
}

}  // namespace parallel

ImageBuffer jpeg_round_trip(const ImageBuffer& img, int quality) {
  const auto bytes = encode_jpeg(img, quality);
  ImageBuffer decoded = decode_jpeg(bytes);
  if (!decoded.same_shape(img)) throw IoError("JPEG round trip changed image shape");
  return decoded;
}

}  // namespace dfbench::kernels
