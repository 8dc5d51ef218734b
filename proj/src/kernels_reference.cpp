// Serial, unoptimized kernels. Test oracles and benchmark baselines only.

#include <algorithm>
#include <cmath>

#include "dfbench/kernels.hpp"

namespace dfbench::kernels::reference {

namespace {

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::fabs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return (((t - 5.0) * t + 8.0) * t - 4.0) * a;
  return 0.0;
}

// Interpolated sample at output pixel (ox, oy) of an out_w x out_h grid laid over src.
double sample(const Raster& src, int ox, int oy, int out_w, int out_h, int c, Interp interp) {
  const double rx = static_cast<double>(src.width) / out_w;
  const double ry = static_cast<double>(src.height) / out_h;
  auto px = [&](int x, int y) {
    return static_cast<double>(
        src.data[(static_cast<std::size_t>(clamp_index(y, src.height)) * src.width +
                  clamp_index(x, src.width)) * src.channels + c]);
  };
  if (interp == Interp::nearest) {
    return px(static_cast<int>(std::floor((ox + 0.5) * rx)), static_cast<int>(std::floor((oy + 0.5) * ry)));
  }
  const double sx = (ox + 0.5) * rx - 0.5;
  const double sy = (oy + 0.5) * ry - 0.5;
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const double fx = sx - x0;
  const double fy = sy - y0;
  double acc = 0.0;
  if (interp == Interp::bilinear) {
    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    for (int j = 0; j < 2; ++j) {
      double row_acc = 0.0;
      for (int i = 0; i < 2; ++i) row_acc += wx[i] * px(x0 + i, y0 + j);
      acc += wy[j] * row_acc;
    }
    return acc;
  }
  for (int j = -1; j <= 2; ++j) {
    for (int i = -1; i <= 2; ++i) {
      acc += cubic_weight(fy - j) * cubic_weight(fx - i) * px(x0 + i, y0 + j);
    }
  }
  return acc;
}

}  // namespace

ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma, const RngStream& rng) {
  ImageBuffer out = img;
  for (int y = 0; y < img.height(); ++y) {
    RngStream row_rng = rng.substream(static_cast<std::uint64_t>(y));
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.at(x, y, c) = to_sample(img.at(x, y, c) + sigma * row_rng.normal());
  }
  return out;
}

ImageBuffer speckle_noise(const ImageBuffer& img, double sigma, const RngStream& rng) {
  ImageBuffer out = img;
  for (int y = 0; y < img.height(); ++y) {
    RngStream row_rng = rng.substream(static_cast<std::uint64_t>(y));
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.at(x, y, c) = to_sample(img.at(x, y, c) * (1.0 + sigma * row_rng.normal()));
  }
  return out;
}

ImageBuffer poisson_noise(const ImageBuffer& img, double scale, const RngStream& rng) {
  ImageBuffer out = img;
  for (int y = 0; y < img.height(); ++y) {
    RngStream row_rng = rng.substream(static_cast<std::uint64_t>(y));
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.at(x, y, c) = to_sample(static_cast<double>(row_rng.poisson(img.at(x, y, c) * scale)) / scale);
  }
  return out;
}

ImageBuffer salt_pepper(const ImageBuffer& img, double p, const RngStream& rng) {
  ImageBuffer out = img;
  for (int y = 0; y < img.height(); ++y) {
    RngStream row_rng = rng.substream(static_cast<std::uint64_t>(y));
    for (int x = 0; x < img.width(); ++x) {
      if (row_rng.uniform() < p) {
        const std::uint8_t v = row_rng.uniform() < 0.5 ? 0 : 255;
        for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = v;
      }
    }
  }
  return out;
}

ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  ImageBuffer out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            acc += taps[dy + radius] * taps[dx + radius] *
                   img.at(clamp_index(x + dx, img.width()), clamp_index(y + dy, img.height()), c);
          }
        }
        out.at(x, y, c) = to_sample(acc);
      }
    }
  }
  return out;
}

Raster resample(const Raster& src, int out_width, int out_height, Interp interp) {
  Raster out{out_width, out_height, src.channels,
             std::vector<std::uint8_t>(static_cast<std::size_t>(out_width) * out_height * src.channels)};
  for (int y = 0; y < out_height; ++y)
    for (int x = 0; x < out_width; ++x)
      for (int c = 0; c < src.channels; ++c)
        out.data[(static_cast<std::size_t>(y) * out_width + x) * src.channels + c] =
            to_sample(sample(src, x, y, out_width, out_height, c, interp));
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
  ImageBuffer out = img;
  for (auto& v : out.data()) v = to_sample(contrast * (v - 128.0) + 128.0 + brightness);
  return out;
}

ImageBuffer grayscale(const ImageBuffer& img) {
  ImageBuffer out = img;
  if (img.channels() == 1) return out;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double luma = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = to_sample(luma);
    }
  }
  return out;
}

ImageBuffer pixelate(const ImageBuffer& img, int block) {
  ImageBuffer out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const int tx = (x / block) * block;
      const int ty = (y / block) * block;
      const int tx1 = std::min(img.width(), tx + block);
      const int ty1 = std::min(img.height(), ty + block);
      for (int c = 0; c < img.channels(); ++c) {
        double sum = 0.0;
        for (int yy = ty; yy < ty1; ++yy)
          for (int xx = tx; xx < tx1; ++xx) sum += img.at(xx, yy, c);
        out.at(x, y, c) = to_sample(sum / ((tx1 - tx) * (ty1 - ty)));
      }
    }
  }
  return out;
}

ImageBuffer self_overlay(const ImageBuffer& img, double scale, double alpha, int offset_x, int offset_y) {
  const Raster big = resample(to_raster(img), overlay_extent(img.width(), scale),
                              overlay_extent(img.height(), scale), Interp::bilinear);
  ImageBuffer out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        const double overlay =
            big.data[(static_cast<std::size_t>(y + offset_y) * big.width + (x + offset_x)) * big.channels + c];
        out.at(x, y, c) = to_sample((1.0 - alpha) * img.at(x, y, c) + alpha * overlay);
      }
    }
  }
  return out;
}

}  // namespace dfbench::kernels::reference
