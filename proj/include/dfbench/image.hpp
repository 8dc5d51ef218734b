#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfbench {

/// Axis-aligned pixel rectangle, half-open: [x, x+w) x [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
  bool intersects(const Rect& o) const {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
  }
  bool empty() const { return w <= 0 || h <= 0; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// 8-bit interleaved raster, row-major. Channels are 1 (gray) or 3 (sRGB).
class ImageBuffer {
 public:
  static constexpr int kMinSide = 16;

  ImageBuffer(int width, int height, int channels, std::uint8_t fill = 0);
  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  std::size_t row_stride() const { return static_cast<std::size_t>(width_) * channels_; }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }
  const std::vector<std::uint8_t>& bytes() const { return data_; }

  std::uint8_t at(int x, int y, int c) const { return data_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c) { return data_[index(x, y, c)]; }

  std::span<const std::uint8_t> row(int y) const {
    return std::span<const std::uint8_t>(data_).subspan(y * row_stride(), row_stride());
  }
  std::span<std::uint8_t> row(int y) {
    return std::span<std::uint8_t>(data_).subspan(y * row_stride(), row_stride());
  }

  bool same_shape(const ImageBuffer& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_;
  int height_;
  int channels_;
  std::vector<std::uint8_t> data_;
};

/// Round half away from zero, then clamp to [0, 255].
inline std::uint8_t to_sample(double v) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);
}

ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const ImageBuffer& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);

ImageBuffer read_jpeg(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality);
/// Decodes a JPEG stream. Gray streams decode to 1 channel, colour streams to 3.
ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes);

/// Dispatches on extension (.png, .jpg, .jpeg).
ImageBuffer read_image(const std::filesystem::path& path);

double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// Central rectangle covering `fraction` of each side.
Rect central_box(int width, int height, double fraction = 0.6);

std::string format_rect(const Rect& r);
std::optional<Rect> parse_rect(std::string_view text);

}  // namespace dfbench
