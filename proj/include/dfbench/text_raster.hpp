#pragma once

#include <string_view>

#include "dfbench/image.hpp"

namespace dfbench {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;
inline constexpr int kGlyphAdvance = 6;

/// Characters the built-in 5x7 font can draw. Lowercase renders as uppercase.
inline constexpr std::string_view kTextAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

bool glyph_supported(char c);

/// Bounding box of `text` drawn at (x, y) with integer pixel scale.
Rect text_bounds(std::string_view text, int x, int y, int glyph_scale);

/// Calls `plot(px, py)` for every lit pixel of the rendered text (unclipped).
template <typename Plot>
void rasterize_text(std::string_view text, int x, int y, int glyph_scale, Plot&& plot);

namespace detail {
/// Row bitmask (bit 4 = leftmost column) of row `row` of glyph `c`.
unsigned glyph_row(char c, int row);
}  // namespace detail

template <typename Plot>
void rasterize_text(std::string_view text, int x, int y, int glyph_scale, Plot&& plot) {
  int pen = x;
  for (char c : text) {
    for (int r = 0; r < kGlyphHeight; ++r) {
      const unsigned bits = detail::glyph_row(c, r);
      for (int col = 0; col < kGlyphWidth; ++col) {
        if (!(bits & (1u << (kGlyphWidth - 1 - col)))) continue;
        for (int sy = 0; sy < glyph_scale; ++sy)
          for (int sx = 0; sx < glyph_scale; ++sx)
            plot(pen + col * glyph_scale + sx, y + r * glyph_scale + sy);
      }
    }
    pen += kGlyphAdvance * glyph_scale;
  }
}

}  // namespace dfbench
