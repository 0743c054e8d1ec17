// phoneval/render.hpp
//
// Copyright 2026  The phoneval authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "phoneval/confmat.hpp"
#include "phoneval/error.hpp"
#include "phoneval/metrics.hpp"

namespace phoneval {

/// 8-bit grey-scale raster: darker cells mean larger row-normalized
/// proportions (p = 1 is black, p = 0 is white).
struct GreyImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t cell_size = 0;
  std::uint32_t label_gutter = 0;
  std::vector<std::uint8_t> pixels;  // row-major, width * height

  std::uint8_t& at(std::uint32_t x, std::uint32_t y) { return pixels[y * width + x]; }
  std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return pixels[y * width + x]; }
};

/// Luminance of a cell proportion: round-half-away-from-zero of
/// 255 * (1 - p). p = 1 -> 0 (black), p = 0 -> 255 (white).
inline std::uint8_t cell_luminance(double p) {
  const double value = 255.0 * (1.0 - p);
  double rounded = std::floor(value + 0.5);
  if (rounded < 0.0) rounded = 0.0;
  if (rounded > 255.0) rounded = 255.0;
  return static_cast<std::uint8_t>(rounded);
}

namespace detail {

// Built-in 5x7 glyphs (row bitmaps, bit 4 = leftmost pixel) so label
// drawing never touches a system font. Unknown characters draw nothing.
struct Glyph5x7 {
  char ch;
  std::uint8_t rows[7];
};

inline const Glyph5x7* find_glyph(char c) {
  static const Glyph5x7 kGlyphs[] = {
      {'a', {0b00000, 0b00000, 0b01110, 0b00001, 0b01111, 0b10001, 0b01111}},
      {'b', {0b10000, 0b10000, 0b11110, 0b10001, 0b10001, 0b10001, 0b11110}},
      {'c', {0b00000, 0b00000, 0b01110, 0b10000, 0b10000, 0b10000, 0b01110}},
      {'d', {0b00001, 0b00001, 0b01111, 0b10001, 0b10001, 0b10001, 0b01111}},
      {'e', {0b00000, 0b00000, 0b01110, 0b10001, 0b11111, 0b10000, 0b01110}},
      {'f', {0b00110, 0b01001, 0b01000, 0b11100, 0b01000, 0b01000, 0b01000}},
      {'g', {0b00000, 0b01111, 0b10001, 0b10001, 0b01111, 0b00001, 0b01110}},
      {'h', {0b10000, 0b10000, 0b11110, 0b10001, 0b10001, 0b10001, 0b10001}},
      {'i', {0b00100, 0b00000, 0b01100, 0b00100, 0b00100, 0b00100, 0b01110}},
      {'j', {0b00010, 0b00000, 0b00110, 0b00010, 0b00010, 0b10010, 0b01100}},
      {'k', {0b10000, 0b10000, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010}},
      {'l', {0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
      {'m', {0b00000, 0b00000, 0b11010, 0b10101, 0b10101, 0b10101, 0b10101}},
      {'n', {0b00000, 0b00000, 0b11110, 0b10001, 0b10001, 0b10001, 0b10001}},
      {'o', {0b00000, 0b00000, 0b01110, 0b10001, 0b10001, 0b10001, 0b01110}},
      {'p', {0b00000, 0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000}},
      {'q', {0b00000, 0b01111, 0b10001, 0b10001, 0b01111, 0b00001, 0b00001}},
      {'r', {0b00000, 0b00000, 0b10110, 0b11001, 0b10000, 0b10000, 0b10000}},
      {'s', {0b00000, 0b00000, 0b01111, 0b10000, 0b01110, 0b00001, 0b11110}},
      {'t', {0b01000, 0b01000, 0b11110, 0b01000, 0b01000, 0b01001, 0b00110}},
      {'u', {0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b10011, 0b01101}},
      {'v', {0b00000, 0b00000, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100}},
      {'w', {0b00000, 0b00000, 0b10001, 0b10001, 0b10101, 0b10101, 0b01010}},
      {'x', {0b00000, 0b00000, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001}},
      {'y', {0b00000, 0b00000, 0b10001, 0b10001, 0b01111, 0b00001, 0b01110}},
      {'z', {0b00000, 0b00000, 0b11111, 0b00010, 0b00100, 0b01000, 0b11111}},
      {'N', {0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001, 0b10001}},
      {'R', {0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001}},
      {'0', {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110}},
      {'1', {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
      {'2', {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111}},
      {'3', {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110}},
      {'4', {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010}},
      {'5', {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110}},
      {'6', {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110}},
      {'7', {0b11111, 0b00001, 0b00010, 0b00100, 0b00100, 0b00100, 0b00100}},
      {'8', {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110}},
      {'9', {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00100, 0b01100}},
      {'-', {0b00000, 0b00000, 0b00000, 0b01110, 0b00000, 0b00000, 0b00000}},
  };
  for (const auto& glyph : kGlyphs) {
    if (glyph.ch == c) return &glyph;
  }
  return nullptr;
}

// Draws `text` with its top-left at (x0, y0), 6 px per character, black on
// the existing background, clipped to [clip_x0, clip_x1) x [clip_y0, clip_y1).
inline void draw_text(GreyImage& img, const std::string& text, std::int64_t x0, std::int64_t y0,
                      std::int64_t clip_x0, std::int64_t clip_y0, std::int64_t clip_x1,
                      std::int64_t clip_y1) {
  for (std::size_t k = 0; k < text.size(); ++k) {
    const Glyph5x7* glyph = find_glyph(text[k]);
    if (glyph == nullptr) continue;
    const std::int64_t gx = x0 + static_cast<std::int64_t>(k) * 6;
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if ((glyph->rows[row] >> (4 - col)) & 1) {
          const std::int64_t x = gx + col;
          const std::int64_t y = y0 + row;
          if (x >= clip_x0 && x < clip_x1 && y >= clip_y0 && y < clip_y1) {
            img.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)) = 0;
          }
        }
      }
    }
  }
}

}  // namespace detail

/// Renders a canonically ordered matrix as a grey-scale raster: one
/// cell_size x cell_size block per cell, darkness from the row-normalized
/// proportion, plus a white gutter carrying 5x7 bitmap labels when
/// gutter > 0.
inline GreyImage render_matrix(const ConfusionMatrix& m, std::uint32_t cell_size,
                               std::uint32_t gutter) {
  if (cell_size == 0) throw ValidationError("render_matrix: cell_size must be positive");
  if (!is_canonical(m)) {
    throw ValidationError("render_matrix: matrix must be in canonical order");
  }

  const std::uint32_t rows = static_cast<std::uint32_t>(m.ref_labels.size());
  const std::uint32_t cols = static_cast<std::uint32_t>(m.resp_labels.size());
  GreyImage img;
  img.cell_size = cell_size;
  img.label_gutter = gutter;
  img.width = gutter + cols * cell_size;
  img.height = gutter + rows * cell_size;
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 255);

  const auto proportions = row_normalize(m);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      const std::uint8_t lum = cell_luminance(proportions[i][j]);
      for (std::uint32_t dy = 0; dy < cell_size; ++dy) {
        for (std::uint32_t dx = 0; dx < cell_size; ++dx) {
          img.at(gutter + j * cell_size + dx, gutter + i * cell_size + dy) = lum;
        }
      }
    }
  }

  if (gutter > 0) {
    // Column labels sit at the bottom of the top gutter, row labels are
    // vertically centered on their row; both clip to their own box.
    const std::int64_t col_y = gutter >= 8 ? static_cast<std::int64_t>(gutter) - 8 : 0;
    for (std::uint32_t j = 0; j < cols; ++j) {
      const std::int64_t x0 = static_cast<std::int64_t>(gutter) + j * cell_size + 1;
      detail::draw_text(img, m.resp_labels[j], x0, col_y,
                        static_cast<std::int64_t>(gutter) + j * cell_size, 0,
                        static_cast<std::int64_t>(gutter) + (j + 1) * cell_size, gutter);
    }
    for (std::uint32_t i = 0; i < rows; ++i) {
      const std::int64_t y0 = static_cast<std::int64_t>(gutter) + i * cell_size +
                              (cell_size >= 8 ? (static_cast<std::int64_t>(cell_size) - 7) / 2 : 0);
      detail::draw_text(img, m.ref_labels[i], 1, y0, 0,
                        static_cast<std::int64_t>(gutter) + i * cell_size, gutter,
                        static_cast<std::int64_t>(gutter) + (i + 1) * cell_size);
    }
  }
  return img;
}

/// Binary PGM: magic "P5", ASCII dimensions and maxval 255, raw bytes.
/// Byte-for-byte deterministic for identical images.
inline void write_pgm(const GreyImage& img, std::ostream& out) {
  if (img.width == 0 || img.height == 0) {
    throw ValidationError("write_pgm: zero-size image");
  }
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw ValidationError("write_pgm: pixel buffer does not match dimensions");
  }
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
}

inline void save_pgm(const GreyImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write image '" + path + "'");
  write_pgm(img, out);
}

/// Writes the plot-ready report CSV for a nonempty series of reports.
inline void emit_curves(const std::vector<ErrorReport>& reports, const std::string& path) {
  if (reports.empty()) throw ValidationError("emit_curves: empty report list");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write curves '" + path + "'");
  write_report_csv(reports, out);
}

}  // namespace phoneval
