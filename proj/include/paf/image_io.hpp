// Copyright 2026 The paf-retrieval Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace paf {

/// Multi-channel image with samples scaled to [0, 1], stored per channel in
/// row-major order.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 255;
  std::vector<std::vector<double>> channels;

  [[nodiscard]] std::size_t num_channels() const noexcept { return channels.size(); }
  [[nodiscard]] std::size_t pixels() const noexcept { return width * height; }
};

class ImageFormatError : public std::runtime_error {
 public:
  ImageFormatError(const std::string& path, std::size_t offset, const std::string& what)
      : std::runtime_error(path + ": byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

namespace detail {

class PnmCursor {
 public:
  PnmCursor(std::string path, std::string bytes) : path_(std::move(path)), bytes_(std::move(bytes)) {}

  [[noreturn]] void fail(const std::string& what) const { throw ImageFormatError(path_, pos_, what); }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_uint(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) fail(std::string("truncated file while reading ") + what);
    if (!std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) fail(std::string("expected digits for ") + what);
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
      if (v > 0xFFFFFFFFul) fail(std::string("value too large for ") + what);
      ++pos_;
    }
    return v;
  }

  unsigned read_binary_sample(bool wide) {
    const std::size_t need = wide ? 2 : 1;
    if (pos_ + need > bytes_.size()) fail("truncated pixel data");
    unsigned v = static_cast<unsigned char>(bytes_[pos_]);
    if (wide) v = (v << 8) | static_cast<unsigned char>(bytes_[pos_ + 1]);
    pos_ += need;
    return v;
  }

  void expect_single_whitespace() {
    if (pos_ >= bytes_.size()) fail("truncated header");
    if (!std::isspace(static_cast<unsigned char>(bytes_[pos_]))) fail("expected whitespace after maxval");
    ++pos_;
  }

  [[nodiscard]] std::size_t pos() const noexcept { return pos_; }
  [[nodiscard]] const std::string& bytes() const noexcept { return bytes_; }
  void advance(std::size_t k) noexcept { pos_ += k; }

 private:
  std::string path_;
  std::string bytes_;
  std::size_t pos_ = 0;
};

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

/// Reads PGM/PPM in plain (P2/P3) or raw (P5/P6) form, maxval up to 65535.
inline Image read_image(const std::string& path) {
  detail::PnmCursor cur(path, detail::read_file_bytes(path));
  if (cur.bytes().size() < 2 || cur.bytes()[0] != 'P') cur.fail("not a NetPBM file (missing 'P' magic)");
  const char kind = cur.bytes()[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') cur.fail(std::string("unsupported NetPBM type P") + kind);
  cur.advance(2);
  const bool plain = kind == '2' || kind == '3';
  const std::size_t nch = (kind == '3' || kind == '6') ? 3 : 1;

  Image img;
  img.width = cur.read_uint("width");
  img.height = cur.read_uint("height");
  const unsigned long maxval = cur.read_uint("maxval");
  if (img.width == 0 || img.height == 0) cur.fail("zero image dimension");
  if (maxval == 0) cur.fail("maxval must be positive");
  if (maxval > 65535) cur.fail("unsupported bit depth (maxval " + std::to_string(maxval) + " exceeds 16 bits)");
  img.maxval = static_cast<unsigned>(maxval);
  if (!plain) cur.expect_single_whitespace();

  img.channels.assign(nch, std::vector<double>(img.pixels()));
  const bool wide = img.maxval > 255;
  const double scale = 1.0 / static_cast<double>(img.maxval);
  for (std::size_t p = 0; p < img.pixels(); ++p) {
    for (std::size_t c = 0; c < nch; ++c) {
      const unsigned long v = plain ? cur.read_uint("sample") : cur.read_binary_sample(wide);
      if (v > img.maxval) cur.fail("sample exceeds maxval");
      img.channels[c][p] = static_cast<double>(v) * scale;
    }
  }
  return img;
}

/// Writes raw PGM (1 channel) or PPM (3 channels) at the image's maxval.
inline void write_image(const std::string& path, const Image& img) {
  const std::size_t nch = img.num_channels();
  if (nch != 1 && nch != 3) throw std::invalid_argument("write_image: need 1 or 3 channels");
  if (img.maxval == 0 || img.maxval > 65535) throw std::invalid_argument("write_image: maxval out of range");
  std::string out = (nch == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " + std::to_string(img.height) +
                    "\n" + std::to_string(img.maxval) + "\n";
  const bool wide = img.maxval > 255;
  for (std::size_t p = 0; p < img.pixels(); ++p) {
    for (std::size_t c = 0; c < nch; ++c) {
      const double v = std::clamp(img.channels[c][p], 0.0, 1.0);
      const auto q = static_cast<unsigned>(std::lround(v * img.maxval));
      if (wide) out.push_back(static_cast<char>(q >> 8));
      out.push_back(static_cast<char>(q & 0xFF));
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error(path + ": cannot open for writing");
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw std::runtime_error(path + ": write failed");
}

/// Smooth test image: each channel a different linear ramp plus a soft bump.
inline Image synthetic_gradient_image(std::size_t height, std::size_t width, std::size_t channels = 3) {
  Image img;
  img.width = width;
  img.height = height;
  img.channels.assign(channels, std::vector<double>(width * height));
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t k = 0; k < width; ++k) {
        const double u = height > 1 ? static_cast<double>(r) / static_cast<double>(height - 1) : 0.0;
        const double v = width > 1 ? static_cast<double>(k) / static_cast<double>(width - 1) : 0.0;
        const double ramp = c % 3 == 0 ? u : (c % 3 == 1 ? v : 0.5 * (u + 1.0 - v));
        const double du = u - 0.5, dv = v - 0.5;
        const double bump = std::exp(-8.0 * (du * du + dv * dv));
        img.channels[c][r * width + k] = 0.15 + 0.55 * ramp + 0.3 * bump;
      }
    }
  }
  return img;
}

}  // namespace paf
