/*
 * Copyright 2026 The WCT2 Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Haar wavelet pooling/unpooling and the comparison pooling operators.
//
// Orientation: a 2x2 kernel built from 1-D factors (A, B) is
//     K[dy][dx] = A[dy] * B[dx]
// i.e. the first factor filters along rows (vertical axis) and the second
// along columns. With L = [1, 1]/sqrt(2) and H = [-1, 1]/sqrt(2):
//     LL = L(x)L   LH = L(x)H   HL = H(x)L   HH = H(x)H
// so LH responds to horizontal intensity changes (vertical edges) and HL to
// vertical changes. The four flattened kernels are orthonormal, which makes
// pooling a tight frame and unpooling its exact inverse.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "wct2/tensor.hpp"

namespace wct2 {

using Kernel2x2 = std::array<std::array<double, 2>, 2>;

/// The four analysis kernels in LL, LH, HL, HH order.
struct HaarFilterBank {
  std::array<Kernel2x2, 4> kernels{};

  static HaarFilterBank standard() {
    const double s = 1.0 / std::sqrt(2.0);
    const std::array<double, 2> low{s, s};
    const std::array<double, 2> high{-s, s};
    const std::array<std::array<double, 2>, 4> rows{low, low, high, high};
    const std::array<std::array<double, 2>, 4> cols{low, high, low, high};
    HaarFilterBank bank;
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t dy = 0; dy < 2; ++dy)
        for (std::size_t dx = 0; dx < 2; ++dx)
          bank.kernels[k][dy][dx] = rows[k][dy] * cols[k][dx];
    return bank;
  }

  /// Gram matrix of the flattened kernels; identity for an orthonormal bank.
  std::array<std::array<double, 4>, 4> gram() const {
    std::array<std::array<double, 4>, 4> g{};
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx)
            g[a][b] += kernels[a][dy][dx] * kernels[b][dy][dx];
    return g;
  }
};

struct WaveletSubbands {
  FeatureMap ll, lh, hl, hh;

  std::array<const FeatureMap*, 4> bands() const { return {&ll, &lh, &hl, &hh}; }

  bool consistent() const {
    return !ll.empty() && ll.same_shape(lh) && ll.same_shape(hl) && ll.same_shape(hh);
  }

  double energy() const;
};

/// Polyphase components in row-major window order: top-left, top-right,
/// bottom-left, bottom-right.
using PolyphaseComponents = std::array<FeatureMap, 4>;

struct MaxPoolResult {
  FeatureMap pooled;
  /// Per pooled site, the window index 0..3 (row-major) of the maximum.
  std::vector<std::uint8_t> argmax;
};

inline double squared_norm(const FeatureMap& f) {
  double s = 0.0;
  for (float v : f.values()) s += static_cast<double>(v) * v;
  return s;
}

inline double WaveletSubbands::energy() const {
  return squared_norm(ll) + squared_norm(lh) + squared_norm(hl) + squared_norm(hh);
}

namespace detail {

inline void require_even(const FeatureMap& input, const char* op) {
  require(!input.empty(), std::string(op) + ": empty input");
  require(input.height() % 2 == 0 && input.width() % 2 == 0,
          std::string(op) + ": height and width must be even, got " + shape_string(input));
}

}  // namespace detail

inline WaveletSubbands haar_pool(const FeatureMap& input,
                                 const HaarFilterBank& bank = HaarFilterBank::standard()) {
  detail::require_even(input, "haar_pool");
  const std::size_t c = input.channels(), h = input.height() / 2, w = input.width() / 2;
  std::array<FeatureMap, 4> out{FeatureMap(c, h, w), FeatureMap(c, h, w), FeatureMap(c, h, w),
                                FeatureMap(c, h, w)};
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const double a = input.at(ch, 2 * i, 2 * j), b = input.at(ch, 2 * i, 2 * j + 1);
        const double d = input.at(ch, 2 * i + 1, 2 * j), e = input.at(ch, 2 * i + 1, 2 * j + 1);
        for (std::size_t k = 0; k < 4; ++k) {
          const auto& K = bank.kernels[k];
          out[k].at(ch, i, j) =
              static_cast<float>(K[0][0] * a + K[0][1] * b + K[1][0] * d + K[1][1] * e);
        }
      }
  return {std::move(out[0]), std::move(out[1]), std::move(out[2]), std::move(out[3])};
}

/// Transposed convolution of each subband with its kernel, kept separate.
/// Summing the four results gives haar_unpool; concatenating them is the
/// input of a concat-mode decoder.
inline std::array<FeatureMap, 4> haar_unpool_components(
    const WaveletSubbands& subbands, const HaarFilterBank& bank = HaarFilterBank::standard()) {
  detail::require(subbands.consistent(), "haar_unpool: subbands have mismatched shapes");
  const std::size_t c = subbands.ll.channels(), h = subbands.ll.height(), w = subbands.ll.width();
  std::array<FeatureMap, 4> out;
  const auto bands = subbands.bands();
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = FeatureMap(c, 2 * h, 2 * w);
    const auto& K = bank.kernels[k];
    const FeatureMap& band = *bands[k];
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          const double v = band.at(ch, i, j);
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx)
              out[k].at(ch, 2 * i + dy, 2 * j + dx) = static_cast<float>(K[dy][dx] * v);
        }
  }
  return out;
}

inline FeatureMap haar_unpool(const WaveletSubbands& subbands,
                              const HaarFilterBank& bank = HaarFilterBank::standard()) {
  detail::require(subbands.consistent(), "haar_unpool: subbands have mismatched shapes");
  const std::size_t c = subbands.ll.channels(), h = subbands.ll.height(), w = subbands.ll.width();
  FeatureMap out(c, 2 * h, 2 * w);
  const auto bands = subbands.bands();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j)
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k)
              s += bank.kernels[k][dy][dx] * bands[k]->at(ch, i, j);
            out.at(ch, 2 * i + dy, 2 * j + dx) = static_cast<float>(s);
          }
  return out;
}

/// 2x2 stride-2 mean. Equals haar_pool(x).ll / 2.
inline FeatureMap average_pool(const FeatureMap& input) {
  detail::require_even(input, "average_pool");
  const std::size_t c = input.channels(), h = input.height() / 2, w = input.width() / 2;
  FeatureMap out(c, h, w);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const double s = static_cast<double>(input.at(ch, 2 * i, 2 * j)) +
                         input.at(ch, 2 * i, 2 * j + 1) + input.at(ch, 2 * i + 1, 2 * j) +
                         input.at(ch, 2 * i + 1, 2 * j + 1);
        out.at(ch, i, j) = static_cast<float>(s * 0.25);
      }
  return out;
}

/// Nearest-neighbour 2x upsampling; the decoder-side counterpart of average_pool.
inline FeatureMap average_unpool(const FeatureMap& pooled) {
  detail::require(!pooled.empty(), "average_unpool: empty input");
  FeatureMap out(pooled.channels(), 2 * pooled.height(), 2 * pooled.width());
  for (std::size_t ch = 0; ch < out.channels(); ++ch)
    for (std::size_t y = 0; y < out.height(); ++y)
      for (std::size_t x = 0; x < out.width(); ++x) out.at(ch, y, x) = pooled.at(ch, y / 2, x / 2);
  return out;
}

inline PolyphaseComponents split_pool(const FeatureMap& input) {
  detail::require_even(input, "split_pool");
  const std::size_t c = input.channels(), h = input.height() / 2, w = input.width() / 2;
  PolyphaseComponents out{FeatureMap(c, h, w), FeatureMap(c, h, w), FeatureMap(c, h, w),
                          FeatureMap(c, h, w)};
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j)
        for (std::size_t k = 0; k < 4; ++k)
          out[k].at(ch, i, j) = input.at(ch, 2 * i + k / 2, 2 * j + k % 2);
  return out;
}

/// Zero-stuffed placement of each component at its polyphase position.
inline std::array<FeatureMap, 4> split_unpool_components(const PolyphaseComponents& parts) {
  for (const auto& p : parts)
    detail::require(!p.empty() && p.same_shape(parts[0]), "split_unpool: mismatched components");
  std::array<FeatureMap, 4> out;
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = FeatureMap(parts[0].channels(), 2 * parts[0].height(), 2 * parts[0].width());
    for (std::size_t ch = 0; ch < parts[0].channels(); ++ch)
      for (std::size_t i = 0; i < parts[0].height(); ++i)
        for (std::size_t j = 0; j < parts[0].width(); ++j)
          out[k].at(ch, 2 * i + k / 2, 2 * j + k % 2) = parts[k].at(ch, i, j);
  }
  return out;
}

inline FeatureMap split_unpool(const PolyphaseComponents& parts) {
  auto placed = split_unpool_components(parts);
  FeatureMap out = std::move(placed[0]);
  for (std::size_t k = 1; k < 4; ++k) {
    auto dst = out.values();
    auto src = placed[k].values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return out;
}

/// 2x2 stride-2 max with argmax; ties go to the first index in row-major order.
inline MaxPoolResult max_pool_with_mask(const FeatureMap& input) {
  detail::require_even(input, "max_pool_with_mask");
  const std::size_t c = input.channels(), h = input.height() / 2, w = input.width() / 2;
  MaxPoolResult r{FeatureMap(c, h, w), std::vector<std::uint8_t>(c * h * w, 0)};
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        std::uint8_t best = 0;
        float best_v = input.at(ch, 2 * i, 2 * j);
        for (std::uint8_t k = 1; k < 4; ++k) {
          const float v = input.at(ch, 2 * i + k / 2, 2 * j + k % 2);
          if (v > best_v) {
            best_v = v;
            best = k;
          }
        }
        r.pooled.at(ch, i, j) = best_v;
        r.argmax[(ch * h + i) * w + j] = best;
      }
  return r;
}

/// Places each pooled value at its recorded argmax, zero elsewhere.
inline FeatureMap max_unpool(const FeatureMap& pooled, const std::vector<std::uint8_t>& argmax) {
  detail::require(!pooled.empty() && argmax.size() == pooled.size(),
                  "max_unpool: mask size does not match pooled map");
  FeatureMap out(pooled.channels(), 2 * pooled.height(), 2 * pooled.width());
  const std::size_t h = pooled.height(), w = pooled.width();
  for (std::size_t ch = 0; ch < pooled.channels(); ++ch)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const std::uint8_t k = argmax[(ch * h + i) * w + j];
        detail::require(k < 4, "max_unpool: argmax index out of range");
        out.at(ch, 2 * i + k / 2, 2 * j + k % 2) = pooled.at(ch, i, j);
      }
  return out;
}

}  // namespace wct2
