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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wct2/errors.hpp"

namespace wct2 {

/// Dense CHW tensor of 32-bit floats. Row-major within a channel plane,
/// channel planes stored back to back.
class FeatureMap {
 public:
  FeatureMap() = default;

  FeatureMap(std::size_t channels, std::size_t height, std::size_t width, float fill = 0.0f)
      : channels_(channels), height_(height), width_(width),
        data_(channels * height * width, fill) {}

  FeatureMap(std::size_t channels, std::size_t height, std::size_t width, std::vector<float> data)
      : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    detail::require(data_.size() == channels * height * width,
                    "FeatureMap: data length does not match channels*height*width");
  }

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t plane_size() const { return height_ * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool same_shape(const FeatureMap& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * height_ + y) * width_ + x];
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * height_ + y) * width_ + x];
  }

  std::span<float> channel(std::size_t c) {
    return {data_.data() + c * plane_size(), plane_size()};
  }
  std::span<const float> channel(std::size_t c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  const std::vector<float>& storage() const { return data_; }

  bool operator==(const FeatureMap& o) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

inline std::string shape_string(const FeatureMap& f) {
  return std::to_string(f.channels()) + "x" + std::to_string(f.height()) + "x" +
         std::to_string(f.width());
}

inline bool all_finite(const FeatureMap& f) {
  return std::all_of(f.values().begin(), f.values().end(),
                     [](float v) { return std::isfinite(v); });
}

/// 3x3 convolution layer. Weights are laid out (out, in, ky, kx).
struct ConvLayer {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  static constexpr std::size_t kKernel = 3;

  float weight(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
    return weights[((o * in_channels + i) * kKernel + ky) * kKernel + kx];
  }

  std::size_t parameter_count() const { return weights.size() + bias.size(); }

  void validate() const {
    detail::require(weights.size() == out_channels * in_channels * kKernel * kKernel,
                    "ConvLayer: weight count does not match out*in*3*3");
    detail::require(bias.size() == out_channels, "ConvLayer: bias count does not match out");
  }

  /// Layer that copies input channel i to output channel i (requires in == out).
  static ConvLayer identity(std::size_t channels) {
    ConvLayer l{channels, channels, std::vector<float>(channels * channels * 9, 0.0f),
                std::vector<float>(channels, 0.0f)};
    for (std::size_t c = 0; c < channels; ++c) l.weights[(c * channels + c) * 9 + 4] = 1.0f;
    return l;
  }
};

enum class PaddingMode { zero, reflect };

/// Mirror-reflect border extension; the edge sample itself is not repeated.
inline FeatureMap reflect_pad(const FeatureMap& input, std::size_t top, std::size_t bottom,
                              std::size_t left, std::size_t right) {
  detail::require(!input.empty(), "reflect_pad: empty input");
  const std::size_t h = input.height(), w = input.width();
  detail::require(top < h && bottom < h && left < w && right < w,
                  "reflect_pad: pad amount must be smaller than the padded dimension");
  const std::size_t oh = h + top + bottom, ow = w + left + right;
  FeatureMap out(input.channels(), oh, ow);

  auto mirror = [](std::ptrdiff_t i, std::ptrdiff_t n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * (n - 1) - i;
    return i;
  };
  std::vector<std::size_t> xs(ow);
  for (std::size_t x = 0; x < ow; ++x)
    xs[x] = static_cast<std::size_t>(
        mirror(static_cast<std::ptrdiff_t>(x) - static_cast<std::ptrdiff_t>(left),
               static_cast<std::ptrdiff_t>(w)));
  for (std::size_t c = 0; c < input.channels(); ++c) {
    for (std::size_t y = 0; y < oh; ++y) {
      const auto sy = static_cast<std::size_t>(
          mirror(static_cast<std::ptrdiff_t>(y) - static_cast<std::ptrdiff_t>(top),
                 static_cast<std::ptrdiff_t>(h)));
      const float* src = input.channel(c).data() + sy * w;
      float* dst = &out.at(c, y, 0);
      for (std::size_t x = 0; x < ow; ++x) dst[x] = src[xs[x]];
    }
  }
  return out;
}

namespace detail {

// Pads by one on each side and widens to double once so the inner loops of
// conv2d stay branch-free.
inline std::vector<double> padded_planes(const FeatureMap& input, PaddingMode mode) {
  const std::size_t h = input.height(), w = input.width();
  const std::size_t ph = h + 2, pw = w + 2;
  std::vector<double> out(input.channels() * ph * pw, 0.0);
  if (mode == PaddingMode::reflect && h > 1 && w > 1) {
    FeatureMap p = reflect_pad(input, 1, 1, 1, 1);
    std::copy(p.values().begin(), p.values().end(), out.begin());
    return out;
  }
  for (std::size_t c = 0; c < input.channels(); ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        out[(c * ph + y + 1) * pw + x + 1] = input.at(c, y, x);
  return out;
}

}  // namespace detail

/// Same-size 3x3 cross-correlation plus bias. Accumulates in double; the
/// per-site summation order is fixed (input channel, then ky, then kx).
inline FeatureMap conv2d(const FeatureMap& input, const ConvLayer& layer,
                         PaddingMode padding = PaddingMode::reflect) {
  detail::require(!input.empty(), "conv2d: empty input");
  detail::require(input.channels() == layer.in_channels,
                  "conv2d: input has " + std::to_string(input.channels()) +
                      " channels, layer expects " + std::to_string(layer.in_channels));
  layer.validate();
  detail::require(padding == PaddingMode::zero || (input.height() > 1 && input.width() > 1),
                  "conv2d: reflection padding needs at least 2x2 spatial size");

  const std::size_t h = input.height(), w = input.width();
  const std::size_t pw = w + 2, plane = (h + 2) * pw;
  const std::vector<double> padded = detail::padded_planes(input, padding);
  FeatureMap out(layer.out_channels, h, w);

  constexpr std::size_t kBlock = 4;
  std::vector<double> acc(kBlock * w);
  for (std::size_t o0 = 0; o0 < layer.out_channels; o0 += kBlock) {
    const std::size_t nb = std::min(kBlock, layer.out_channels - o0);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t b = 0; b < nb; ++b)
        std::fill_n(acc.begin() + b * w, w, 0.0);
      for (std::size_t c = 0; c < layer.in_channels; ++c) {
        for (std::size_t ky = 0; ky < 3; ++ky) {
          const double* row = padded.data() + c * plane + (y + ky) * pw;
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const double* src = row + kx;
            if (nb == kBlock) {
              const double w0 = layer.weight(o0, c, ky, kx);
              const double w1 = layer.weight(o0 + 1, c, ky, kx);
              const double w2 = layer.weight(o0 + 2, c, ky, kx);
              const double w3 = layer.weight(o0 + 3, c, ky, kx);
              double* a0 = acc.data();
              double* a1 = a0 + w;
              double* a2 = a1 + w;
              double* a3 = a2 + w;
              for (std::size_t x = 0; x < w; ++x) {
                const double v = src[x];
                a0[x] += w0 * v;
                a1[x] += w1 * v;
                a2[x] += w2 * v;
                a3[x] += w3 * v;
              }
            } else {
              for (std::size_t b = 0; b < nb; ++b) {
                const double wt = layer.weight(o0 + b, c, ky, kx);
                double* a = acc.data() + b * w;
                for (std::size_t x = 0; x < w; ++x) a[x] += wt * src[x];
              }
            }
          }
        }
      }
      for (std::size_t b = 0; b < nb; ++b) {
        const double bias = layer.bias[o0 + b];
        float* dst = &out.at(o0 + b, y, 0);
        const double* a = acc.data() + b * w;
        for (std::size_t x = 0; x < w; ++x) dst[x] = static_cast<float>(a[x] + bias);
      }
    }
  }
  return out;
}

inline FeatureMap relu(FeatureMap input) {
  for (float& v : input.values()) v = std::max(v, 0.0f);
  return input;
}

/// Channel-wise concatenation; all parts share spatial size.
inline FeatureMap concat_channels(std::span<const FeatureMap> parts) {
  detail::require(!parts.empty(), "concat_channels: nothing to concatenate");
  const std::size_t h = parts[0].height(), w = parts[0].width();
  std::size_t c = 0;
  for (const auto& p : parts) {
    detail::require(p.height() == h && p.width() == w, "concat_channels: spatial size mismatch");
    c += p.channels();
  }
  std::vector<float> data;
  data.reserve(c * h * w);
  for (const auto& p : parts) data.insert(data.end(), p.values().begin(), p.values().end());
  return FeatureMap(c, h, w, std::move(data));
}

}  // namespace wct2
