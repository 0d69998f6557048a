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

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "wct2/network.hpp"
#include "wct2/tensor.hpp"

namespace wct2 {

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Rec. 601 luma of a 3-channel map; a 1-channel map is returned as is.
inline FeatureMap luminance(const FeatureMap& image) {
  detail::require(image.channels() == 1 || image.channels() == 3,
                  "luminance: expected 1 or 3 channels, got " + shape_string(image));
  if (image.channels() == 1) return image;
  FeatureMap y(1, image.height(), image.width());
  auto r = image.channel(0), g = image.channel(1), b = image.channel(2);
  auto dst = y.channel(0);
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = static_cast<float>(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
  return y;
}

/// Sobel gradient magnitude of the luminance, divided by its largest
/// attainable value (4*sqrt(2)) so inputs in [0,1] map into [0,1].
/// Borders use reflection.
inline FeatureMap edge_response(const FeatureMap& image) {
  detail::require(!image.empty() && image.height() >= 2 && image.width() >= 2,
                  "edge_response: image must be at least 2x2");
  const FeatureMap y = reflect_pad(luminance(image), 1, 1, 1, 1);
  const std::size_t h = image.height(), w = image.width();
  const double norm = 1.0 / (4.0 * std::sqrt(2.0));
  FeatureMap out(1, h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      auto p = [&](std::size_t dy, std::size_t dx) -> double { return y.at(0, i + dy, j + dx); };
      const double gx = (p(0, 2) + 2 * p(1, 2) + p(2, 2)) - (p(0, 0) + 2 * p(1, 0) + p(2, 0));
      const double gy = (p(2, 0) + 2 * p(2, 1) + p(2, 2)) - (p(0, 0) + 2 * p(0, 1) + p(0, 2));
      out.at(0, i, j) = static_cast<float>(std::sqrt(gx * gx + gy * gy) * norm);
    }
  return out;
}

inline std::array<double, kSsimWindow> gaussian_window_1d() {
  std::array<double, kSsimWindow> g{};
  double sum = 0.0;
  const double c = (kSsimWindow - 1) / 2.0;
  for (std::size_t i = 0; i < kSsimWindow; ++i) {
    const double d = static_cast<double>(i) - c;
    g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

/// Mean SSIM over all window positions fully inside both single-channel
/// maps (11x11 Gaussian, sigma 1.5, unit dynamic range).
inline double ssim(const FeatureMap& a, const FeatureMap& b) {
  detail::require(a.channels() == 1 && b.channels() == 1, "ssim: expects single-channel maps");
  detail::require(a.same_shape(b), "ssim: maps differ in size");
  detail::require(a.height() >= kSsimWindow && a.width() >= kSsimWindow,
                  "ssim: maps must be at least 11x11");
  const auto g = gaussian_window_1d();
  const std::size_t h = a.height(), w = a.width();
  const std::size_t oh = h - kSsimWindow + 1, ow = w - kSsimWindow + 1;

  // Horizontal pass on the five moment images, then vertical.
  constexpr std::size_t kMoments = 5;
  std::vector<double> horiz(kMoments * h * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      std::array<double, kMoments> s{};
      for (std::size_t k = 0; k < kSsimWindow; ++k) {
        const double u = a.at(0, y, x + k), v = b.at(0, y, x + k);
        s[0] += g[k] * u;
        s[1] += g[k] * v;
        s[2] += g[k] * u * u;
        s[3] += g[k] * v * v;
        s[4] += g[k] * u * v;
      }
      for (std::size_t m = 0; m < kMoments; ++m) horiz[(m * h + y) * ow + x] = s[m];
    }

  double total = 0.0;
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      std::array<double, kMoments> s{};
      for (std::size_t k = 0; k < kSsimWindow; ++k)
        for (std::size_t m = 0; m < kMoments; ++m) s[m] += g[k] * horiz[(m * h + y + k) * ow + x];
      const double mx = s[0], my = s[1];
      const double vx = s[2] - mx * mx, vy = s[3] - my * my, cxy = s[4] - mx * my;
      total += ((2 * mx * my + kSsimC1) * (2 * cxy + kSsimC2)) /
               ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
    }
  return total / static_cast<double>(oh * ow);
}

/// Centered second-moment matrix normalized by the pixel count.
inline Matrix centered_gram(const FeatureMap& f) {
  const std::size_t c = f.channels(), n = f.plane_size();
  detail::require(n > 0, "centered_gram: empty features");
  std::vector<double> x(c * n);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const auto plane = f.channel(ch);
    double mean = 0.0;
    for (float v : plane) mean += v;
    mean /= static_cast<double>(n);
    for (std::size_t p = 0; p < n; ++p) x[ch * n + p] = plane[p] - mean;
  }
  Matrix g(c);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = i; j < c; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) acc += x[i * n + p] * x[j * n + p];
      g(i, j) = g(j, i) = acc / static_cast<double>(n);
    }
  return g;
}

struct StyleLoss {
  double total = 0.0;
  /// conv1_1, conv2_1, conv3_1, conv4_1.
  std::array<double, 4> per_layer{};
};

inline constexpr std::array<const char*, 4> kStyleLossLayers{"conv1_1", "conv2_1", "conv3_1",
                                                             "conv4_1"};

/// Sum over the encoder taps of ||G(style) - G(output)||_F^2 / C^2.
inline StyleLoss style_loss(const FeatureMap& style_image, const FeatureMap& output_image,
                            const Model& model) {
  const auto s = encode(model, style_image);
  const auto o = encode(model, output_image);
  StyleLoss loss;
  for (std::size_t l = 0; l < 4; ++l) {
    const double c = static_cast<double>(s.taps[l].channels());
    const double d = frobenius_distance(centered_gram(s.taps[l]), centered_gram(o.taps[l]));
    loss.per_layer[l] = d * d / (c * c);
    loss.total += loss.per_layer[l];
  }
  return loss;
}

struct MetricReport {
  double ssim_edges = 0.0;
  StyleLoss style;

  /// Flat key=value lines, one metric per line.
  std::string to_key_value() const {
    std::ostringstream os;
    os.precision(17);
    os << "ssim_edges=" << ssim_edges << "\n";
    os << "style_loss=" << style.total << "\n";
    for (std::size_t l = 0; l < 4; ++l)
      os << "style_loss." << kStyleLossLayers[l] << "=" << style.per_layer[l] << "\n";
    return os.str();
  }

  std::string to_text() const {
    std::ostringstream os;
    char buf[128];
    std::snprintf(buf, sizeof buf, "SSIM (edges)      %.6f\n", ssim_edges);
    os << buf;
    std::snprintf(buf, sizeof buf, "style loss        %.6g\n", style.total);
    os << buf;
    for (std::size_t l = 0; l < 4; ++l) {
      std::snprintf(buf, sizeof buf, "  %-15s %.6g\n", kStyleLossLayers[l], style.per_layer[l]);
      os << buf;
    }
    return os.str();
  }
};

}  // namespace wct2
