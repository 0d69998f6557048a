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

// Straight-line reference implementations used only by the tests. They are
// written from the definitions and deliberately share no code paths with
// the library.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "wct2/tensor.hpp"

namespace oracle {

using wct2::ConvLayer;
using wct2::FeatureMap;

inline FeatureMap random_map(std::mt19937_64& rng, std::size_t c, std::size_t h, std::size_t w,
                             float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> d(lo, hi);
  FeatureMap f(c, h, w);
  for (float& v : f.values()) v = d(rng);
  return f;
}

inline ConvLayer random_conv(std::mt19937_64& rng, std::size_t out, std::size_t in,
                             float scale = 0.3f) {
  std::normal_distribution<float> d(0.0f, scale);
  ConvLayer l{out, in, std::vector<float>(out * in * 9), std::vector<float>(out)};
  for (float& v : l.weights) v = d(rng);
  for (float& v : l.bias) v = d(rng);
  return l;
}

inline double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.values()[i]) - b.values()[i]));
  return m;
}

inline long reflect(long i, long n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * (n - 1) - i;
  return i;
}

/// out[o][y][x] = b[o] + sum_{c,ky,kx} w[o][c][ky][kx] * in[c][y+ky-1][x+kx-1]
inline FeatureMap conv(const FeatureMap& in, const ConvLayer& l, bool reflect_border) {
  const long h = static_cast<long>(in.height()), w = static_cast<long>(in.width());
  FeatureMap out(l.out_channels, in.height(), in.width());
  for (std::size_t o = 0; o < l.out_channels; ++o)
    for (long y = 0; y < h; ++y)
      for (long x = 0; x < w; ++x) {
        double acc = 0.0;
        for (std::size_t c = 0; c < l.in_channels; ++c)
          for (long ky = -1; ky <= 1; ++ky)
            for (long kx = -1; kx <= 1; ++kx) {
              long yy = y + ky, xx = x + kx;
              double v;
              if (reflect_border) {
                v = in.at(c, static_cast<std::size_t>(reflect(yy, h)),
                          static_cast<std::size_t>(reflect(xx, w)));
              } else {
                v = (yy < 0 || yy >= h || xx < 0 || xx >= w)
                        ? 0.0
                        : in.at(c, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
              }
              acc += v * l.weights[((o * l.in_channels + c) * 3 + static_cast<std::size_t>(ky + 1)) * 3 +
                                   static_cast<std::size_t>(kx + 1)];
            }
        out.at(o, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
            static_cast<float>(acc + l.bias[o]);
      }
  return out;
}

inline FeatureMap relu(const FeatureMap& in) {
  FeatureMap out = in;
  for (float& v : out.values())
    if (v < 0) v = 0;
  return out;
}

/// Haar kernels written out by hand, rows-first orientation:
/// LL = 1/2 [[1,1],[1,1]], LH = 1/2 [[-1,1],[-1,1]],
/// HL = 1/2 [[-1,-1],[1,1]], HH = 1/2 [[1,-1],[-1,1]].
inline const double kHaar[4][2][2] = {
    {{0.5, 0.5}, {0.5, 0.5}},
    {{-0.5, 0.5}, {-0.5, 0.5}},
    {{-0.5, -0.5}, {0.5, 0.5}},
    {{0.5, -0.5}, {-0.5, 0.5}},
};

/// Stride-2 valid correlation with one 2x2 kernel.
inline FeatureMap stride2_correlate(const FeatureMap& in, const double k[2][2]) {
  FeatureMap out(in.channels(), in.height() / 2, in.width() / 2);
  for (std::size_t c = 0; c < in.channels(); ++c)
    for (std::size_t i = 0; i < out.height(); ++i)
      for (std::size_t j = 0; j < out.width(); ++j) {
        double s = 0.0;
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b) s += k[a][b] * in.at(c, 2 * i + a, 2 * j + b);
        out.at(c, i, j) = static_cast<float>(s);
      }
  return out;
}

/// Stride-2 transposed convolution of one band with one 2x2 kernel.
inline FeatureMap transposed2(const FeatureMap& band, const double k[2][2]) {
  FeatureMap out(band.channels(), band.height() * 2, band.width() * 2);
  for (std::size_t c = 0; c < band.channels(); ++c)
    for (std::size_t y = 0; y < out.height(); ++y)
      for (std::size_t x = 0; x < out.width(); ++x)
        out.at(c, y, x) = static_cast<float>(k[y % 2][x % 2] * band.at(c, y / 2, x / 2));
  return out;
}

inline FeatureMap add(const FeatureMap& a, const FeatureMap& b) {
  FeatureMap out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b.values()[i];
  return out;
}

/// Two-pass sample covariance over all pixels, normalized by n-1.
inline std::vector<std::vector<double>> covariance(const FeatureMap& f) {
  const std::size_t c = f.channels(), n = f.plane_size();
  std::vector<double> mean(c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    for (float v : f.channel(i)) mean[i] += v;
    mean[i] /= static_cast<double>(n);
  }
  std::vector<std::vector<double>> cov(c, std::vector<double>(c, 0.0));
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < n; ++p)
        s += (f.channel(i)[p] - mean[i]) * (f.channel(j)[p] - mean[j]);
      cov[i][j] = s / static_cast<double>(n - 1);
    }
  return cov;
}

/// Sobel magnitude of Rec.601 luma with reflected borders, scaled by 1/(4 sqrt 2).
inline FeatureMap sobel(const FeatureMap& rgb) {
  const long h = static_cast<long>(rgb.height()), w = static_cast<long>(rgb.width());
  auto luma = [&](long y, long x) {
    const auto yy = static_cast<std::size_t>(reflect(y, h)), xx = static_cast<std::size_t>(reflect(x, w));
    if (rgb.channels() == 1) return static_cast<double>(rgb.at(0, yy, xx));
    return static_cast<double>(static_cast<float>(0.299 * rgb.at(0, yy, xx) + 0.587 * rgb.at(1, yy, xx) +
                                                  0.114 * rgb.at(2, yy, xx)));
  };
  const int gx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  const int gy[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  FeatureMap out(1, rgb.height(), rgb.width());
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      double sx = 0, sy = 0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double v = luma(y + a - 1, x + b - 1);
          sx += gx[a][b] * v;
          sy += gy[a][b] * v;
        }
      out.at(0, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
          static_cast<float>(std::sqrt(sx * sx + sy * sy) / (4.0 * std::sqrt(2.0)));
    }
  return out;
}

/// Mean SSIM with a direct 2-D 11x11 Gaussian window (sigma 1.5) at every
/// position fully inside the image.
inline double ssim(const FeatureMap& a, const FeatureMap& b) {
  const int win = 11;
  double g[11][11];
  double total = 0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      const double di = i - 5, dj = j - 5;
      g[i][j] = std::exp(-(di * di + dj * dj) / (2 * 1.5 * 1.5));
      total += g[i][j];
    }
  for (auto& row : g)
    for (double& v : row) v /= total;
  const double c1 = 0.0001, c2 = 0.0009;
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t y = 0; y + win <= a.height(); ++y)
    for (std::size_t x = 0; x + win <= a.width(); ++x) {
      double mx = 0, my = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          mx += g[i][j] * a.at(0, y + i, x + j);
          my += g[i][j] * b.at(0, y + i, x + j);
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double da = a.at(0, y + i, x + j) - mx, db = b.at(0, y + i, x + j) - my;
          vx += g[i][j] * da * da;
          vy += g[i][j] * db * db;
          cxy += g[i][j] * da * db;
        }
      sum += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return sum / static_cast<double>(count);
}

/// Centered Gram normalized by pixel count.
inline std::vector<std::vector<double>> gram(const FeatureMap& f) {
  auto cov = covariance(f);
  const double n = static_cast<double>(f.plane_size());
  for (auto& row : cov)
    for (double& v : row) v *= (n - 1) / n;
  return cov;
}

}  // namespace oracle
