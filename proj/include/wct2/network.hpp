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

// VGG-19 (conv1_1 .. conv4_1) encoder with wavelet pooling, a mirrored
// decoder with wavelet unpooling, and the progressive stylization pass.
//
// Canonical tensor names are "<encoder|decoder>.<layer>.<weight|bias>",
// weights shaped (out, in, 3, 3) and biases (out). The decoder layers are
// named after the encoder layer they mirror:
//
//   encoder  conv1_1 3->64   conv1_2 64->64   [pool 1]
//            conv2_1 64->128 conv2_2 128->128 [pool 2]
//            conv3_1 128->256 conv3_2..conv3_4 256->256 [pool 3]
//            conv4_1 256->512
//   decoder  conv4_1 512->256 [unpool 3] conv3_4 (256|1280)->256
//            conv3_3, conv3_2 256->256, conv3_1 256->128 [unpool 2]
//            conv2_2 (128|640)->128, conv2_1 128->64 [unpool 1]
//            conv1_2 (64|320)->64, conv1_1 64->3 (no ReLU)
//
// The widened input of the conv after each unpool is the concat mode: the
// four unpooled subband components plus the pre-pool encoder feature.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "wct2/stylize.hpp"
#include "wct2/tensor.hpp"
#include "wct2/wavelet.hpp"
#include "wct2/weights.hpp"

namespace wct2 {

enum class PoolingKind { haar, average, split, max };
enum class UnpoolMode { sum, concat };
enum class TransformKind { wct, adain };

inline std::string_view to_string(PoolingKind k) {
  switch (k) {
    case PoolingKind::haar: return "haar";
    case PoolingKind::average: return "average";
    case PoolingKind::split: return "split";
    case PoolingKind::max: return "max";
  }
  return "?";
}
inline std::string_view to_string(UnpoolMode m) { return m == UnpoolMode::sum ? "sum" : "concat"; }
inline std::string_view to_string(TransformKind t) { return t == TransformKind::wct ? "wct" : "adain"; }

/// One step of a layer program: a 3x3 conv, or a pooling/unpooling site.
struct LayerStep {
  enum class Kind { conv, pool, unpool };
  Kind kind = Kind::conv;
  std::string name;
  std::size_t in = 0;
  std::size_t out = 0;
  bool relu = true;
  /// Pooling level 1..3 for pool/unpool steps.
  int level = 0;
};

inline constexpr int kPoolLevels = 3;

inline std::vector<LayerStep> encoder_plan() {
  using K = LayerStep::Kind;
  return {
      {K::conv, "conv1_1", 3, 64},     {K::conv, "conv1_2", 64, 64},
      {K::pool, "pool1", 64, 64, false, 1},
      {K::conv, "conv2_1", 64, 128},   {K::conv, "conv2_2", 128, 128},
      {K::pool, "pool2", 128, 128, false, 2},
      {K::conv, "conv3_1", 128, 256},  {K::conv, "conv3_2", 256, 256},
      {K::conv, "conv3_3", 256, 256},  {K::conv, "conv3_4", 256, 256},
      {K::pool, "pool3", 256, 256, false, 3},
      {K::conv, "conv4_1", 256, 512},
  };
}

inline std::vector<LayerStep> decoder_plan(UnpoolMode mode) {
  using K = LayerStep::Kind;
  const std::size_t widen = mode == UnpoolMode::concat ? 5 : 1;
  return {
      {K::conv, "conv4_1", 512, 256},
      {K::unpool, "unpool3", 256, 256 * widen, false, 3},
      {K::conv, "conv3_4", 256 * widen, 256}, {K::conv, "conv3_3", 256, 256},
      {K::conv, "conv3_2", 256, 256},         {K::conv, "conv3_1", 256, 128},
      {K::unpool, "unpool2", 128, 128 * widen, false, 2},
      {K::conv, "conv2_2", 128 * widen, 128}, {K::conv, "conv2_1", 128, 64},
      {K::unpool, "unpool1", 64, 64 * widen, false, 1},
      {K::conv, "conv1_2", 64 * widen, 64},   {K::conv, "conv1_1", 64, 3, false},
  };
}

/// Closed-form parameter count (weights + biases) of a layer program.
inline std::size_t plan_parameter_count(const std::vector<LayerStep>& plan) {
  std::size_t n = 0;
  for (const auto& s : plan)
    if (s.kind == LayerStep::Kind::conv) n += s.out * s.in * 9 + s.out;
  return n;
}

/// Sites where a stylization transform may run.
enum class Site {
  enc_conv1_1, enc_conv2_1, enc_conv3_1, enc_conv4_1,
  skip_level1, skip_level2, skip_level3,
  dec_conv3_2, dec_conv2_2, dec_conv1_2,
};

inline std::string_view to_string(Site s) {
  constexpr std::array<std::string_view, 10> names{
      "encoder.conv1_1", "encoder.conv2_1", "encoder.conv3_1", "encoder.conv4_1",
      "skip.level1",     "skip.level2",     "skip.level3",
      "decoder.conv3_2", "decoder.conv2_2", "decoder.conv1_2"};
  return names[static_cast<std::size_t>(s)];
}

inline std::optional<Site> encoder_site(std::string_view layer) {
  if (layer == "conv1_1") return Site::enc_conv1_1;
  if (layer == "conv2_1") return Site::enc_conv2_1;
  if (layer == "conv3_1") return Site::enc_conv3_1;
  if (layer == "conv4_1") return Site::enc_conv4_1;
  return std::nullopt;
}

inline std::optional<Site> decoder_site(std::string_view layer) {
  if (layer == "conv3_2") return Site::dec_conv3_2;
  if (layer == "conv2_2") return Site::dec_conv2_2;
  if (layer == "conv1_2") return Site::dec_conv1_2;
  return std::nullopt;
}

/// What one pooling site hands to the decoder.
struct SkipLevel {
  /// LH, HL, HH for haar; top-right, bottom-left, bottom-right for split;
  /// empty for average and max.
  std::vector<FeatureMap> high;
  std::vector<std::uint8_t> argmax;
  /// Feature before pooling; populated in concat mode only.
  FeatureMap pre_pool;
};

/// Index 0 holds pooling level 1 (finest).
struct SkipStack {
  std::array<SkipLevel, kPoolLevels> levels;
};

struct EncodeResult {
  FeatureMap bottleneck;
  SkipStack skips;
  /// conv1_1, conv2_1, conv3_1, conv4_1 outputs (post ReLU, post transform).
  std::array<FeatureMap, 4> taps;
};

struct ModelConfig {
  UnpoolMode unpool = UnpoolMode::concat;
  PoolingKind pooling = PoolingKind::haar;
};

struct NamedConv {
  LayerStep step;
  ConvLayer layer;
};

/// Immutable encoder-decoder. A plumbing model bypasses every conv so only
/// the pooling/unpooling structure acts on the signal.
class Model {
 public:
  Model(ModelConfig config, std::vector<NamedConv> encoder, std::vector<NamedConv> decoder)
      : config_(config), encoder_(std::move(encoder)), decoder_(std::move(decoder)) {}

  static Model plumbing(PoolingKind pooling) {
    Model m({UnpoolMode::sum, pooling}, {}, {});
    m.plumbing_ = true;
    return m;
  }

  const ModelConfig& config() const { return config_; }
  bool is_plumbing() const { return plumbing_; }

  std::size_t encoder_parameter_count() const { return count(encoder_); }
  std::size_t decoder_parameter_count() const { return count(decoder_); }
  std::size_t parameter_count() const {
    return encoder_parameter_count() + decoder_parameter_count();
  }

  const ConvLayer* encoder_conv(std::string_view name) const { return find(encoder_, name); }
  const ConvLayer* decoder_conv(std::string_view name) const { return find(decoder_, name); }

 private:
  static std::size_t count(const std::vector<NamedConv>& v) {
    std::size_t n = 0;
    for (const auto& c : v) n += c.layer.parameter_count();
    return n;
  }
  static const ConvLayer* find(const std::vector<NamedConv>& v, std::string_view name) {
    for (const auto& c : v)
      if (c.step.name == name) return &c.layer;
    return nullptr;
  }

  ModelConfig config_;
  std::vector<NamedConv> encoder_;
  std::vector<NamedConv> decoder_;
  bool plumbing_ = false;
};

namespace detail {

inline ConvLayer take_conv(const WeightStore& store, const std::string& prefix,
                           const LayerStep& step) {
  const std::string wname = prefix + "." + step.name + ".weight";
  const std::string bname = prefix + "." + step.name + ".bias";
  const std::vector<std::uint32_t> wdims{static_cast<std::uint32_t>(step.out),
                                         static_cast<std::uint32_t>(step.in), 3, 3};
  const std::vector<std::uint32_t> bdims{static_cast<std::uint32_t>(step.out)};
  const Tensor* w = store.find(wname);
  if (!w) throw WeightLoadError("missing tensor '" + wname + "'");
  if (w->dims != wdims)
    throw WeightLoadError("tensor '" + wname + "' has shape " + dims_string(w->dims) +
                          ", expected " + dims_string(wdims));
  const Tensor* b = store.find(bname);
  if (!b) throw WeightLoadError("missing tensor '" + bname + "'");
  if (b->dims != bdims)
    throw WeightLoadError("tensor '" + bname + "' has shape " + dims_string(b->dims) +
                          ", expected " + dims_string(bdims));
  return ConvLayer{step.out, step.in, w->values, b->values};
}

}  // namespace detail

/// Assembles a model from a weight store, validating every tensor in plan order.
inline Model build_model(const WeightStore& store, ModelConfig config = {}) {
  std::vector<NamedConv> enc, dec;
  for (const auto& s : encoder_plan())
    if (s.kind == LayerStep::Kind::conv) enc.push_back({s, detail::take_conv(store, "encoder", s)});
  for (const auto& s : decoder_plan(config.unpool))
    if (s.kind == LayerStep::Kind::conv) dec.push_back({s, detail::take_conv(store, "decoder", s)});
  return Model(config, std::move(enc), std::move(dec));
}

/// Seeded random He-scaled weights with the canonical names and shapes.
inline WeightStore make_synthetic_weights(std::uint64_t seed, UnpoolMode mode,
                                          bool zero_bias = false) {
  std::mt19937_64 rng(seed);
  WeightStore store;
  auto add = [&](const std::string& prefix, const LayerStep& s) {
    std::normal_distribution<float> wdist(0.0f, std::sqrt(2.0f / static_cast<float>(9 * s.in)));
    std::uniform_real_distribution<float> bdist(-0.05f, 0.05f);
    Tensor w{{static_cast<std::uint32_t>(s.out), static_cast<std::uint32_t>(s.in), 3, 3}, {}};
    w.values.resize(s.out * s.in * 9);
    for (float& v : w.values) v = wdist(rng);
    Tensor b{{static_cast<std::uint32_t>(s.out)}, std::vector<float>(s.out, 0.0f)};
    if (!zero_bias)
      for (float& v : b.values) v = bdist(rng);
    store.insert(prefix + "." + s.name + ".weight", std::move(w));
    store.insert(prefix + "." + s.name + ".bias", std::move(b));
  };
  for (const auto& s : encoder_plan())
    if (s.kind == LayerStep::Kind::conv) add("encoder", s);
  for (const auto& s : decoder_plan(mode))
    if (s.kind == LayerStep::Kind::conv) add("decoder", s);
  return store;
}

/// Rewrites a site's features; used to inject stylization into a pass.
using SiteHook = std::function<FeatureMap(Site, FeatureMap)>;

namespace detail {

inline FeatureMap run_conv(const Model& model, const ConvLayer* layer, const LayerStep& step,
                           FeatureMap x) {
  if (model.is_plumbing()) return x;
  FeatureMap y = conv2d(x, *layer, PaddingMode::reflect);
  return step.relu ? relu(std::move(y)) : y;
}

inline FeatureMap pool(PoolingKind kind, bool keep_pre_pool, FeatureMap x, SkipLevel& skip) {
  if (keep_pre_pool) skip.pre_pool = x;
  switch (kind) {
    case PoolingKind::haar: {
      auto sb = haar_pool(x);
      skip.high = {std::move(sb.lh), std::move(sb.hl), std::move(sb.hh)};
      return std::move(sb.ll);
    }
    case PoolingKind::average:
      return average_pool(x);
    case PoolingKind::split: {
      auto parts = split_pool(x);
      skip.high = {std::move(parts[1]), std::move(parts[2]), std::move(parts[3])};
      return std::move(parts[0]);
    }
    case PoolingKind::max: {
      auto r = max_pool_with_mask(x);
      skip.argmax = std::move(r.argmax);
      return std::move(r.pooled);
    }
  }
  throw ContractViolation("unknown pooling kind");
}

// Each unpooled component at full resolution, in LL/LH/HL/HH (or polyphase)
// order. Average and max pooling carry no high-frequency skips, so their
// last three components are zero.
inline std::array<FeatureMap, 4> unpool_components(PoolingKind kind, const FeatureMap& low,
                                                   const SkipLevel& skip) {
  switch (kind) {
    case PoolingKind::haar:
      return haar_unpool_components({low, skip.high.at(0), skip.high.at(1), skip.high.at(2)});
    case PoolingKind::split:
      return split_unpool_components({low, skip.high.at(0), skip.high.at(1), skip.high.at(2)});
    case PoolingKind::average:
    case PoolingKind::max: {
      FeatureMap up = kind == PoolingKind::average ? average_unpool(low)
                                                   : max_unpool(low, skip.argmax);
      FeatureMap zero(up.channels(), up.height(), up.width());
      return {std::move(up), zero, zero, zero};
    }
  }
  throw ContractViolation("unknown pooling kind");
}

inline FeatureMap unpool(PoolingKind kind, UnpoolMode mode, const FeatureMap& low,
                         const SkipLevel& skip) {
  if (mode == UnpoolMode::sum) {
    switch (kind) {
      case PoolingKind::haar:
        return haar_unpool({low, skip.high.at(0), skip.high.at(1), skip.high.at(2)});
      case PoolingKind::split:
        return split_unpool({low, skip.high.at(0), skip.high.at(1), skip.high.at(2)});
      case PoolingKind::average:
        return average_unpool(low);
      case PoolingKind::max:
        return max_unpool(low, skip.argmax);
    }
  }
  require(!skip.pre_pool.empty(), "unpool: concat mode needs the pre-pool feature");
  auto comps = unpool_components(kind, low, skip);
  const std::array<FeatureMap, 5> parts{std::move(comps[0]), std::move(comps[1]),
                                        std::move(comps[2]), std::move(comps[3]), skip.pre_pool};
  return concat_channels(parts);
}

}  // namespace detail

/// Forward pass through the encoder. The hook, when set, runs on each
/// convX_1 output before it feeds the next layer.
inline EncodeResult encode(const Model& model, const FeatureMap& image,
                           const SiteHook& hook = {}) {
  detail::require(!image.empty(), "encode: empty input");
  detail::require(image.height() % 8 == 0 && image.width() % 8 == 0,
                  "encode: spatial size must be divisible by 8, got " + shape_string(image));
  EncodeResult r;
  FeatureMap x = image;
  const bool keep_pre = model.config().unpool == UnpoolMode::concat;
  for (const auto& step : encoder_plan()) {
    if (step.kind == LayerStep::Kind::pool) {
      x = detail::pool(model.config().pooling, keep_pre, std::move(x),
                       r.skips.levels[static_cast<std::size_t>(step.level - 1)]);
      continue;
    }
    x = detail::run_conv(model, model.encoder_conv(step.name), step, std::move(x));
    if (auto site = encoder_site(step.name)) {
      if (hook) x = hook(*site, std::move(x));
      r.taps[static_cast<std::size_t>(*site)] = x;
    }
  }
  r.bottleneck = std::move(x);
  return r;
}

/// Decoder pass; the hook runs on the conv3_2, conv2_2 and conv1_2 outputs.
inline FeatureMap decode(const Model& model, const FeatureMap& bottleneck, const SkipStack& skips,
                         const SiteHook& hook = {}) {
  FeatureMap x = bottleneck;
  for (const auto& step : decoder_plan(model.config().unpool)) {
    if (step.kind == LayerStep::Kind::unpool) {
      x = detail::unpool(model.config().pooling, model.config().unpool, x,
                         skips.levels[static_cast<std::size_t>(step.level - 1)]);
      continue;
    }
    x = detail::run_conv(model, model.decoder_conv(step.name), step, std::move(x));
    if (hook)
      if (auto site = decoder_site(step.name)) x = hook(*site, std::move(x));
  }
  return x;
}

/// Encode then decode with no transforms.
inline FeatureMap reconstruct(const Model& model, const FeatureMap& image) {
  EncodeResult e = encode(model, image);
  return decode(model, e.bottleneck, e.skips);
}

struct StylizeSchedule {
  bool encoder_wct = true;
  bool skip_wct = false;
  bool decoder_wct = false;
  bool multi_level = false;
  TransformKind transform = TransformKind::wct;
  double alpha = 1.0;
  /// Passes used by multi_level_stylize.
  int passes = 4;
};

/// Full-resolution label maps for content and style images.
struct Segmentation {
  SegmentationMap content;
  SegmentationMap style;
};

/// Records which sites were transformed, in order.
struct StylizeTrace {
  std::vector<Site> sites;
};

namespace detail {

inline FeatureMap apply_transform(const FeatureMap& content, const FeatureMap& style,
                                  const std::optional<Segmentation>& seg,
                                  const StylizeSchedule& schedule, const WarningSink& warn) {
  TransformOptions opt;
  opt.alpha = schedule.alpha;
  opt.warn = warn;
  if (!seg) {
    return schedule.transform == TransformKind::wct ? wct(content, style, opt)
                                                    : adain(content, style, opt);
  }
  const RegionPairing pair{seg->content.resized_nearest(content.height(), content.width()),
                           seg->style.resized_nearest(style.height(), style.width())};
  return schedule.transform == TransformKind::wct ? wct(content, style, pair, opt)
                                                  : adain(content, style, pair, opt);
}

}  // namespace detail

/// One forward pass that stylizes content progressively at each scheduled
/// site using the style's features from the same site.
inline FeatureMap stylize_forward(const Model& model, const FeatureMap& content,
                                  const FeatureMap& style,
                                  const std::optional<Segmentation>& seg,
                                  const StylizeSchedule& schedule, StylizeTrace* trace = nullptr,
                                  const WarningSink& warn = {}) {
  detail::require(content.channels() == style.channels(),
                  "stylize_forward: content and style channel counts differ");
  if (seg) {
    detail::require(seg->content.height == content.height() &&
                        seg->content.width == content.width(),
                    "stylize_forward: content segmentation size does not match content");
    detail::require(seg->style.height == style.height() && seg->style.width == style.width(),
                    "stylize_forward: style segmentation size does not match style");
  }
  auto transform = [&](Site site, const FeatureMap& c, const FeatureMap& s) {
    if (trace) trace->sites.push_back(site);
    return detail::apply_transform(c, s, seg, schedule, warn);
  };

  const EncodeResult style_enc = encode(model, style);
  std::array<FeatureMap, 3> style_dec_taps;
  if (schedule.decoder_wct) {
    decode(model, style_enc.bottleneck, style_enc.skips, [&](Site site, FeatureMap x) {
      style_dec_taps[static_cast<std::size_t>(site) -
                     static_cast<std::size_t>(Site::dec_conv3_2)] = x;
      return x;
    });
  }

  SiteHook enc_hook;
  if (schedule.encoder_wct) {
    enc_hook = [&](Site site, FeatureMap x) {
      return transform(site, x, style_enc.taps[static_cast<std::size_t>(site)]);
    };
  }
  EncodeResult content_enc = encode(model, content, enc_hook);

  if (schedule.skip_wct) {
    for (int level = 0; level < kPoolLevels; ++level) {
      auto& high = content_enc.skips.levels[static_cast<std::size_t>(level)].high;
      const auto& style_high = style_enc.skips.levels[static_cast<std::size_t>(level)].high;
      if (high.empty()) continue;
      const Site site = static_cast<Site>(static_cast<int>(Site::skip_level1) + level);
      for (std::size_t k = 0; k < high.size(); ++k) high[k] = transform(site, high[k], style_high[k]);
    }
  }

  SiteHook dec_hook;
  if (schedule.decoder_wct) {
    dec_hook = [&](Site site, FeatureMap x) {
      return transform(site, x,
                       style_dec_taps[static_cast<std::size_t>(site) -
                                      static_cast<std::size_t>(Site::dec_conv3_2)]);
    };
  }
  return decode(model, content_enc.bottleneck, content_enc.skips, dec_hook);
}

/// Repeated stylize_forward passes, each consuming the previous output.
inline FeatureMap multi_level_stylize(const Model& model, const FeatureMap& content,
                                      const FeatureMap& style,
                                      const std::optional<Segmentation>& seg,
                                      const StylizeSchedule& schedule,
                                      StylizeTrace* trace = nullptr,
                                      const WarningSink& warn = {}) {
  detail::require(schedule.passes >= 1, "multi_level_stylize: passes must be at least 1");
  FeatureMap x = content;
  for (int p = 0; p < schedule.passes; ++p)
    x = stylize_forward(model, x, style, seg, schedule, trace, warn);
  return x;
}

}  // namespace wct2
