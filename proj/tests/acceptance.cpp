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

// Acceptance gate: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "cli_fixtures.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace wct2;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<FeatureMap> frame_corpus() {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> ch(1, 8), half(1, 32);
  std::vector<FeatureMap> v;
  for (int i = 0; i < 100; ++i) {
    const std::size_t c = ch(rng), h = 2 * half(rng), w = 2 * half(rng);
    v.push_back(oracle::random_map(rng, c, h, w));
  }
  return v;
}

FeatureMap correlated(std::mt19937_64& rng, std::size_t c, std::size_t n) {
  const FeatureMap z = oracle::random_map(rng, c, 1, n);
  std::normal_distribution<double> d;
  std::vector<double> mix(c * c), off(c);
  for (auto& v : mix) v = d(rng);
  for (auto& v : off) v = 2 * d(rng);
  FeatureMap out(c, 1, n);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t p = 0; p < n; ++p) {
      double s = off[i];
      for (std::size_t k = 0; k < c; ++k) s += mix[i * c + k] * z.at(k, 0, p);
      out.at(i, 0, p) = static_cast<float>(s);
    }
  return out;
}

Outcome perfect_reconstruction() {
  const auto corpus = frame_corpus();
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (const auto& x : corpus) worst = std::max(worst, oracle::max_abs_diff(haar_unpool(haar_pool(x)), x));
  const double secs = seconds_since(t0);
  return verdict(worst < 1e-5 && secs < 5.0, fmt("max |err| %.3e (< 1e-5), %.2f s (< 5 s)", worst, secs));
}

Outcome tight_frame() {
  double worst = 0;
  for (const auto& x : frame_corpus()) {
    double e = 0;
    for (float v : x.values()) e += double(v) * v;
    const auto sb = haar_pool(x);
    double s = 0;
    for (const auto* b : sb.bands())
      for (float v : b->values()) s += double(v) * v;
    worst = std::max(worst, std::abs(e - s) / e);
  }
  return verdict(worst < 1e-6, fmt("max relative energy gap %.3e (< 1e-6)", worst));
}

Outcome whitening_coloring() {
  std::mt19937_64 rng(7);
  double off = 0, diag = 0, col = 0;
  for (std::size_t c : {4u, 8u, 32u}) {
    const std::size_t n = 64 * c;
    const FeatureMap content = correlated(rng, c, n), style = correlated(rng, c, n);
    const FeatureMap w = whiten(content, compute_stats(content));
    const auto cw = oracle::covariance(w);
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j)
        (i == j ? diag : off) = std::max(i == j ? diag : off, std::abs(cw[i][j] - (i == j)));
    const auto co = oracle::covariance(wct(content, style));
    const auto cs = oracle::covariance(style);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        num += (co[i][j] - cs[i][j]) * (co[i][j] - cs[i][j]);
        den += cs[i][j] * cs[i][j];
      }
    col = std::max(col, std::sqrt(num / den));
  }
  return verdict(off < 1e-4 && diag < 1e-3 && col < 1e-3,
                 fmt("off-diag %.2e (< 1e-4), diag %.2e (< 1e-3), coloring rel Frobenius %.2e (< 1e-3)",
                     off, diag, col));
}

Outcome adain_moments() {
  std::mt19937_64 rng(8);
  double worst = 0;
  for (int i = 0; i < 5; ++i) {
    const FeatureMap content = correlated(rng, 16, 400), style = correlated(rng, 16, 300);
    const FeatureMap out = adain(content, style);
    const auto co = oracle::covariance(out), cs = oracle::covariance(style);
    for (std::size_t c = 0; c < 16; ++c) {
      double mo = 0, ms = 0;
      for (float v : out.channel(c)) mo += v;
      for (float v : style.channel(c)) ms += v;
      worst = std::max(worst, std::abs(mo / 400 - ms / 300));
      worst = std::max(worst, std::abs(std::sqrt(co[c][c]) - std::sqrt(cs[c][c])));
    }
  }
  return verdict(worst < 1e-5, fmt("max mean/std error %.3e (< 1e-5)", worst));
}

Outcome conv_oracle() {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> ch(1, 8), sp(1, 16);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t ci = ch(rng), co = ch(rng), h = std::max<std::size_t>(2, sp(rng)),
                      w = std::max<std::size_t>(2, sp(rng));
    const FeatureMap x = oracle::random_map(rng, ci, h, w);
    const ConvLayer l = oracle::random_conv(rng, co, ci);
    const bool refl = i % 2 == 0;
    worst = std::max(worst, oracle::max_abs_diff(conv2d(x, l, refl ? PaddingMode::reflect : PaddingMode::zero),
                                                 oracle::conv(x, l, refl)));
  }
  return verdict(worst < 1e-6, fmt("max |err| over 50 instances %.3e (< 1e-6)", worst));
}

Outcome parameter_ratio() {
  const Model sum = build_model(make_synthetic_weights(1, UnpoolMode::sum), {UnpoolMode::sum, PoolingKind::haar});
  const Model cat =
      build_model(make_synthetic_weights(1, UnpoolMode::concat), {UnpoolMode::concat, PoolingKind::haar});
  const double ratio = double(cat.decoder_parameter_count()) / double(sum.decoder_parameter_count());
  return verdict(ratio >= 1.75 && ratio <= 1.85,
                 fmt("concat/sum decoder params %.4f (%.0f / ", ratio, double(cat.decoder_parameter_count())) +
                     fmt("%.0f), required [1.75, 1.85]", double(sum.decoder_parameter_count())));
}

Outcome metric_sanity() {
  std::mt19937_64 rng(10);
  const FeatureMap a = oracle::random_map(rng, 1, 24, 30, 0, 1), b = oracle::random_map(rng, 1, 24, 30, 0, 1);
  const double self = ssim(a, a);
  const double vs_oracle = std::abs(ssim(a, b) - oracle::ssim(a, b));
  const Model m = build_model(make_synthetic_weights(2, UnpoolMode::sum), {UnpoolMode::sum, PoolingKind::haar});
  const FeatureMap img = oracle::random_map(rng, 3, 32, 32, 0, 1);
  const double loss = style_loss(img, img, m).total;
  return verdict(std::abs(self - 1) <= 1e-9 && std::abs(loss) <= 1e-8 && vs_oracle < 1e-6,
                 fmt("|ssim(x,x)-1| %.1e, style_loss(x,x) %.1e, |ssim-oracle| %.1e", std::abs(self - 1), loss,
                     vs_oracle));
}

Outcome ablation_ordering() {
  std::mt19937_64 rng(11);
  double haar = 0, maxp = 1e300;
  for (int i = 0; i < 5; ++i) {
    const FeatureMap x = oracle::random_map(rng, 3, 32, 40, 0, 1);
    haar = std::max(haar, oracle::max_abs_diff(reconstruct(Model::plumbing(PoolingKind::haar), x), x));
    maxp = std::min(maxp, oracle::max_abs_diff(reconstruct(Model::plumbing(PoolingKind::max), x), x));
  }
  return verdict(haar < 1e-5 && maxp > 0, fmt("haar round-trip %.2e (< 1e-5), max-pool round-trip %.3f (> 0)",
                                              haar, maxp));
}

struct Workspace {
  fs::path dir = fs::temp_directory_path() / ("wct2_acceptance_" + std::to_string(::getpid()));
  Workspace() {
    fs::create_directories(dir);
    save_weights(make_synthetic_weights(3, UnpoolMode::concat), dir / "concat.wts");
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string q(const std::string& leaf) const { return fixtures::quote((dir / leaf).string()); }
};

Outcome cli_determinism(const Workspace& ws) {
  write_png(ws.dir / "dc.png", fixtures::test_photo(31, 64, 64));
  write_png(ws.dir / "ds.png", fixtures::test_photo(32, 64, 64));
  const std::string args = "stylize --content " + ws.q("dc.png") + " --style " + ws.q("ds.png") +
                           " --weights " + ws.q("concat.wts") + " --output ";
  const auto r1 = fixtures::run(WCT2_CLI_PATH, args + ws.q("d1.png"), ws.dir);
  const auto r2 = fixtures::run(WCT2_CLI_PATH, args + ws.q("d2.png"), ws.dir);
  if (r1.code != 0 || r2.code != 0) return {Status::fail, "CLI exited with " + std::to_string(r1.code) + "/" +
                                                              std::to_string(r2.code) + ": " + r1.err};
  const std::string a = fixtures::slurp(ws.dir / "d1.png"), b = fixtures::slurp(ws.dir / "d2.png");
  return verdict(!a.empty() && a == b, a == b ? "two runs produced identical " + std::to_string(a.size()) +
                                                    "-byte PNGs"
                                              : "outputs differ");
}

Outcome runtime_256(const Workspace& ws) {
  write_png(ws.dir / "rc.png", fixtures::test_photo(41, 256, 256));
  write_png(ws.dir / "rs.png", fixtures::test_photo(42, 256, 256));
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = fixtures::run(WCT2_CLI_PATH,
                               "stylize --content " + ws.q("rc.png") + " --style " + ws.q("rs.png") +
                                   " --weights " + ws.q("concat.wts") + " --output " + ws.q("r.png"),
                               ws.dir);
  const double secs = seconds_since(t0);
  if (r.code != 0) return {Status::fail, "CLI exited with " + std::to_string(r.code) + ": " + r.err};
  return verdict(secs < 60.0, fmt("256x256 concat stylization via CLI took %.1f s (< 60 s)", secs));
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  double se = 0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) se += std::pow(double(a.rgb[i]) - b.rgb[i], 2);
  const double mse = se / double(a.rgb.size());
  return mse == 0 ? 1e9 : 10 * std::log10(255.0 * 255.0 / mse);
}

// Needs an exported checkpoint ($WCT2_WEIGHTS) and photographs ($WCT2_PHOTOS).
Outcome trained_reconstruction() {
  const char* wpath = std::getenv("WCT2_WEIGHTS");
  if (!wpath || !*wpath || !fs::exists(wpath)) return {Status::skip, "no weights file ($WCT2_WEIGHTS unset)"};
  const char* photos = std::getenv("WCT2_PHOTOS");
  std::vector<fs::path> files;
  if (photos && fs::is_directory(photos))
    for (const auto& e : fs::directory_iterator(photos)) {
      const auto ext = e.path().extension().string();
      if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
    }
  std::sort(files.begin(), files.end());
  if (files.size() < 3) return {Status::skip, "fewer than 3 photographs in $WCT2_PHOTOS"};
  files.resize(3);
  const WeightStore store = load_weights(wpath);
  const Tensor* t = store.find("decoder.conv3_4.weight");
  const UnpoolMode mode = t && t->dims.size() == 4 && t->dims[1] == 256 ? UnpoolMode::sum : UnpoolMode::concat;
  const Model m = build_model(store, {mode, PoolingKind::haar});
  double worst = 1e300;
  for (const auto& f : files) {
    const ImageBuffer img = read_image(f);
    const PreparedImage p = prepare(img, 512);
    const ImageBuffer ref = to_image_buffer(unprepare(p.features, p.crop));
    worst = std::min(worst, psnr(ref, to_image_buffer(unprepare(reconstruct(m, p.features), p.crop))));
  }
  return verdict(worst > 30.0, fmt("min reconstruction PSNR %.2f dB over 3 photographs (> 30 dB)", worst));
}

}  // namespace

int main() {
  Workspace ws;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"perfect_reconstruction", perfect_reconstruction},
      {"tight_frame", tight_frame},
      {"whitening_coloring", whitening_coloring},
      {"adain_moments", adain_moments},
      {"conv_oracle", conv_oracle},
      {"parameter_ratio", parameter_ratio},
      {"metric_sanity", metric_sanity},
      {"ablation_ordering", ablation_ordering},
      {"cli_determinism", [&] { return cli_determinism(ws); }},
      {"runtime_256", [&] { return runtime_256(ws); }},
      {"trained_reconstruction_psnr", trained_reconstruction},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    std::printf("[%s] %-28s %s\n", tag, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.status == Status::fail;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
