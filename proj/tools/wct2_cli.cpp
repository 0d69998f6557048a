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

// wct2: stylize | metrics | verify | inspect-weights
// Exit codes: 0 success, 1 runtime error, 2 argument error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wct2/wct2.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string resolve_weights(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("WCT2_WEIGHTS"); env && *env) return env;
  throw UsageError("no weights given: pass --weights or set WCT2_WEIGHTS");
}

const std::map<std::string, wct2::PoolingKind> kPooling{{"haar", wct2::PoolingKind::haar},
                                                        {"average", wct2::PoolingKind::average},
                                                        {"split", wct2::PoolingKind::split},
                                                        {"max", wct2::PoolingKind::max}};
const std::map<std::string, wct2::UnpoolMode> kUnpool{{"sum", wct2::UnpoolMode::sum},
                                                      {"concat", wct2::UnpoolMode::concat}};
const std::map<std::string, wct2::TransformKind> kTransform{{"wct", wct2::TransformKind::wct},
                                                            {"adain", wct2::TransformKind::adain}};

void write_report(const std::string& path, const wct2::MetricReport& r) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw wct2::PipelineError("cannot write report '" + path + "'");
  out << r.to_key_value();
}

struct StylizeArgs {
  std::string content, style, output, weights, content_seg, style_seg, report;
  std::string unpool = "concat", transform = "wct", pooling = "haar";
  double alpha = 1.0;
  bool skip_wct = false, decoder_wct = false, multi_level = false;
  std::size_t max_side = 0;
};

int cmd_stylize(const StylizeArgs& a) {
  const std::string weights = resolve_weights(a.weights);
  const wct2::ModelConfig config{kUnpool.at(a.unpool), kPooling.at(a.pooling)};
  const wct2::Model model = wct2::build_model(wct2::load_weights(weights), config);

  wct2::StylizeRequest req;
  req.content = a.content;
  req.style = a.style;
  if (!a.content_seg.empty()) req.content_seg = a.content_seg;
  if (!a.style_seg.empty()) req.style_seg = a.style_seg;
  req.schedule.skip_wct = a.skip_wct;
  req.schedule.decoder_wct = a.decoder_wct;
  req.schedule.multi_level = a.multi_level;
  req.schedule.transform = kTransform.at(a.transform);
  req.schedule.alpha = a.alpha;
  if (a.max_side > 0) req.max_side = a.max_side;
  req.compute_report = !a.report.empty();
  req.warn = [](const std::string& m) { std::cerr << "warning: " << m << "\n"; };

  const auto outcome = wct2::run_stylize(model, req);
  wct2::write_png(a.output, outcome.image);
  if (outcome.report) {
    write_report(a.report, *outcome.report);
    std::cout << outcome.report->to_text();
  }
  return 0;
}

int cmd_metrics(const std::string& content, const std::string& style, const std::string& stylized,
                const std::string& weights_flag, const std::string& report) {
  const std::string weights = resolve_weights(weights_flag);
  const auto store = wct2::load_weights(weights);
  const auto mode = store.find("decoder.conv3_4.weight") &&
                            store.find("decoder.conv3_4.weight")->dims.size() == 4 &&
                            store.find("decoder.conv3_4.weight")->dims[1] == 256
                        ? wct2::UnpoolMode::sum
                        : wct2::UnpoolMode::concat;
  const wct2::Model model = wct2::build_model(store, {mode, wct2::PoolingKind::haar});
  for (const auto* p : {&content, &style, &stylized})
    if (!std::filesystem::exists(*p)) throw wct2::PipelineError("image not found: " + *p);
  const auto r = wct2::evaluate(model, wct2::read_image(content), wct2::read_image(style),
                                wct2::read_image(stylized));
  std::cout << r.to_text();
  if (!report.empty()) write_report(report, r);
  return 0;
}

int cmd_verify(std::uint64_t seed, bool perturb) {
  wct2::verify::Options opt;
  opt.seed = seed;
  if (perturb) opt.bank.kernels[0][0][0] += 0.05;
  const auto results = wct2::verify::run_all(opt);
  std::cout << "seed " << seed << "\n" << wct2::verify::format_table(results);
  for (const auto& r : results)
    if (!r.passed) return kExitRuntime;
  return 0;
}

int cmd_inspect(const std::string& weights_flag) {
  const std::string weights = resolve_weights(weights_flag);
  const auto store = wct2::load_weights(weights);
  std::size_t enc = 0, dec = 0;
  for (const auto& [name, t] : store.tensors()) {
    std::cout << name << " " << wct2::dims_string(t.dims) << " " << t.values.size() << "\n";
    if (name.starts_with("encoder.")) enc += t.values.size();
    if (name.starts_with("decoder.")) dec += t.values.size();
  }
  const std::size_t sum_dec = wct2::plan_parameter_count(wct2::decoder_plan(wct2::UnpoolMode::sum));
  const std::size_t cat_dec =
      wct2::plan_parameter_count(wct2::decoder_plan(wct2::UnpoolMode::concat));
  std::cout << "tensors=" << store.size() << "\n";
  std::cout << "encoder_parameters=" << enc << "\n";
  std::cout << "decoder_parameters=" << dec << "\n";
  std::cout << "total_parameters=" << store.parameter_count() << "\n";
  std::cout << "expected_encoder_parameters="
            << wct2::plan_parameter_count(wct2::encoder_plan()) << "\n";
  std::cout << "expected_sum_decoder_parameters=" << sum_dec << "\n";
  std::cout << "expected_concat_decoder_parameters=" << cat_dec << "\n";
  std::cout.precision(4);
  std::cout << std::fixed << "concat_sum_decoder_ratio="
            << static_cast<double>(cat_dec) / static_cast<double>(sum_dec) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet-corrected photorealistic style transfer"};
  app.require_subcommand(1);

  StylizeArgs sa;
  auto* st = app.add_subcommand("stylize", "Stylize a content image with a style image");
  st->add_option("--content", sa.content, "Content image (PNG or JPEG)")->required();
  st->add_option("--style", sa.style, "Style image (PNG or JPEG)")->required();
  st->add_option("--output", sa.output, "Output PNG path")->required();
  st->add_option("--weights", sa.weights, "Weight container (default: $WCT2_WEIGHTS)");
  auto* cseg = st->add_option("--content-seg", sa.content_seg, "Content label map (grayscale PNG)");
  auto* sseg = st->add_option("--style-seg", sa.style_seg, "Style label map (grayscale PNG)");
  cseg->needs(sseg);
  sseg->needs(cseg);
  st->add_option("--unpool", sa.unpool, "Decoder unpooling: sum or concat")
      ->check(CLI::IsMember({"sum", "concat"}))
      ->capture_default_str();
  st->add_option("--transform", sa.transform, "Feature transform: wct or adain")
      ->check(CLI::IsMember({"wct", "adain"}))
      ->capture_default_str();
  st->add_option("--alpha", sa.alpha, "Blend weight of the stylized features")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  st->add_flag("--skip-wct", sa.skip_wct, "Also stylize the LH/HL/HH skip components");
  st->add_flag("--decoder-wct", sa.decoder_wct, "Also stylize decoder conv3_2/conv2_2/conv1_2");
  st->add_flag("--multi-level", sa.multi_level, "Run four chained stylization passes");
  st->add_option("--pooling", sa.pooling, "Pooling operator: haar, average, split or max")
      ->check(CLI::IsMember({"haar", "average", "split", "max"}))
      ->capture_default_str();
  st->add_option("--max-side", sa.max_side, "Downscale so the longer side is at most this")
      ->check(CLI::PositiveNumber);
  st->add_option("--report", sa.report, "Write key=value metrics to this path");

  std::string m_content, m_style, m_stylized, m_weights, m_report;
  auto* mt = app.add_subcommand("metrics", "Edge SSIM and style loss for a stylized result");
  mt->add_option("--content", m_content, "Content image")->required();
  mt->add_option("--style", m_style, "Style image")->required();
  mt->add_option("--stylized", m_stylized, "Stylized image")->required();
  mt->add_option("--weights", m_weights, "Weight container (default: $WCT2_WEIGHTS)");
  mt->add_option("--report", m_report, "Write key=value metrics to this path");

  std::uint64_t seed = 42;
  bool perturb = false;
  auto* vf = app.add_subcommand("verify", "Run the invariant suite on seeded random data");
  vf->add_option("--seed", seed, "Seed for the random verification data")->capture_default_str();
  vf->add_flag("--perturb-haar", perturb, "Test hook: perturb one Haar analysis kernel");

  std::string i_weights;
  auto* iw = app.add_subcommand("inspect-weights", "List tensors and parameter totals");
  iw->add_option("--weights", i_weights, "Weight container (default: $WCT2_WEIGHTS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*st) return cmd_stylize(sa);
    if (*mt) return cmd_metrics(m_content, m_style, m_stylized, m_weights, m_report);
    if (*vf) return cmd_verify(seed, perturb);
    if (*iw) return cmd_inspect(i_weights);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
