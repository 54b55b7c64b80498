/* Copyright 2026 The Squiggles Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Command-line front end: dataset generation, training, attacks, rendering.
// Every run records a JSON manifest holding its exact argument list; running
// `squiggles replay <manifest>` repeats the run and rewrites its outputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "squiggles/attacks.h"
#include "squiggles/datastore.h"
#include "squiggles/errors.h"
#include "squiggles/labeler.h"
#include "squiggles/model.h"
#include "squiggles/raster.h"

namespace squiggles {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr int kManifestFormat = 1;

void WriteManifest(const fs::path& path, const std::string& command,
                   const std::vector<std::string>& args, json details) {
  json m;
  m["tool"] = "squiggles";
  m["format"] = kManifestFormat;
  m["command"] = command;
  m["args"] = args;
  m["details"] = std::move(details);
  std::ofstream out(path, std::ios::trunc);
  out << m.dump(2) << '\n';
  out.close();
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot write manifest");
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": " + e.what());
  }
}

// Shards of a generated dataset directory, in manifest order when present.
std::vector<fs::path> ShardPaths(const fs::path& dir) {
  std::vector<fs::path> paths;
  if (fs::exists(dir / "manifest.json")) {
    const json m = ReadJson(dir / "manifest.json");
    for (const auto& name : m.at("details").at("shards")) {
      paths.push_back(dir / name.get<std::string>());
    }
  } else if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".sqgl") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
  } else if (fs::exists(dir)) {
    paths.push_back(dir);
  }
  if (paths.empty()) throw Error(ErrorCode::kIo, dir.string() + ": no shards found");
  return paths;
}

std::vector<int> ParseIntList(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidConfig, "bad integer list '" + text + "'");
    }
  }
  return out;
}

std::string FormatDouble(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  std::string variant;
  uint64_t seed = 0;
  uint64_t count = 0;
  uint64_t first_index = 0;
  uint64_t shard_size = 32768;
  std::string out_dir;
  bool embed_images = false;
  int resolution = kDefaultResolution;
  int workers = 0;
};

void RunGenerate(const GenerateOptions& o, const std::vector<std::string>& args) {
  if (o.count == 0) throw Error(ErrorCode::kInvalidConfig, "count must be positive");
  if (o.shard_size == 0) throw Error(ErrorCode::kInvalidConfig, "shard size must be positive");
  const Variant variant = ParseVariant(o.variant);
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  json shards = json::array();
  uint64_t simple = 0, crossing = 0;
  for (uint64_t done = 0, n = 0; done < o.count; ++n) {
    ShardSpec spec;
    spec.curve = CurveConfig::Default(variant);
    spec.resolution = o.resolution;
    spec.seed = o.seed;
    spec.first_index = o.first_index + done;
    spec.count = std::min(o.shard_size, o.count - done);
    spec.embed_images = o.embed_images;
    spec.workers = o.workers;
    char name[32];
    std::snprintf(name, sizeof(name), "shard-%05llu.sqgl", static_cast<unsigned long long>(n));
    GenerateShard(spec, dir / name);
    ShardReader reader(dir / name);
    ShardRecord record;
    while (reader.Next(&record)) {
      (record.label == Label::kSimple ? simple : crossing) += 1;
    }
    shards.push_back(name);
    done += spec.count;
  }
  const double fraction = static_cast<double>(crossing) / static_cast<double>(o.count);
  std::printf("%llu samples, self-intersecting fraction %.4f\n",
              static_cast<unsigned long long>(o.count), fraction);
  json details;
  details["config"] = {{"variant", VariantName(variant)}, {"seed", o.seed},
                       {"count", o.count},          {"first_index", o.first_index},
                       {"shard_size", o.shard_size}, {"embed_images", o.embed_images},
                       {"resolution", o.resolution}};
  details["shards"] = shards;
  details["labels"] = {{"simple", simple}, {"self_intersecting", crossing}};
  WriteManifest(dir / "manifest.json", "generate", args, details);
}

// ------------------------------------------------------------------- train

struct TrainOptions {
  std::string data;
  std::string eval;
  std::string out;
  std::string metrics;
  int64_t steps = 1000;
  int batch_size = 512;
  double lr = 4e-4;
  double sigma = 0.0;
  bool clamp = false;
  bool allow_epochs = false;
  int64_t log_every = 100;
  uint64_t seed = 0;
  std::string widths = "16,32,64";
  int blocks = 1;
  int stem_stride = 2;
  std::string pooling = "max";
};

void RunTrain(const TrainOptions& o, const std::vector<std::string>& args) {
  const ShardDataset train(ShardPaths(o.data));
  std::optional<ShardDataset> eval;
  if (!o.eval.empty()) eval.emplace(ShardPaths(o.eval));
  TrainConfig c;
  c.architecture.input_size = train.resolution();
  c.architecture.widths = ParseIntList(o.widths);
  c.architecture.blocks_per_stage = o.blocks;
  c.architecture.stem_stride = o.stem_stride;
  if (o.pooling == "max") {
    c.architecture.pooling = Pooling::kMax;
  } else if (o.pooling == "average") {
    c.architecture.pooling = Pooling::kAverage;
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown pooling '" + o.pooling + "'");
  }
  c.batch_size = o.batch_size;
  c.steps = o.steps;
  c.init_lr = o.lr;
  c.noise_sigma = o.sigma;
  c.clamp_noisy = o.clamp;
  c.allow_epochs = o.allow_epochs;
  c.log_every = o.log_every;
  c.seed = o.seed;
  const TrainResult result = Train(c, train, eval ? &*eval : nullptr);
  SaveCheckpoint(result.model, o.out);
  const fs::path metrics = o.metrics.empty() ? fs::path(o.out + ".metrics.csv") : fs::path(o.metrics);
  WriteMetricsCsv(result.history, metrics);
  json details;
  details["metrics"] = metrics.string();
  if (eval) {
    const Evaluation e = Evaluate(result.model, *eval);
    details["eval"] = {{"accuracy", e.accuracy}, {"roc_auc", e.roc_auc}};
    std::printf("held-out accuracy %.4f, roc-auc %.4f\n", e.accuracy, e.roc_auc);
  }
  WriteManifest(o.out + ".manifest.json", "train", args, details);
}

// ------------------------------------------------------------------ attack

struct AttackOptions {
  std::string checkpoint;
  std::string proxy;
  std::string data;
  std::string mode = "pixel";
  std::vector<double> epsilons;
  size_t count = 100;
  size_t first = 0;
  int iterations = 100;
  uint64_t seed = 0;
  int workers = 1;
  int batch_size = 32;
  double adversarial_epsilon = 0.0;
  std::string out;
  std::string summary;
};

struct Selection {
  std::vector<size_t> rows;
  std::vector<Sample> samples;
  std::vector<Label> labels;
  std::vector<float> images;
};

Selection Select(const ShardDataset& data, size_t first, size_t count) {
  if (first >= data.size()) throw Error(ErrorCode::kInvalidConfig, "--first beyond the data");
  Selection s;
  const size_t end = std::min(data.size(), first + count);
  const size_t pixels = static_cast<size_t>(data.resolution()) * data.resolution();
  s.images.resize((end - first) * pixels);
  for (size_t i = first; i < end; ++i) {
    s.rows.push_back(i);
    s.samples.push_back(data.sample(i));
    s.labels.push_back(data.label(i));
    data.FillImage(i, s.images.data() + (i - first) * pixels);
  }
  return s;
}

void WriteBoundaryCsv(const fs::path& path, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::trunc);
  out << "sample_index,source,y_true,pred,correct,boundary_distance\n";
  for (const json& r : rows) {
    out << r["sample_index"].get<uint64_t>() << ',' << r["source"].get<std::string>() << ','
        << r["y_true"].get<int>() << ',' << FormatDouble(r["pred"].get<double>()) << ','
        << (r["correct"].get<bool>() ? 1 : 0) << ',';
    if (!r["distance"].is_null()) out << FormatDouble(r["distance"].get<double>());
    out << '\n';
  }
  out.close();
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot write");
}

void RunAttack(const AttackOptions& o, const std::vector<std::string>& args) {
  const Model model = LoadCheckpoint(o.checkpoint);
  const ShardDataset data(ShardPaths(o.data));
  const Selection sel = Select(data, o.first, o.count);
  const PipelineConfig pipeline{data.curve(), data.resolution()};
  const size_t pixels = static_cast<size_t>(data.resolution()) * data.resolution();
  std::vector<double> epsilons = o.epsilons;
  if (epsilons.empty()) epsilons.assign(kEpsilonLadder.begin(), kEpsilonLadder.end());
  AttackConfig base;
  base.iterations = o.iterations;
  base.workers = o.workers;
  base.batch_size = o.batch_size;
  base.seed = o.seed;
  const fs::path summary_path =
      o.summary.empty() ? fs::path(o.out + ".summary.csv") : fs::path(o.summary);
  std::ofstream summary(summary_path, std::ios::trunc);
  json details;
  details["samples"] = sel.rows.size();

  if (o.mode == "boundary") {
    if (o.proxy.empty()) throw Error(ErrorCode::kInvalidConfig, "boundary mode needs --proxy");
    const Model proxy = LoadCheckpoint(o.proxy);
    const std::vector<float> clean = model.Predict(sel.images, static_cast<int>(sel.rows.size()));
    std::vector<Latent> latents;
    std::vector<Label> labels;
    std::vector<json> rows;
    for (size_t k = 0; k < sel.rows.size(); ++k) {
      latents.push_back(sel.samples[k].latent);
      labels.push_back(sel.labels[k]);
      const bool correct = (clean[k] >= 0.5f) == (sel.labels[k] == Label::kSelfIntersecting);
      rows.push_back({{"sample_index", sel.samples[k].index}, {"source", "clean"},
                      {"y_true", LabelValue(sel.labels[k])}, {"pred", clean[k]},
                      {"correct", correct}});
    }
    if (o.adversarial_epsilon > 0) {
      // Latent-attack errors join the population, measured from z_adv.
      AttackConfig c = base;
      c.epsilon = o.adversarial_epsilon;
      const auto attacks = PgdLatent(model, latents, labels, pipeline, c);
      for (size_t k = 0; k < attacks.size(); ++k) {
        const LatentAttack& a = attacks[k];
        const bool correct = (a.adversarial_prediction >= 0.5f) ==
                             (a.label_after == Label::kSelfIntersecting);
        if (correct) continue;
        latents.push_back(a.latent);
        labels.push_back(a.label_after);
        rows.push_back({{"sample_index", sel.samples[k].index}, {"source", "latent-adversarial"},
                        {"y_true", LabelValue(a.label_after)}, {"pred", a.adversarial_prediction},
                        {"correct", false}});
      }
    }
    const auto distances = EstimateBoundaryDistances(proxy, latents, labels, pipeline,
                                                     kEpsilonLadder, base);
    for (size_t k = 0; k < rows.size(); ++k) {
      rows[k]["distance"] = distances[k] ? json(*distances[k]) : json(nullptr);
    }
    WriteBoundaryCsv(o.out, rows);
    // Cumulative distribution per group, as plotted against the ladder.
    summary << "group,epsilon,count,cumulative_fraction\n";
    for (const std::string group : {"correct", "misclassified", "latent-adversarial"}) {
      std::vector<double> d;
      for (const json& r : rows) {
        const std::string g = r["source"] == "latent-adversarial" ? "latent-adversarial"
                              : r["correct"].get<bool>()           ? "correct"
                                                                   : "misclassified";
        if (g != group) continue;
        d.push_back(r["distance"].is_null() ? INFINITY : r["distance"].get<double>());
      }
      for (double eps : kEpsilonLadder) {
        const auto below = std::count_if(d.begin(), d.end(), [&](double x) { return x <= eps; });
        summary << group << ',' << FormatDouble(eps) << ',' << d.size() << ','
                << FormatDouble(d.empty() ? 0.0 : static_cast<double>(below) / d.size()) << '\n';
      }
    }
  } else {
    const AttackSpace space = ParseAttackSpace(o.mode);
    std::vector<AttackRecord> records;
    summary << "epsilon,count,accuracy,error_rate,truth_unchanged_fraction\n";
    const int batch = static_cast<int>(sel.rows.size());
    const std::vector<float> clean = model.Predict(sel.images, batch);
    for (double eps : epsilons) {
      AttackConfig c = base;
      c.epsilon = eps;
      std::vector<AttackRecord> step;
      if (space == AttackSpace::kPixel) {
        const auto out = PgdPixel(model, sel.images, sel.labels, c);
        for (size_t k = 0; k < out.size(); ++k) {
          step.push_back({sel.samples[k].index, space, eps, out[k].clean_prediction,
                          out[k].adversarial_prediction, sel.labels[k], sel.labels[k],
                          out[k].perturbation_norm});
        }
      } else if (space == AttackSpace::kGaussian) {
        std::vector<float> noisy(sel.images.size());
        std::vector<double> norms(sel.rows.size());
        for (size_t k = 0; k < sel.rows.size(); ++k) {
          const std::span<const float> x(sel.images.data() + k * pixels, pixels);
          const std::vector<double> y = GaussianAttack(x, eps, o.seed, sel.samples[k].index);
          double n2 = 0.0;
          for (size_t i = 0; i < pixels; ++i) {
            noisy[k * pixels + i] = static_cast<float>(y[i]);
            n2 += (y[i] - x[i]) * (y[i] - x[i]);
          }
          norms[k] = std::sqrt(n2);
        }
        const std::vector<float> adv = model.Predict(noisy, batch);
        for (size_t k = 0; k < sel.rows.size(); ++k) {
          step.push_back({sel.samples[k].index, space, eps, clean[k], adv[k], sel.labels[k],
                          sel.labels[k], norms[k]});
        }
      } else {
        std::vector<Latent> latents;
        for (const Sample& s : sel.samples) latents.push_back(s.latent);
        const auto out = PgdLatent(model, latents, sel.labels, pipeline, c);
        for (size_t k = 0; k < out.size(); ++k) {
          step.push_back({sel.samples[k].index, space, eps, out[k].clean_prediction,
                          out[k].adversarial_prediction, sel.labels[k], out[k].label_after,
                          out[k].perturbation_norm});
        }
      }
      size_t correct = 0, unchanged = 0;
      for (const AttackRecord& r : step) {
        correct += (r.adversarial_prediction >= 0.5) == (r.label_after == Label::kSelfIntersecting);
        unchanged += r.label_after == r.label_before;
      }
      const double n = static_cast<double>(step.size());
      summary << FormatDouble(eps) << ',' << step.size() << ',' << FormatDouble(correct / n)
              << ',' << FormatDouble(1.0 - correct / n) << ',' << FormatDouble(unchanged / n)
              << '\n';
      std::printf("%s eps %-8g accuracy %.4f truth unchanged %.4f\n", o.mode.c_str(), eps,
                  correct / n, unchanged / n);
      records.insert(records.end(), step.begin(), step.end());
    }
    WriteAttackCsv(records, o.out);
  }
  summary.close();
  if (!summary) throw Error(ErrorCode::kIo, summary_path.string() + ": cannot write");
  details["summary"] = summary_path.string();
  WriteManifest(o.out + ".manifest.json", "attack", args, details);
}

// ------------------------------------------------------------------ render

struct RenderOptions {
  std::string data;
  std::string indices = "0";
  std::string out_dir;
  bool overlay = false;
  std::string checkpoint;
  double epsilon = 0.15;
  int iterations = 100;
};

// Portable float map, single channel, little-endian, bottom row first.
void WritePfm(const Image& image, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  const int n = image.size();
  out << "Pf\n" << n << ' ' << n << "\n-1.0\n";
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const float v = image.at(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  out.close();
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot write");
}

// Side-by-side panels separated by a one-pixel mid-gray gutter.
void WriteStrip(const std::vector<Image>& panels, const fs::path& path) {
  const int n = panels.front().size();
  const int width = static_cast<int>(panels.size()) * (n + 1) - 1;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << "P5\n" << width << ' ' << n << "\n255\n";
  for (int j = n - 1; j >= 0; --j) {
    for (size_t p = 0; p < panels.size(); ++p) {
      if (p > 0) out.put(static_cast<char>(128));
      for (int i = 0; i < n; ++i) {
        const float v = std::clamp(panels[p].at(i, j), 0.0f, 1.0f);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
      }
    }
  }
  out.close();
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot write");
}

void RunRender(const RenderOptions& o, const std::vector<std::string>& args) {
  const ShardDataset data(ShardPaths(o.data));
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  const int n = data.resolution();
  const CurveConfig curve = data.curve();
  std::optional<Model> model;
  if (!o.checkpoint.empty()) model = LoadCheckpoint(o.checkpoint);
  json files = json::array();
  for (int index : ParseIntList(o.indices)) {
    if (index < 0 || static_cast<size_t>(index) >= data.size()) {
      throw Error(ErrorCode::kInvalidConfig, "index " + std::to_string(index) + " out of range");
    }
    const std::string stem = "sample-" + std::to_string(index);
    Image clean(n);
    data.FillImage(index, clean.pixels().data());
    WritePgm(clean, dir / (stem + ".pgm"));
    files.push_back(stem + ".pgm");

    if (o.overlay) {
      const Sample s = data.sample(index);
      const Polyline points = Normalize(EvalCurve(s.latent, curve.times)).points;
      const std::vector<Crossing> crossings = IntersectionPoints(points);
      Image marked = clean;
      std::ofstream csv(dir / (stem + "-crossings.csv"), std::ios::trunc);
      csv.precision(17);
      csv << "x,y,first_segment,second_segment,pixel_i,pixel_j\n";
      for (const Crossing& c : crossings) {
        const int pi = static_cast<int>(std::lround(c.at.x * (n - 1)));
        const int pj = static_cast<int>(std::lround(c.at.y * (n - 1)));
        csv << c.at.x << ',' << c.at.y << ',' << c.first_segment << ',' << c.second_segment
            << ',' << pi << ',' << pj << '\n';
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const int i = pi + di, j = pj + dj;
            if (i >= 0 && i < n && j >= 0 && j < n) marked.at(i, j) = (di == 0 && dj == 0) ? 0.0f : 0.5f;
          }
        }
      }
      WritePgm(marked, dir / (stem + "-overlay.pgm"));
      files.push_back(stem + "-overlay.pgm");
      files.push_back(stem + "-crossings.csv");
    }

    if (model) {
      AttackConfig c;
      c.epsilon = o.epsilon;
      c.iterations = o.iterations;
      const Label label = data.label(index);
      const auto attack = PgdPixel(*model, clean.pixels(), std::span(&label, 1), c);
      Image attacked(n), diff(n), shown(n);
      float peak = 0.0f;
      for (int p = 0; p < n * n; ++p) {
        attacked.pixels()[p] = static_cast<float>(attack[0].image[p]);
        diff.pixels()[p] = attacked.pixels()[p] - clean.pixels()[p];
        peak = std::max(peak, std::abs(diff.pixels()[p]));
      }
      for (int p = 0; p < n * n; ++p) {
        shown.pixels()[p] = peak > 0 ? 0.5f + 0.5f * diff.pixels()[p] / peak : 0.5f;
      }
      WriteStrip({clean, attacked, shown}, dir / (stem + "-triptych.pgm"));
      WritePfm(clean, dir / (stem + "-clean.pfm"));
      WritePfm(attacked, dir / (stem + "-attacked.pfm"));
      WritePfm(diff, dir / (stem + "-difference.pfm"));
      for (const char* suffix : {"-triptych.pgm", "-clean.pfm", "-attacked.pfm", "-difference.pfm"}) {
        files.push_back(stem + suffix);
      }
    }
  }
  WriteManifest(dir / "manifest.json", "render", args, {{"files", files}});
}

// ------------------------------------------------------------------ driver

int Run(const std::vector<std::string>& args);

int RunReplay(const std::string& manifest) {
  const json m = ReadJson(manifest);
  if (m.value("tool", "") != "squiggles" || m.value("format", 0) != kManifestFormat) {
    throw Error(ErrorCode::kCorruptFile, manifest + ": not a squiggles manifest");
  }
  return Run(m.at("args").get<std::vector<std::string>>());
}

int Run(const std::vector<std::string>& args) {
  CLI::App app{"Synthetic curve images labeled by self-intersection"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Write dataset shards and a manifest");
  g->add_option("--variant", gen.variant, "taylor or sinenet")->required();
  g->add_option("--seed", gen.seed);
  g->add_option("--count", gen.count, "Number of samples")->required();
  g->add_option("--first-index", gen.first_index);
  g->add_option("--shard-size", gen.shard_size);
  g->add_option("--out-dir", gen.out_dir)->required();
  g->add_flag("--embed-images", gen.embed_images);
  g->add_option("--resolution", gen.resolution);
  g->add_option("--workers", gen.workers, "0 uses every core");

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train a classifier on generated shards");
  t->add_option("--data", tr.data, "Dataset directory")->required();
  t->add_option("--eval", tr.eval, "Held-out dataset directory");
  t->add_option("--out", tr.out, "Checkpoint path")->required();
  t->add_option("--metrics", tr.metrics, "Metrics CSV (default <out>.metrics.csv)");
  t->add_option("--steps", tr.steps);
  t->add_option("--batch-size", tr.batch_size);
  t->add_option("--lr", tr.lr);
  t->add_option("--sigma", tr.sigma, "Pixel noise standard deviation");
  t->add_flag("--clamp", tr.clamp, "Clamp noisy pixels to [0, 1]");
  t->add_flag("--allow-epochs", tr.allow_epochs);
  t->add_option("--log-every", tr.log_every);
  t->add_option("--seed", tr.seed);
  t->add_option("--widths", tr.widths, "Comma-separated stage widths");
  t->add_option("--blocks", tr.blocks, "Residual blocks per stage");
  t->add_option("--stem-stride", tr.stem_stride);
  t->add_option("--pooling", tr.pooling, "max or average");

  AttackOptions at;
  auto* a = app.add_subcommand("attack", "Run attacks or boundary estimates on a checkpoint");
  a->add_option("--checkpoint", at.checkpoint)->required();
  a->add_option("--data", at.data)->required();
  a->add_option("--mode", at.mode, "pixel, latent, gaussian or boundary");
  a->add_option("--epsilon", at.epsilons, "Budget(s); default is the full ladder");
  a->add_option("--count", at.count);
  a->add_option("--first", at.first);
  a->add_option("--iterations", at.iterations);
  a->add_option("--seed", at.seed);
  a->add_option("--workers", at.workers);
  a->add_option("--batch-size", at.batch_size);
  a->add_option("--proxy", at.proxy, "Proxy checkpoint for boundary mode");
  a->add_option("--adversarial-epsilon", at.adversarial_epsilon,
                "Boundary mode: also measure latent-attack errors at this budget");
  a->add_option("--out", at.out, "Per-sample CSV")->required();
  a->add_option("--summary", at.summary, "Summary CSV (default <out>.summary.csv)");

  RenderOptions re;
  auto* r = app.add_subcommand("render", "Write PGM images, overlays and attack triptychs");
  r->add_option("--data", re.data)->required();
  r->add_option("--indices", re.indices, "Comma-separated record indices");
  r->add_option("--out-dir", re.out_dir)->required();
  r->add_flag("--overlay", re.overlay, "Mark self-intersections");
  r->add_option("--checkpoint", re.checkpoint, "Add pixel-attack triptychs");
  r->add_option("--epsilon", re.epsilon);
  r->add_option("--iterations", re.iterations);

  std::string manifest;
  auto* p = app.add_subcommand("replay", "Repeat the run recorded in a manifest");
  p->add_option("manifest", manifest)->required();

  std::vector<const char*> argv = {"squiggles"};
  for (const std::string& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // Usage problems share the exit status of configuration errors.
    const int status = app.exit(e);
    if (status != 0) std::cerr << "squiggles: error[usage]: " << e.what() << '\n';
    return status == 0 ? 0 : 2;
  }
  if (g->parsed()) RunGenerate(gen, args);
  if (t->parsed()) RunTrain(tr, args);
  if (a->parsed()) RunAttack(at, args);
  if (r->parsed()) RunRender(re, args);
  if (p->parsed()) return RunReplay(manifest);
  return 0;
}

}  // namespace
}  // namespace squiggles

int main(int argc, char** argv) {
  try {
    return squiggles::Run(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const squiggles::Error& e) {
    std::cerr << "squiggles: error[" << squiggles::ErrorCodeName(e.code()) << "]: " << e.what()
              << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "squiggles: error[internal]: " << e.what() << '\n';
    return 3;
  }
}
