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

// Deterministic sample generation and the shard file format.
//
// Shard layout, all integers little-endian:
//
//   offset  size  field
//        0     4  magic "SQGL"
//        4     4  u32 format version (1)
//        8     1  u8 variant (0 = taylor, 1 = sinenet)
//        9     1  u8 flags (bit 0: images embedded)
//       10     2  u16 reserved, zero
//       12     4  u32 image resolution n
//       16     4  u32 latent length L
//       20     4  u32 curve points per sample
//       24     8  u64 record count
//       32     8  u64 global seed
//       40     8  u64 first sample index
//       48        records, each:
//                   L x f32 latent, u8 label, [n*n x f32 image]
//      end-4     4  u32 CRC-32 (zlib polynomial) of every preceding byte
//
// Record r holds sample index first_index + r. Latents are stored rounded to
// float; the exact double latent, label and image are regenerated from
// (seed, index).

#ifndef SQUIGGLES_DATASTORE_H_
#define SQUIGGLES_DATASTORE_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <vector>

#include "squiggles/curve.h"
#include "squiggles/labeler.h"
#include "squiggles/raster.h"

namespace squiggles {

inline constexpr uint32_t kShardVersion = 1;
inline constexpr uint64_t kDefaultShardRecords = 32768;
inline constexpr size_t kShardHeaderBytes = 48;

struct Sample {
  uint64_t index = 0;
  Latent latent;
  Label label = Label::kSimple;
};

Sample GenerateSample(const CurveConfig& config, const SampleKey& key);

struct ShardHeader {
  uint32_t version = kShardVersion;
  Variant variant = Variant::kSineNet;
  bool has_images = false;
  uint32_t resolution = kDefaultResolution;
  uint32_t latent_length = 0;
  uint32_t curve_points = kDefaultCurvePoints;
  uint64_t record_count = 0;
  uint64_t seed = 0;
  uint64_t first_index = 0;

  size_t record_bytes() const;
  // Curve configuration implied by the header (default sample times).
  CurveConfig curve_config() const;
};

struct ShardSpec {
  CurveConfig curve = CurveConfig::Default(Variant::kSineNet);
  int resolution = kDefaultResolution;
  uint64_t seed = 0;
  uint64_t first_index = 0;
  uint64_t count = kDefaultShardRecords;
  bool embed_images = false;
  // 0 picks hardware concurrency. Output never depends on it.
  int workers = 0;
};

// Writes one shard. Throws kInvalidConfig for count == 0 and kIo (with the
// path) on filesystem failures.
void GenerateShard(const ShardSpec& spec, const std::filesystem::path& path);

struct ShardRecord {
  uint64_t index = 0;
  std::vector<float> latent;
  Label label = Label::kSimple;
  std::optional<Image> image;
};

// Streams records in stored order. Construction validates header, length and
// checksum, so a reader that exists is reading an intact file.
class ShardReader {
 public:
  explicit ShardReader(const std::filesystem::path& path);

  const ShardHeader& header() const { return header_; }
  // Returns false after the last record.
  bool Next(ShardRecord* record);

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  ShardHeader header_;
  uint64_t next_ = 0;
  std::vector<char> buffer_;
};

std::vector<ShardRecord> ReadShard(const std::filesystem::path& path);

// Rebuilds the exact sample behind record `r` of a shard.
Sample RegenerateRecord(const ShardHeader& header, uint64_t r);

// Random access to labeled images for training and evaluation.
class Dataset {
 public:
  virtual ~Dataset() = default;
  virtual size_t size() const = 0;
  virtual int resolution() const = 0;
  virtual Label label(size_t i) const = 0;
  // Writes resolution^2 floats in Image storage order.
  virtual void FillImage(size_t i, float* out) const = 0;
  virtual Sample sample(size_t i) const = 0;
};

// Samples (seed, first_index + i) for i < count, generated on demand.
// Labels are computed up front (in parallel) since they are cheap to keep.
class GeneratedDataset : public Dataset {
 public:
  GeneratedDataset(CurveConfig curve, int resolution, uint64_t seed,
                   uint64_t first_index, size_t count, int workers = 0);

  size_t size() const override { return labels_.size(); }
  int resolution() const override { return resolution_; }
  Label label(size_t i) const override { return labels_[i]; }
  void FillImage(size_t i, float* out) const override;
  Sample sample(size_t i) const override;

  const CurveConfig& curve() const { return curve_; }

 private:
  CurveConfig curve_;
  int resolution_;
  uint64_t seed_;
  uint64_t first_index_;
  std::vector<Label> labels_;
};

// Records from shard files, in the given order. Embedded images are used
// when present; otherwise images are regenerated from (seed, index).
class ShardDataset : public Dataset {
 public:
  explicit ShardDataset(const std::vector<std::filesystem::path>& paths);

  size_t size() const override { return entries_.size(); }
  int resolution() const override { return resolution_; }
  Label label(size_t i) const override { return entries_[i].label; }
  void FillImage(size_t i, float* out) const override;
  Sample sample(size_t i) const override;

  // Curve settings of the first shard.
  CurveConfig curve() const { return headers_.front().curve_config(); }

 private:
  struct Entry {
    int shard = 0;
    uint64_t record = 0;
    Label label = Label::kSimple;
    int64_t image_offset = -1;
  };
  std::vector<ShardHeader> headers_;
  std::vector<Entry> entries_;
  std::vector<float> images_;
  int resolution_ = 0;
};

}  // namespace squiggles

#endif  // SQUIGGLES_DATASTORE_H_
