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

#include "squiggles/datastore.h"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "bytes.h"
#include "squiggles/errors.h"
#include "squiggles/parallel.h"

namespace squiggles {
namespace {

using internal::GetFloat;
using internal::GetLE;
using internal::PutFloat;
using internal::PutLE;

constexpr char kMagic[4] = {'S', 'Q', 'G', 'L'};
constexpr uint64_t kChunkRecords = 1024;

std::vector<char> EncodeHeader(const ShardHeader& h) {
  std::vector<char> out(kShardHeaderBytes, 0);
  std::memcpy(out.data(), kMagic, 4);
  PutLE<uint32_t>(&out[4], h.version);
  out[8] = static_cast<char>(h.variant);
  out[9] = static_cast<char>(h.has_images ? 1 : 0);
  PutLE<uint32_t>(&out[12], h.resolution);
  PutLE<uint32_t>(&out[16], h.latent_length);
  PutLE<uint32_t>(&out[20], h.curve_points);
  PutLE<uint64_t>(&out[24], h.record_count);
  PutLE<uint64_t>(&out[32], h.seed);
  PutLE<uint64_t>(&out[40], h.first_index);
  return out;
}

[[noreturn]] void Corrupt(const std::filesystem::path& path,
                          const std::string& what) {
  throw Error(ErrorCode::kCorruptFile, path.string() + ": " + what);
}

ShardHeader DecodeHeader(const char* in, const std::filesystem::path& path) {
  if (std::memcmp(in, kMagic, 4) != 0) Corrupt(path, "bad magic");
  ShardHeader h;
  h.version = GetLE<uint32_t>(in + 4);
  if (h.version != kShardVersion) {
    Corrupt(path, "unsupported version " + std::to_string(h.version));
  }
  const auto variant = static_cast<uint8_t>(in[8]);
  if (variant > 1) Corrupt(path, "unknown variant");
  h.variant = static_cast<Variant>(variant);
  const auto flags = static_cast<uint8_t>(in[9]);
  if (flags > 1) Corrupt(path, "unknown flags");
  h.has_images = flags & 1;
  h.resolution = GetLE<uint32_t>(in + 12);
  h.latent_length = GetLE<uint32_t>(in + 16);
  h.curve_points = GetLE<uint32_t>(in + 20);
  h.record_count = GetLE<uint64_t>(in + 24);
  h.seed = GetLE<uint64_t>(in + 32);
  h.first_index = GetLE<uint64_t>(in + 40);
  if (h.record_count == 0) Corrupt(path, "empty shard");
  if (h.resolution < 2) Corrupt(path, "bad resolution");
  if (h.latent_length == 0 ||
      h.latent_length % BlocksPerTerm(h.variant) != 0) {
    Corrupt(path, "latent length does not match variant");
  }
  if (h.curve_points < 3) Corrupt(path, "bad curve point count");
  return h;
}

void EncodeRecord(const ShardHeader& h, const CurveConfig& curve,
                  const SampleKey& key, char* out) {
  const Latent latent = SampleLatent(curve, key);
  const Polyline points = EvalCurve(latent, curve.times);
  for (double v : latent.values()) {
    PutFloat(out, static_cast<float>(v));
    out += 4;
  }
  *out++ = static_cast<char>(LabelCurve(points));
  if (h.has_images) {
    const Image image = RenderTruncated(Normalize(points).points, h.resolution);
    for (float v : image.pixels()) {
      PutFloat(out, v);
      out += 4;
    }
  }
}

}  // namespace

Sample GenerateSample(const CurveConfig& config, const SampleKey& key) {
  Sample s{key.index, SampleLatent(config, key), Label::kSimple};
  s.label = LabelCurve(EvalCurve(s.latent, config.times));
  return s;
}

size_t ShardHeader::record_bytes() const {
  return 4 * static_cast<size_t>(latent_length) + 1 +
         (has_images ? 4 * static_cast<size_t>(resolution) * resolution : 0);
}

CurveConfig ShardHeader::curve_config() const {
  const double lo = variant == Variant::kTaylor ? -3.0 : -2.0;
  return CurveConfig{variant,
                     static_cast<int>(latent_length) / BlocksPerTerm(variant),
                     SampleTimes::Uniform(lo, -lo, curve_points)};
}

void GenerateShard(const ShardSpec& spec, const std::filesystem::path& path) {
  if (spec.count == 0) {
    throw Error(ErrorCode::kInvalidConfig, "shard record count must be > 0");
  }
  if (spec.resolution < 2) {
    throw Error(ErrorCode::kInvalidConfig, "resolution must be at least 2");
  }
  ShardHeader h;
  h.variant = spec.curve.variant;
  h.has_images = spec.embed_images;
  h.resolution = spec.resolution;
  h.latent_length = spec.curve.latent_size();
  h.curve_points = spec.curve.times.size();
  h.record_count = spec.count;
  h.seed = spec.seed;
  h.first_index = spec.first_index;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());

  const std::vector<char> header = EncodeHeader(h);
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(header.data()), header.size());
  out.write(header.data(), header.size());

  const size_t record_bytes = h.record_bytes();
  std::vector<char> chunk;
  for (uint64_t start = 0; start < spec.count; start += kChunkRecords) {
    const uint64_t n = std::min(kChunkRecords, spec.count - start);
    chunk.assign(n * record_bytes, 0);
    ParallelFor(0, n, spec.workers, [&](size_t r) {
      const SampleKey key{spec.seed, spec.first_index + start + r};
      EncodeRecord(h, spec.curve, key, chunk.data() + r * record_bytes);
    });
    crc = crc32(crc, reinterpret_cast<const Bytef*>(chunk.data()), chunk.size());
    out.write(chunk.data(), chunk.size());
  }
  char trailer[4];
  PutLE<uint32_t>(trailer, static_cast<uint32_t>(crc));
  out.write(trailer, 4);
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

ShardReader::ShardReader(const std::filesystem::path& path) : path_(path) {
  std::error_code ec;
  const uintmax_t file_size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot stat " + path.string());
  in_.open(path, std::ios::binary);
  if (!in_) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  if (file_size < kShardHeaderBytes + 4) Corrupt(path, "file too short");

  char header[kShardHeaderBytes];
  in_.read(header, kShardHeaderBytes);
  header_ = DecodeHeader(header, path);
  const uintmax_t expected =
      kShardHeaderBytes + header_.record_count * header_.record_bytes() + 4;
  if (file_size != expected) {
    Corrupt(path, "size " + std::to_string(file_size) + " != expected " +
                      std::to_string(expected));
  }

  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(header), kShardHeaderBytes);
  std::vector<char> block(1 << 20);
  uintmax_t remaining = file_size - kShardHeaderBytes - 4;
  while (remaining > 0) {
    const size_t n = static_cast<size_t>(std::min<uintmax_t>(block.size(), remaining));
    in_.read(block.data(), n);
    if (!in_) Corrupt(path, "short read");
    crc = crc32(crc, reinterpret_cast<const Bytef*>(block.data()), n);
    remaining -= n;
  }
  char trailer[4];
  in_.read(trailer, 4);
  if (!in_ || GetLE<uint32_t>(trailer) != static_cast<uint32_t>(crc)) {
    Corrupt(path, "checksum mismatch");
  }
  in_.seekg(kShardHeaderBytes);
  buffer_.resize(header_.record_bytes());
}

bool ShardReader::Next(ShardRecord* record) {
  if (next_ >= header_.record_count) return false;
  in_.read(buffer_.data(), buffer_.size());
  if (!in_) Corrupt(path_, "short read");
  const char* p = buffer_.data();
  record->index = header_.first_index + next_;
  record->latent.resize(header_.latent_length);
  for (float& v : record->latent) {
    v = GetFloat(p);
    p += 4;
  }
  const auto label = static_cast<uint8_t>(*p++);
  if (label > 1) Corrupt(path_, "bad label byte");
  record->label = static_cast<Label>(label);
  if (header_.has_images) {
    const int n = static_cast<int>(header_.resolution);
    std::vector<float> pixels(n * n);
    for (float& v : pixels) {
      v = GetFloat(p);
      p += 4;
    }
    record->image.emplace(n, std::move(pixels));
  } else {
    record->image.reset();
  }
  ++next_;
  return true;
}

std::vector<ShardRecord> ReadShard(const std::filesystem::path& path) {
  ShardReader reader(path);
  std::vector<ShardRecord> records;
  records.reserve(reader.header().record_count);
  ShardRecord record;
  while (reader.Next(&record)) records.push_back(record);
  return records;
}

Sample RegenerateRecord(const ShardHeader& header, uint64_t r) {
  return GenerateSample(header.curve_config(),
                        SampleKey{header.seed, header.first_index + r});
}

GeneratedDataset::GeneratedDataset(CurveConfig curve, int resolution,
                                   uint64_t seed, uint64_t first_index,
                                   size_t count, int workers)
    : curve_(std::move(curve)),
      resolution_(resolution),
      seed_(seed),
      first_index_(first_index),
      labels_(count) {
  ParallelFor(0, count, workers, [&](size_t i) {
    labels_[i] = GenerateSample(curve_, SampleKey{seed_, first_index_ + i}).label;
  });
}

void GeneratedDataset::FillImage(size_t i, float* out) const {
  const Image image =
      RenderLatent(SampleLatent(curve_, SampleKey{seed_, first_index_ + i}),
                   curve_, resolution_);
  std::copy(image.pixels().begin(), image.pixels().end(), out);
}

Sample GeneratedDataset::sample(size_t i) const {
  Sample s = GenerateSample(curve_, SampleKey{seed_, first_index_ + i});
  return s;
}

ShardDataset::ShardDataset(const std::vector<std::filesystem::path>& paths) {
  for (const auto& path : paths) {
    ShardReader reader(path);
    const ShardHeader& h = reader.header();
    if (resolution_ == 0) resolution_ = static_cast<int>(h.resolution);
    if (static_cast<int>(h.resolution) != resolution_) {
      throw Error(ErrorCode::kInvalidInput,
                  path.string() + ": shards disagree on resolution");
    }
    if (!headers_.empty() && !(h.curve_config() == headers_.front().curve_config())) {
      throw Error(ErrorCode::kInvalidInput,
                  path.string() + ": shards disagree on curve settings");
    }
    const int shard = static_cast<int>(headers_.size());
    headers_.push_back(h);
    ShardRecord record;
    uint64_t r = 0;
    while (reader.Next(&record)) {
      Entry e{shard, r++, record.label, -1};
      if (record.image) {
        e.image_offset = static_cast<int64_t>(images_.size());
        images_.insert(images_.end(), record.image->pixels().begin(),
                       record.image->pixels().end());
      }
      entries_.push_back(e);
    }
  }
  if (entries_.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no shard records found");
  }
}

void ShardDataset::FillImage(size_t i, float* out) const {
  const Entry& e = entries_[i];
  const size_t pixels = static_cast<size_t>(resolution_) * resolution_;
  if (e.image_offset >= 0) {
    std::copy_n(images_.begin() + e.image_offset, pixels, out);
    return;
  }
  const ShardHeader& h = headers_[e.shard];
  const Sample s = RegenerateRecord(h, e.record);
  const Image image = RenderLatent(s.latent, h.curve_config(), resolution_);
  std::copy(image.pixels().begin(), image.pixels().end(), out);
}

Sample ShardDataset::sample(size_t i) const {
  const Entry& e = entries_[i];
  return RegenerateRecord(headers_[e.shard], e.record);
}

}  // namespace squiggles
