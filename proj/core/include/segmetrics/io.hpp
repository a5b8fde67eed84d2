// Copyright 2026 The segmetrics Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "segmetrics/manifest.hpp"
#include "segmetrics/types.hpp"

namespace segmetrics {

/// Raw label file: 20-byte header followed by width * height little-endian
/// values of bit_depth / 8 bytes each.
///
///   offset 0   "SEGLBL01"
///   offset 8   width      u32 LE
///   offset 12  height     u32 LE
///   offset 16  bit_depth  u32 LE (8, 16 or 32)
///   offset 20  payload
struct RawLabelHeader {
  static constexpr char kMagic[9] = "SEGLBL01";
  static constexpr std::size_t kSize = 20;

  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t bit_depth = 8;
};

/// Single-channel grid of unsigned values as stored on disk.
struct Grid {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint32_t> values;

  friend bool operator==(const Grid&, const Grid&) = default;
};

std::vector<std::uint8_t> encode_raw(const Grid& grid, std::uint32_t bit_depth);
// Throws ParseError on a bad magic, depth or payload length.
Grid decode_raw(std::span<const std::uint8_t> bytes);

// Grayscale (8/16-bit) or palette PNG; palette entries are read as indices.
// Throws ValidationError("label maps must be single-channel") for colour PNGs.
Grid decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Grid& grid, int bit_depth);

// Dispatches on the file signature (PNG or raw). Throws IoError when the file
// cannot be read.
Grid read_grid(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

LabelMap load_label_map(const std::filesystem::path& path, ClassId num_classes,
                        std::optional<ClassId> ignore_id = kDefaultIgnoreId);

// `<stem>.json` next to the instance grid.
std::filesystem::path sidecar_path(const std::filesystem::path& instance_path);
std::map<InstanceId, ClassId> parse_sidecar(const std::string& json_text);

InstanceMap load_instance_map(const std::filesystem::path& path,
                              const InstanceEncoding& encoding = SidecarEncoding{});
InstanceMap decode_panoptic(const Grid& grid, std::uint32_t divisor);

/// Runs fn(0..n-1) on up to `jobs` worker threads. If tasks throw, the exception of
/// the lowest failing index is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace segmetrics
