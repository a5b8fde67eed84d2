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

#include "segmetrics/io.hpp"

#include <png.h>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace segmetrics {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t off) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[off + b]) << (8 * b);
  return v;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

// libpng callbacks. Errors longjmp back into the decode/encode frame, which
// then converts them into exceptions after releasing the png structs.
struct PngSource {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->pos + n > src->data.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->data.data() + src->pos, n);
  src->pos += n;
}

void png_write_cb(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_cb(png_structp) {}

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<char*>(png_get_error_ptr(png));
  std::strncpy(buf, msg, 255);
  buf[255] = '\0';
  longjmp(png_jmpbuf(png), 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

bool has_prefix(std::span<const std::uint8_t> bytes, const void* prefix, std::size_t n) {
  return bytes.size() >= n && std::memcmp(bytes.data(), prefix, n) == 0;
}

}  // namespace

std::vector<std::uint8_t> encode_raw(const Grid& grid, std::uint32_t bit_depth) {
  if (bit_depth != 8 && bit_depth != 16 && bit_depth != 32) {
    throw std::invalid_argument("raw bit depth must be 8, 16 or 32");
  }
  const std::uint64_t limit = bit_depth == 32 ? 0xFFFFFFFFull : (1ull << bit_depth) - 1;
  std::vector<std::uint8_t> out(RawLabelHeader::kMagic, RawLabelHeader::kMagic + 8);
  put_u32(out, grid.width);
  put_u32(out, grid.height);
  put_u32(out, bit_depth);
  const std::size_t bytes = bit_depth / 8;
  out.reserve(out.size() + grid.values.size() * bytes);
  for (std::uint32_t v : grid.values) {
    if (v > limit) throw std::invalid_argument("value does not fit the bit depth");
    for (std::size_t b = 0; b < bytes; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  return out;
}

Grid decode_raw(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < RawLabelHeader::kSize || !has_prefix(bytes, RawLabelHeader::kMagic, 8)) {
    throw ParseError("raw label file: bad magic or truncated header");
  }
  Grid g;
  g.width = get_u32(bytes, 8);
  g.height = get_u32(bytes, 12);
  const std::uint32_t depth = get_u32(bytes, 16);
  if (depth != 8 && depth != 16 && depth != 32) {
    throw ParseError("raw label file: unsupported bit depth " + std::to_string(depth));
  }
  const std::size_t n = static_cast<std::size_t>(g.width) * g.height;
  const std::size_t width_bytes = depth / 8;
  if (bytes.size() - RawLabelHeader::kSize != n * width_bytes) {
    throw ParseError("raw label file: payload is " +
                     std::to_string(bytes.size() - RawLabelHeader::kSize) + " bytes, header implies " +
                     std::to_string(n * width_bytes));
  }
  g.values.resize(n);
  const std::uint8_t* p = bytes.data() + RawLabelHeader::kSize;
  for (std::size_t i = 0; i < n; ++i, p += width_bytes) {
    std::uint32_t v = 0;
    for (std::size_t b = 0; b < width_bytes; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    g.values[i] = v;
  }
  return g;
}

Grid decode_png(std::span<const std::uint8_t> bytes) {
  Grid grid;
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
  char err[256] = "unknown error";
  volatile bool multi_channel = false;
  PngSource src{bytes, 0};

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, err, png_error_cb, png_warning_cb);
  if (png == nullptr) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(std::string("invalid PNG: ") + err);
  }

  png_set_read_fn(png, &src, png_read_cb);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_PALETTE) {
    multi_channel = true;
  } else {
    // Sub-byte depths unpack to one byte per pixel without rescaling, so
    // palette indices and small class ids survive unchanged.
    if (depth < 8) png_set_packing(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    grid.width = png_get_image_width(png, info);
    grid.height = png_get_image_height(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    buffer.resize(stride * grid.height);
    rows.resize(grid.height);
    for (std::uint32_t y = 0; y < grid.height; ++y) rows[y] = buffer.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);

    grid.values.resize(static_cast<std::size_t>(grid.width) * grid.height);
    for (std::uint32_t y = 0; y < grid.height; ++y) {
      const std::uint8_t* row = rows[y];
      for (std::uint32_t x = 0; x < grid.width; ++x) {
        grid.values[static_cast<std::size_t>(y) * grid.width + x] =
            depth == 16 ? (static_cast<std::uint32_t>(row[2 * x]) << 8) | row[2 * x + 1]
                        : row[x];
      }
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (multi_channel) throw ValidationError("label maps must be single-channel");
  return grid;
}

std::vector<std::uint8_t> encode_png(const Grid& grid, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("PNG depth must be 8 or 16");
  const std::uint32_t limit = bit_depth == 8 ? 0xFF : 0xFFFF;
  for (std::uint32_t v : grid.values) {
    if (v > limit) throw std::invalid_argument("value does not fit the PNG bit depth");
  }
  const std::size_t stride = static_cast<std::size_t>(grid.width) * (bit_depth / 8);
  std::vector<std::uint8_t> buffer(stride * grid.height);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    if (bit_depth == 8) {
      buffer[i] = static_cast<std::uint8_t>(grid.values[i]);
    } else {
      buffer[2 * i] = static_cast<std::uint8_t>(grid.values[i] >> 8);
      buffer[2 * i + 1] = static_cast<std::uint8_t>(grid.values[i]);
    }
  }
  std::vector<png_bytep> rows(grid.height);
  for (std::uint32_t y = 0; y < grid.height; ++y) rows[y] = buffer.data() + y * stride;
  std::vector<std::uint8_t> out;
  char err[256] = "unknown error";

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, err, png_error_cb, png_warning_cb);
  if (png == nullptr) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(std::string("PNG encode failed: ") + err);
  }
  png_set_write_fn(png, &out, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, grid.width, grid.height, bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Grid read_grid(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  try {
    if (has_prefix(bytes, kPngSignature, 8)) return decode_png(bytes);
    if (has_prefix(bytes, RawLabelHeader::kMagic, 8)) return decode_raw(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  throw ParseError(path.string() + ": unrecognized label file format");
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

LabelMap load_label_map(const std::filesystem::path& path, ClassId num_classes,
                        std::optional<ClassId> ignore_id) {
  Grid g = read_grid(path);
  try {
    LabelMap map(g.width, g.height, std::move(g.values), ignore_id);
    map.validate(num_classes);
    return map;
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& instance_path) {
  std::filesystem::path p = instance_path;
  return p.replace_extension(".json");
}

std::map<InstanceId, ClassId> parse_sidecar(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("instance sidecar is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance sidecar: expected a JSON object");
  std::map<InstanceId, ClassId> out;
  for (const auto& [key, value] : doc.items()) {
    InstanceId id = 0;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(key, &used);
      if (used != key.size() || v == 0 || v > 0xFFFFFFFFul) throw std::invalid_argument(key);
      id = static_cast<InstanceId>(v);
    } catch (const std::exception&) {
      throw ParseError("instance sidecar: key \"" + key + "\" is not a positive instance id");
    }
    if (!value.is_number_unsigned()) {
      throw ParseError("instance sidecar: class of instance " + key + " must be a non-negative integer");
    }
    out[id] = value.get<ClassId>();
  }
  return out;
}

InstanceMap decode_panoptic(const Grid& grid, std::uint32_t divisor) {
  if (divisor == 0) throw std::invalid_argument("panoptic divisor must be > 0");
  std::vector<InstanceId> ids(grid.values.size(), 0);
  std::map<InstanceId, ClassId> classes;
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const std::uint32_t v = grid.values[i];
    if (v < divisor) continue;
    ids[i] = v;
    classes.emplace(v, v / divisor);
  }
  return InstanceMap(grid.width, grid.height, std::move(ids), std::move(classes));
}

InstanceMap load_instance_map(const std::filesystem::path& path, const InstanceEncoding& encoding) {
  Grid g = read_grid(path);
  if (const auto* pan = std::get_if<PanopticEncoding>(&encoding)) {
    return decode_panoptic(g, pan->divisor);
  }
  std::map<InstanceId, ClassId> classes;
  const bool any = std::any_of(g.values.begin(), g.values.end(), [](auto v) { return v != 0; });
  const std::filesystem::path side = sidecar_path(path);
  if (any || std::filesystem::exists(side)) {
    const auto bytes = read_file(side);
    classes = parse_sidecar(std::string(bytes.begin(), bytes.end()));
  }
  try {
    return InstanceMap(g.width, g.height, std::move(g.values), std::move(classes));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  // Keep the failure with the lowest index so the reported error does not
  // depend on scheduling.
  std::exception_ptr first;
  std::size_t first_index = n;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < first_index) {
          first = std::current_exception();
          first_index = i;
        }
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace segmetrics
