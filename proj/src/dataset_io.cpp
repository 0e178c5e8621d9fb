/**
 * Copyright 2026 The PoisonBench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <bit>
#include <fstream>
#include <iterator>

#include "poisonbench/data.hpp"
#include "poisonbench/errors.hpp"

namespace poisonbench::data {

namespace {

constexpr char kMagic[4] = {'P', 'S', 'B', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 2 + 2 + 2;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void need(std::size_t n, const std::string& what) const {
    if (remaining() < n)
      throw FormatError(what + ": expected " + std::to_string(n) + " bytes, got " + std::to_string(remaining()),
                        pos_);
  }
  std::uint8_t u8() { return bytes_[pos_++]; }
  std::uint16_t u16() {
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  if (ds.width <= 0 || ds.width > 0xffff || ds.height <= 0 || ds.height > 0xffff)
    throw ShapeError("image dimensions must fit in u16");
  if (ds.class_count < 0 || ds.class_count > 0xffff) throw ShapeError("class_count must fit in u16");
  const auto pixels = static_cast<std::size_t>(ds.width) * ds.height;
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + ds.size() * (3 + 4 * pixels));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(ds.size()));
  put_u16(out, static_cast<std::uint16_t>(ds.width));
  put_u16(out, static_cast<std::uint16_t>(ds.height));
  put_u16(out, static_cast<std::uint16_t>(ds.class_count));
  for (const auto& inst : ds.instances) {
    if (inst.pixels.size() != pixels) throw ShapeError("instance pixel count does not match dataset");
    put_u16(out, inst.label);
    out.push_back(inst.poisoned ? 1 : 0);
    for (float p : inst.pixels) put_u32(out, std::bit_cast<std::uint32_t>(p));
  }
  return out;
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  for (char c : kMagic)
    if (r.u8() != static_cast<std::uint8_t>(c)) throw FormatError("bad magic, expected \"PSB1\"", 0);
  r.need(kHeaderBytes - 4, "header");
  const std::uint32_t count = r.u32();
  Dataset ds;
  ds.width = r.u16();
  ds.height = r.u16();
  ds.class_count = r.u16();
  if (ds.width == 0 || ds.height == 0) throw FormatError("zero image dimension", 8);
  const auto pixels = static_cast<std::size_t>(ds.width) * ds.height;
  const std::size_t record = 3 + 4 * pixels;
  ds.instances.reserve(std::min<std::size_t>(count, r.remaining() / record + 1));
  for (std::uint32_t i = 0; i < count; ++i) {
    r.need(record, "instance " + std::to_string(i));
    Instance inst;
    const std::size_t at = r.offset();
    inst.label = r.u16();
    const std::uint8_t flag = r.u8();
    if (flag > 1) throw FormatError("poisoned flag must be 0 or 1", at + 2);
    if (ds.class_count > 0 && inst.label >= ds.class_count)
      throw FormatError("label " + std::to_string(inst.label) + " >= class_count", at);
    inst.poisoned = flag == 1;
    inst.pixels.resize(pixels);
    for (auto& p : inst.pixels) p = std::bit_cast<float>(r.u32());
    ds.instances.push_back(std::move(inst));
  }
  if (r.remaining() != 0)
    throw FormatError(std::to_string(r.remaining()) + " trailing bytes after last instance", r.offset());
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) { write_file(path, encode_dataset(ds)); }

Dataset load_dataset(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  Dataset ds = decode_dataset(bytes);
  if (ds.class_count == 0) throw FormatError("class_count is 0 (patch file?)", 12);
  return ds;
}

void save_patch(const Image& patch, const std::filesystem::path& path) {
  Dataset ds{{Instance{patch.pixels, 0, false}}, 0, patch.width, patch.height};
  write_file(path, encode_dataset(ds));
}

Image load_patch(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  Dataset ds = decode_dataset(bytes);
  if (ds.size() != 1) throw FormatError("patch file must hold exactly one image", 4);
  for (float p : ds.instances.front().pixels)
    if (!(p >= 0.0f && p <= 1.0f)) throw FormatError("patch pixel outside [0,1]", kHeaderBytes + 3);
  return Image{ds.width, ds.height, std::move(ds.instances.front().pixels)};
}

}  // namespace poisonbench::data
