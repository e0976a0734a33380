/*
 * Copyright 2026 The PCSA Authors
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

#include "pcsa/data/volume_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pcsa::data {

namespace {

constexpr std::string_view kMagic = "PCSAVOL1";
constexpr std::size_t kModalityBytes = 16;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}
std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

}  // namespace

std::string_view to_string(VolumeIoErrc code) {
  switch (code) {
    case VolumeIoErrc::kIo: return "Io";
    case VolumeIoErrc::kBadMagic: return "BadMagic";
    case VolumeIoErrc::kTruncatedHeader: return "TruncatedHeader";
    case VolumeIoErrc::kTruncatedPayload: return "TruncatedPayload";
    case VolumeIoErrc::kPayloadMismatch: return "PayloadMismatch";
    case VolumeIoErrc::kBadDtype: return "BadDtype";
    case VolumeIoErrc::kBadHeader: return "BadHeader";
  }
  return "Unknown";
}

std::string encode_volume(const Volume<float>& v, std::string_view modality, std::uint64_t seed) {
  if (modality.size() > kModalityBytes) {
    throw VolumeIoError(VolumeIoErrc::kBadHeader, "modality tag longer than 16 bytes");
  }
  std::string out;
  out.reserve(kVolumeHeaderBytes + 4 * v.size());
  out.append(kMagic);
  for (std::size_t d : v.shape().dims()) {
    if (d > 0xFFFFFFFFull) throw VolumeIoError(VolumeIoErrc::kBadHeader, "dimension exceeds u32");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  put_u32(out, kDtypeF32);
  out.append(modality);
  out.append(kModalityBytes - modality.size(), '\0');
  put_u64(out, seed);
  for (float f : v.data()) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

VolumeFile decode_volume(std::string_view bytes) {
  const std::size_t magic_len = std::min(bytes.size(), kMagic.size());
  if (bytes.substr(0, magic_len) != kMagic.substr(0, magic_len)) {
    throw VolumeIoError(VolumeIoErrc::kBadMagic, "file does not start with PCSAVOL1");
  }
  if (bytes.size() < kVolumeHeaderBytes) {
    throw VolumeIoError(VolumeIoErrc::kTruncatedHeader,
                        "header needs 56 bytes, file has " + std::to_string(bytes.size()));
  }
  const char* p = bytes.data() + kMagic.size();
  std::array<std::size_t, 5> dims{};
  for (auto& d : dims) {
    d = get_u32(p);
    p += 4;
  }
  VolumeFile file;
  file.header.dtype = get_u32(p);
  p += 4;
  if (file.header.dtype != kDtypeF32) {
    throw VolumeIoError(VolumeIoErrc::kBadDtype, "unsupported dtype " + std::to_string(file.header.dtype));
  }
  std::string_view tag(p, kModalityBytes);
  file.header.modality = std::string(tag.substr(0, tag.find('\0')));
  p += kModalityBytes;
  file.header.seed = get_u64(p);
  file.header.shape = Shape::from_dims(dims);
  if (!file.header.shape.valid()) {
    throw VolumeIoError(VolumeIoErrc::kBadHeader, "invalid dims " + file.header.shape.str());
  }
  const std::size_t expected = 4 * file.header.shape.numel();
  const std::size_t payload = bytes.size() - kVolumeHeaderBytes;
  if (payload < expected) {
    throw VolumeIoError(VolumeIoErrc::kTruncatedPayload, "payload has " + std::to_string(payload) +
                                                             " bytes, dims need " + std::to_string(expected));
  }
  if (payload > expected) {
    throw VolumeIoError(VolumeIoErrc::kPayloadMismatch, "payload has " + std::to_string(payload) +
                                                            " bytes, dims need " + std::to_string(expected));
  }
  std::vector<float> values(file.header.shape.numel());
  const char* q = bytes.data() + kVolumeHeaderBytes;
  for (auto& f : values) {
    f = std::bit_cast<float>(get_u32(q));
    q += 4;
  }
  file.volume = Volume<float>(file.header.shape, std::move(values));
  return file;
}

void write_volume(const std::filesystem::path& path, const Volume<float>& v, std::string_view modality,
                  std::uint64_t seed) {
  const std::string bytes = encode_volume(v, modality, seed);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw VolumeIoError(VolumeIoErrc::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw VolumeIoError(VolumeIoErrc::kIo, "write failed: " + path.string());
}

VolumeFile read_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VolumeIoError(VolumeIoErrc::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return decode_volume(buf.str());
  } catch (const VolumeIoError& e) {
    throw VolumeIoError(e.code(), path.string() + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
  }
}

}  // namespace pcsa::data
