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

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "pcsa/tensor/volume.hpp"

namespace pcsa::data {

/// Volume file layout (all integers little-endian):
///   char[8]  magic "PCSAVOL1"
///   u32[5]   dims N, C, D, H, W
///   u32      dtype (1 = f32 little-endian)
///   char[16] modality, NUL padded
///   u64      seed
///   f32[]    payload, N*C*D*H*W values in row-major order
inline constexpr std::size_t kVolumeHeaderBytes = 56;
inline constexpr std::uint32_t kDtypeF32 = 1;

struct VolumeHeader {
  Shape shape;
  std::uint32_t dtype = kDtypeF32;
  std::string modality;
  std::uint64_t seed = 0;
  bool operator==(const VolumeHeader&) const = default;
};

enum class VolumeIoErrc { kIo, kBadMagic, kTruncatedHeader, kTruncatedPayload, kPayloadMismatch, kBadDtype, kBadHeader };

std::string_view to_string(VolumeIoErrc code);

class VolumeIoError : public std::runtime_error {
 public:
  VolumeIoError(VolumeIoErrc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  VolumeIoErrc code() const { return code_; }

 private:
  VolumeIoErrc code_;
};

struct VolumeFile {
  VolumeHeader header;
  Volume<float> volume;
};

/// Writes header and payload; the header shape is taken from `v`.
void write_volume(const std::filesystem::path& path, const Volume<float>& v, std::string_view modality,
                  std::uint64_t seed);
VolumeFile read_volume(const std::filesystem::path& path);

std::string encode_volume(const Volume<float>& v, std::string_view modality, std::uint64_t seed);
VolumeFile decode_volume(std::string_view bytes);

}  // namespace pcsa::data
