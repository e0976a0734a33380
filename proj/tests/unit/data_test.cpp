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


#include <cmath>
#include <cstring>
#include <filesystem>
#include <vector>

#include "pcsa/data/dataset.hpp"
#include "pcsa/data/volume_io.hpp"
#include "pcsa/metrics/metrics.hpp"
#include "test_util.hpp"

namespace pcsa::data {
namespace {

using pcsa::testing::random_volume;
using pcsa::testing::read_file;
using pcsa::testing::TempDir;
using pcsa::testing::write_file;

void expect_unit_range(const Volume<float>& v, bool touches_ends = true) {
  float lo = 1.0f, hi = 0.0f;
  for (float x : v.data()) {
    ASSERT_GE(x, 0.0f);
    ASSERT_LE(x, 1.0f);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (touches_ends) {
    EXPECT_EQ(lo, 0.0f);
    EXPECT_EQ(hi, 1.0f);
  }
}

VolumeIoErrc decode_error(const std::string& bytes) {
  try {
    decode_volume(bytes);
  } catch (const VolumeIoError& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return VolumeIoErrc::kIo;
}

TEST(MinmaxNormalize, ClosedForms) {
  const auto n = minmax_normalize(Volume<float>({1, 1, 1, 1, 2}, std::vector<float>{2, 4}));
  EXPECT_FALSE(n.degenerate);
  EXPECT_EQ(n.volume, (Volume<float>({1, 1, 1, 1, 2}, std::vector<float>{0, 1})));
  const auto c = minmax_normalize(Volume<float>({1, 1, 2, 2, 2}, 0.7f));
  EXPECT_TRUE(c.degenerate);
  for (float v : c.volume.data()) EXPECT_EQ(v, 0.0f);
}

TEST(MinmaxNormalize, AffineInvariant) {
  const auto x = random_volume<float>({1, 1, 4, 4, 4}, 1, -3, 5);
  Volume<float> y = x;
  for (float& v : y.data()) v = 2.5f * v + 1.0f;
  const auto a = minmax_normalize(x).volume, b = minmax_normalize(y).volume;
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-5);
}

TEST(GenSource, DeterministicAndNormalised) {
  const SyntheticSpec spec;
  for (std::uint64_t seed : {0ull, 1ull, 1234567ull}) {
    const auto a = gen_source(spec, seed);
    EXPECT_EQ(a, gen_source(spec, seed));
    EXPECT_EQ(a.shape(), (Shape{1, 1, 16, 16, 16}));
    expect_unit_range(a);
  }
  EXPECT_NE(gen_source(spec, 1), gen_source(spec, 2));
  SyntheticSpec other = spec;
  other.seed = 99;
  EXPECT_EQ(gen_source(other, 5), gen_source(spec, 5));
}

TEST(GenSource, ZeroBlobsIsDegenerateZero) {
  SyntheticSpec spec;
  spec.blob_count_range = {0, 0};
  spec.cavity_count = 1;
  const auto v = gen_source(spec, 3);
  for (float x : v.data()) EXPECT_EQ(x, 0.0f);
}

TEST(SyntheticSpec, Validation) {
  SyntheticSpec spec;
  spec.edge = 12;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = {};
  spec.blob_count_range = {5, 2};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = {};
  spec.blob_sigma_range = {0.0, 1.0};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(ModalityTransform, ImpulseGivesEqualBox) {
  Volume<float> s({1, 1, 8, 8, 8});
  s.at(0, 0, 3, 4, 5) = 1.0f;
  const auto t = modality_transform(s);
  std::size_t ones = 0;
  for (std::size_t d = 0; d < 8; ++d)
    for (std::size_t h = 0; h < 8; ++h)
      for (std::size_t w = 0; w < 8; ++w) {
        const bool inside = d >= 2 && d <= 4 && h >= 3 && h <= 5 && w >= 4 && w <= 6;
        const float v = t.at(0, 0, d, h, w);
        if (inside) {
          EXPECT_FLOAT_EQ(v, 1.0f);
          ++ones;
        } else {
          EXPECT_EQ(v, 0.0f);
        }
      }
  EXPECT_EQ(ones, 27u);
}

TEST(ModalityTransform, ConstantIsDegenerate) {
  const auto t = modality_transform(Volume<float>({1, 1, 8, 8, 8}, 0.4f));
  for (float v : t.data()) EXPECT_EQ(v, 0.0f);
}

TEST(ModalityTransform, PreservesOrderOnRamps) {
  Volume<float> s({1, 1, 8, 8, 8});
  for (std::size_t d = 0; d < 8; ++d)
    for (std::size_t h = 0; h < 8; ++h)
      for (std::size_t w = 0; w < 8; ++w) s.at(0, 0, d, h, w) = static_cast<float>(w) / 7.0f;
  const auto t = modality_transform(s);
  for (std::size_t d = 1; d < 7; ++d)
    for (std::size_t h = 1; h < 7; ++h)
      for (std::size_t w = 1; w + 2 < 7; ++w) EXPECT_LT(t.at(0, 0, d, h, w), t.at(0, 0, d, h, w + 1));
}

TEST(ModalityTransform, IsNotTheIdentity) {
  const SyntheticSpec spec;
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = make_pair(spec, seed);
    expect_unit_range(p.target, false);
    total += metrics::mae(p.source, p.target);
  }
  EXPECT_GT(total / 100.0, 0.02);
}

TEST(VolumeIo, RoundTripIsBitExact) {
  TempDir dir("io");
  const auto v = random_volume<float>({2, 3, 4, 5, 6}, 7, -1e6, 1e6);
  write_volume(dir / "v.vol", v, kSourceModality, 42);
  const auto f = read_volume(dir / "v.vol");
  EXPECT_EQ(f.volume, v);
  EXPECT_EQ(f.header, (VolumeHeader{v.shape(), kDtypeF32, std::string(kSourceModality), 42}));
  EXPECT_EQ(std::filesystem::file_size(dir / "v.vol"), kVolumeHeaderBytes + v.size() * 4);
  const std::string bytes = encode_volume(v, kTargetModality, 3);
  EXPECT_EQ(bytes.substr(0, 8), "PCSAVOL1");
  EXPECT_EQ(encode_volume(decode_volume(bytes).volume, kTargetModality, 3), bytes);
}

TEST(VolumeIo, HeaderIsLittleEndian) {
  const std::string bytes = encode_volume(Volume<float>({1, 1, 2, 3, 4}, 1.0f), "x", 0x0102030405060708ull);
  const unsigned char* u = reinterpret_cast<const unsigned char*>(bytes.data());
  EXPECT_EQ(u[8], 1u);    // N
  EXPECT_EQ(u[20], 3u);   // H
  EXPECT_EQ(u[28], 1u);   // dtype
  EXPECT_EQ(u[32], 'x');  // modality
  EXPECT_EQ(u[48], 0x08u);
  EXPECT_EQ(u[55], 0x01u);
  float first;
  std::memcpy(&first, bytes.data() + kVolumeHeaderBytes, 4);
  EXPECT_EQ(first, 1.0f);
}

TEST(VolumeIo, CorruptFilesAreClassified) {
  const std::string good = encode_volume(random_volume<float>({1, 1, 2, 2, 2}, 8), "m", 1);
  std::string magic = good;
  magic[0] = 'X';
  EXPECT_EQ(decode_error(magic), VolumeIoErrc::kBadMagic);
  EXPECT_EQ(decode_error(good.substr(0, 30)), VolumeIoErrc::kTruncatedHeader);
  EXPECT_EQ(decode_error(good.substr(0, good.size() - 1)), VolumeIoErrc::kTruncatedPayload);
  EXPECT_EQ(decode_error(good + "abcd"), VolumeIoErrc::kPayloadMismatch);
  std::string dtype = good;
  dtype[28] = 2;
  EXPECT_EQ(decode_error(dtype), VolumeIoErrc::kBadDtype);
  std::string dims = good;
  std::memset(dims.data() + 12, 0, 4);
  EXPECT_EQ(decode_error(dims), VolumeIoErrc::kBadHeader);
  EXPECT_THROW(encode_volume(Volume<float>({1, 1, 1, 1, 1}), "a-modality-tag-that-is-too-long", 0), VolumeIoError);

  TempDir dir("io_bad");
  write_file(dir / "bad.vol", magic);
  try {
    read_volume(dir / "bad.vol");
    FAIL();
  } catch (const VolumeIoError& e) {
    EXPECT_EQ(e.code(), VolumeIoErrc::kBadMagic);
    EXPECT_NE(std::string(e.what()).find("bad.vol"), std::string::npos);
  }
  try {
    read_volume(dir / "missing.vol");
    FAIL();
  } catch (const VolumeIoError& e) {
    EXPECT_EQ(e.code(), VolumeIoErrc::kIo);
  }
}

TEST(DatasetManifest, CountsAndOverlap) {
  const auto m = DatasetManifest::from_counts(SyntheticSpec{}, 10, 2, 2, 500);
  EXPECT_EQ(m.pair_count(), 14u);
  EXPECT_EQ(m.splits.at("train").front(), 500u);
  EXPECT_EQ(m.splits.at("val").front(), 510u);
  EXPECT_EQ(m.splits.at("test").back(), 513u);
  EXPECT_NO_THROW(m.validate());
  DatasetManifest overlap = m;
  overlap.splits["test"].push_back(503);
  EXPECT_THROW(overlap.validate(), OverlappingSplitError);
  DatasetManifest dup = m;
  dup.splits["val"].push_back(510);
  EXPECT_THROW(dup.validate(), OverlappingSplitError);
}

TEST(DatasetManifest, JsonRoundTrip) {
  SyntheticSpec spec;
  spec.edge = 24;
  spec.blob_sigma_range = {1.25, 3.5};
  auto m = DatasetManifest::from_counts(spec, 3, 1, 2, 77);
  m.splits["holdout"] = {1000, 1001};
  EXPECT_EQ(DatasetManifest::from_json(m.to_json()), m);
  EXPECT_THROW(DatasetManifest::from_json("{not json"), ConfigError);
  EXPECT_THROW(DatasetManifest::from_json(R"({"format":"other"})"), ConfigError);
}

TEST(BuildDataset, MaterialisesEveryPair) {
  TempDir dir("ds");
  const auto m = DatasetManifest::from_counts(SyntheticSpec{}, 10, 2, 2, 1000);
  build_dataset(m, dir.path());
  std::size_t volumes = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path())) {
    if (e.path().extension() == ".vol") ++volumes;
  }
  EXPECT_EQ(volumes, 28u);
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));

  const auto ds = Dataset::open(dir.path());
  EXPECT_EQ(ds.manifest(), m);
  const auto val = ds.load_split("val");
  ASSERT_EQ(val.size(), 2u);
  const auto expect = make_pair(m.spec, 1010);
  EXPECT_EQ(val[0].source, expect.source);
  EXPECT_EQ(val[0].target, expect.target);
  EXPECT_EQ(val[0].seed, 1010u);
  EXPECT_EQ(read_volume(source_path(dir.path(), "val", 1010)).header.modality, kSourceModality);
  EXPECT_EQ(read_volume(target_path(dir.path(), "val", 1010)).header.modality, kTargetModality);
  EXPECT_THROW(ds.seeds("holdout"), std::out_of_range);
}

TEST(BuildDataset, RebuildIsBitIdentical) {
  TempDir a("ds_a"), b("ds_b");
  const auto m = DatasetManifest::from_counts(SyntheticSpec{}, 3, 1, 1, 20);
  build_dataset(m, a.path());
  build_dataset(m, b.path());
  for (const auto& e : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), a.path());
    EXPECT_EQ(read_file(e.path()), read_file(b.path() / rel)) << rel;
  }
}

TEST(BuildDataset, RejectsOverlappingSplits) {
  TempDir dir("ds_overlap");
  auto m = DatasetManifest::from_counts(SyntheticSpec{}, 2, 0, 1, 0);
  m.splits["test"] = {1};
  EXPECT_THROW(build_dataset(m, dir.path()), OverlappingSplitError);
}

}  // namespace
}  // namespace pcsa::data
