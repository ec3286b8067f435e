// Copyright 2026 The uwtwin Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <cstring>
#include <random>

#include "generators.hpp"
#include "uwtwin/base64.hpp"
#include "uwtwin/messages.hpp"

namespace uwtwin {
namespace {

TEST(Messages, RoundTripRandomEnvelopes) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Envelope e = testgen::random_envelope(rng);
    const std::string bytes = encode(e);
    EXPECT_EQ(decode(bytes), e) << "iteration " << i;
  }
}

TEST(Messages, LengthPrefixIsLittleEndianBodySize) {
  const auto bytes = encode(make_envelope("cmd/wrench", 3, Timestamp{5}, Wrench{}));
  ASSERT_GT(bytes.size(), 4U);
  const std::uint32_t len = static_cast<std::uint8_t>(bytes[0]) | static_cast<std::uint8_t>(bytes[1]) << 8 |
                            static_cast<std::uint8_t>(bytes[2]) << 16 | static_cast<std::uint8_t>(bytes[3]) << 24;
  EXPECT_EQ(len, bytes.size() - 4);
  const auto body = nlohmann::json::parse(bytes.substr(4));
  EXPECT_EQ(body.at("topic"), "cmd/wrench");
  EXPECT_EQ(body.at("msg_type"), "WRENCH");
  EXPECT_EQ(body.at("seq"), 3);
  EXPECT_EQ(body.at("stamp_ns"), 5);
  EXPECT_TRUE(body.contains("payload"));
}

TEST(Messages, ThreeBytesNeedMoreData) {
  const std::string three("\x05\x00\x00", 3);
  EXPECT_THROW(decode(three), NeedMoreData);
}

TEST(Messages, TruncatedBodyNeedsMoreData) {
  auto bytes = encode(make_envelope("a", 0, Timestamp{0}, Pose{}));
  bytes.pop_back();
  EXPECT_THROW(decode(bytes), NeedMoreData);
}

TEST(Messages, PoseFrameWithWrenchPayloadIsDecodeError) {
  auto body = envelope_to_json(make_envelope("sim/pose", 0, Timestamp{0}, Wrench{}));
  body["msg_type"] = "POSE";
  EXPECT_THROW(decode(frame_json(body.dump())), DecodeError);
}

TEST(Messages, DecodeErrorCarriesOffset) {
  const std::string bad = frame_json("{\"topic\": \"x\", oops}");
  try {
    decode(bad);
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_GE(e.offset(), 4U);
    EXPECT_LT(e.offset(), bad.size());
  }
}

TEST(Messages, NonFiniteIsEncodeError) {
  Pose p;
  p.position.x() = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(encode(make_envelope("sim/pose", 0, Timestamp{0}, p)), EncodeError);
  Wrench w;
  w.torque.z() = std::numeric_limits<double>::infinity();
  EXPECT_THROW(encode(make_envelope("cmd/wrench", 0, Timestamp{0}, w)), EncodeError);
}

TEST(Messages, CloudPayloadIsBase64Float32) {
  PointCloud c;
  c.points = {{1.0F, 2.0F, 3.0F}, {-0.5F, 0.25F, 1e-3F}};
  const auto j = payload_to_json(c);
  EXPECT_EQ(j.at("n"), 2);
  const auto raw = base64::decode(j.at("data").get<std::string>());
  ASSERT_TRUE(raw.has_value());
  ASSERT_EQ(raw->size(), 24U);
  float expect[6] = {1.0F, 2.0F, 3.0F, -0.5F, 0.25F, 1e-3F};
  for (int i = 0; i < 6; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>((*raw)[i * 4 + b]) << (8 * b);
    float f;
    std::memcpy(&f, &bits, 4);
    EXPECT_EQ(f, expect[i]);
  }
}

TEST(Messages, StreamDecoderConsumesOneFrameAtATime) {
  const auto a = make_envelope("a", 1, Timestamp{1}, Wrench{});
  const auto b = make_envelope("b", 2, Timestamp{2}, Pose{});
  const std::string stream = encode(a) + encode(b);
  std::vector<std::uint8_t> buf(stream.begin(), stream.end());
  std::size_t used = 0;
  auto first = try_decode_frame(std::span<const std::uint8_t>(buf.data(), 3), used);
  EXPECT_FALSE(first.has_value());
  EXPECT_EQ(used, 0U);
  first = try_decode_frame(buf, used);
  ASSERT_TRUE(first);
  EXPECT_EQ(*first, a);
  std::size_t used2 = 0;
  auto second = try_decode_frame(std::span<const std::uint8_t>(buf).subspan(used), used2);
  ASSERT_TRUE(second);
  EXPECT_EQ(*second, b);
  EXPECT_EQ(used + used2, buf.size());
}

TEST(Messages, WrenchClampPerComponent) {
  Wrench w;
  w.force = Vec3(80.0, -60.0, 10.0);
  w.torque = Vec3(-9.0, 2.0, 5.5);
  const auto c = w.clamped(WrenchLimits{});
  EXPECT_EQ(c.force, Vec3(50.0, -50.0, 10.0));
  EXPECT_EQ(c.torque, Vec3(-5.0, 2.0, 5.0));
}

TEST(Base64, KnownVectors) {
  auto enc = [](std::string s) {
    return base64::encode(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
  EXPECT_FALSE(base64::decode("Zm9").has_value());
  EXPECT_FALSE(base64::decode("Zm9*").has_value());
}

}  // namespace
}  // namespace uwtwin
