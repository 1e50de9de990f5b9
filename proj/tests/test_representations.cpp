#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>

#include "sdml/error.hpp"
#include "sdml/io.hpp"
#include "sdml/representations.hpp"
#include "test_util.hpp"

using namespace sdml;

namespace {

std::vector<double> pixel_values(const RepresentationImage& img) {
  std::vector<double> v;
  for (const auto& c : img.channels) v.insert(v.end(), c.data(), c.data() + c.size());
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<double> coordinate_values(const SkeletonSequence& s) {
  std::vector<double> v;
  for (const auto& f : s.frames) v.insert(v.end(), f.data(), f.data() + f.size());
  std::sort(v.begin(), v.end());
  return v;
}

// Distinct value per (joint, time, axis).
SkeletonSequence toy(int joints, Index frames) {
  SkeletonSequence s;
  s.topology = SkeletonTopology::chain(joints);
  for (Index t = 0; t < frames; ++t) {
    Joints f(joints, 3);
    for (int j = 0; j < joints; ++j)
      for (int a = 0; a < 3; ++a) f(j, a) = 100.0 * j + 10.0 * t + a;
    s.frames.push_back(f);
  }
  return s;
}

SkeletonSequence constant(const SkeletonTopology& topo, Index frames, double value) {
  SkeletonSequence s;
  s.topology = topo;
  s.frames.assign(static_cast<std::size_t>(frames), Joints::Constant(topo.joint_count(), 3, value));
  return s;
}

EncoderConfig with_kind(EncoderKind kind, Index length = 30) {
  EncoderConfig cfg;
  cfg.kind = kind;
  cfg.target_length = length;
  return cfg;
}

}  // namespace

TEST_SUITE("representations") {

TEST_CASE("encoder names round trip") {
  for (auto k : {EncoderKind::SkeletonDml, EncoderKind::SlDml, EncoderKind::Tssi,
                 EncoderKind::SkeleMotionMagnitude, EncoderKind::SkeleMotionOrientation,
                 EncoderKind::Skepxel})
    CHECK(encoder_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(encoder_kind_from_string("gimme"), Error);
}

TEST_CASE("zero sequence encodes to a constant 0.5 image") {
  const auto zero = constant(SkeletonTopology::ntu25(), 17, 0.0);
  const auto img = encode_bodies({zero}, with_kind(EncoderKind::SkeletonDml, 30));
  CHECK(img.height() == 25);
  CHECK(img.width() == 30);
  for (const auto& c : img.channels) CHECK((c.array() == 0.5).all());
  const auto sl = encode_bodies({zero}, with_kind(EncoderKind::SlDml, 30));
  CHECK(sl.width() == 30);
  for (const auto& c : sl.channels) CHECK((c.array() == 0.5).all());
}

TEST_CASE("skeleton_dml layout matches the index oracle") {
  const auto s = toy(2, 6);
  const auto img = encode_skeleton_dml(s, {});
  REQUIRE(img.height() == 2);
  REQUIRE(img.width() == 6);
  // block width 2: axis a of joint j at time t sits at column 2a + t/3, channel t%3
  int hits = 0;
  for (int j = 0; j < 2; ++j)
    for (int t = 0; t < 6; ++t)
      for (int a = 0; a < 3; ++a) {
        CHECK(img(j, 2 * a + t / 3, t % 3) == s.frames[t](j, a));
        ++hits;
      }
  CHECK(hits == 36);
  CHECK(pixel_values(img) == coordinate_values(s));
}

TEST_CASE("skeleton_dml block geometry for NTU length 90") {
  std::mt19937_64 rng(3);
  const auto s = test::random_sequence(rng, 90, SkeletonTopology::ntu25(), 0.0, 1.0);
  const auto img = encode_skeleton_dml(s, {});
  CHECK(img.height() == 25);
  CHECK(img.width() == 90);
  for (Index t = 0; t < 90; ++t) {
    CHECK(skeleton_dml_slot(4, t, 0, 90).col < 30);
    CHECK(skeleton_dml_slot(4, t, 1, 90).col / 30 == 1);
    CHECK(skeleton_dml_slot(4, t, 2, 90).col / 30 == 2);
  }
  const auto frames = decode_skeleton_dml(img);
  CHECK(frames == s.frames);
}

TEST_CASE("skeleton_dml rejects lengths that are not multiples of 3") {
  try {
    encode_bodies({toy(2, 5)}, with_kind(EncoderKind::SkeletonDml, 31));
    FAIL("expected BadLength");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadLength);
  }
}

TEST_CASE("sl_dml channel planes") {
  const auto s = toy(2, 3);
  const auto img = encode_sl_dml(s, {});
  for (int j = 0; j < 2; ++j)
    for (int t = 0; t < 3; ++t) {
      CHECK(img(j, t, 0) == s.frames[t](j, 0));
      CHECK(img(j, t, 2) == s.frames[t](j, 2));
    }
  const auto six = toy(2, 6);
  CHECK(pixel_values(encode_sl_dml(six, {})) == pixel_values(encode_skeleton_dml(six, {})));
}

TEST_CASE("tssi on a chain backtracks") {
  const auto topo = SkeletonTopology::chain(3);
  CHECK(tssi_order(topo, 0) == std::vector<int>{0, 1, 2, 1, 0});
  const auto img = encode_tssi(constant(topo, 4, 0.25), {});
  CHECK(img.height() == 5);
  for (const auto& c : img.channels) CHECK((c.array() == 0.25).all());
}

TEST_CASE("tssi on the NTU tree is an Euler tour") {
  const auto& topo = SkeletonTopology::ntu25();
  const auto order = tssi_order(topo, tssi_root(topo));
  CHECK(tssi_root(topo) == 1);
  CHECK(order.size() == 2 * 25 - 1);
  CHECK(order.front() == 1);
  CHECK(order.back() == 1);
  for (int j = 0; j < 25; ++j) CHECK(std::count(order.begin(), order.end(), j) >= 1);
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const int a = order[i], b = order[i + 1];
    CHECK((topo.parent_of()[a] == b || topo.parent_of()[b] == a));
  }
}

TEST_CASE("skelemotion magnitude") {
  const auto& topo = SkeletonTopology::ntu25();
  const auto still = encode_skelemotion_magnitude(constant(topo, 5, 0.3), {});
  for (const auto& c : still.channels) CHECK(c.isZero(0.0));

  SkeletonSequence one;
  one.topology = SkeletonTopology::chain(1);
  Joints a = Joints::Zero(1, 3), b = Joints::Zero(1, 3);
  b(0, 0) = 1.0;
  one.frames = {a, b};
  const auto img = encode_skelemotion_magnitude(one, {});
  CHECK(img.height() == 1);
  CHECK(img.width() == 1);
  CHECK(img(0, 0, 0) == 1.0);

  std::mt19937_64 rng(5);
  const auto s = test::random_sequence(rng, 5, topo);
  const auto order = tssi_order(topo, tssi_root(topo));
  const auto m = encode_skelemotion_magnitude(s, {});
  mat oracle(static_cast<Index>(order.size()), 4);
  for (Index t = 0; t < 4; ++t)
    for (std::size_t r = 0; r < order.size(); ++r) {
      double d2 = 0;
      for (int k = 0; k < 3; ++k) {
        const double d = s.frames[t + 1](order[r], k) - s.frames[t](order[r], k);
        d2 += d * d;
      }
      oracle(static_cast<Index>(r), t) = std::sqrt(d2);
    }
  const double peak = oracle.maxCoeff();
  CHECK((m.channels[0] * peak - oracle).cwiseAbs().maxCoeff() <= 1e-12);

  SkeletonSequence short_seq = constant(topo, 1, 0.0);
  CHECK_THROWS_AS(encode_skelemotion_magnitude(short_seq, {}), Error);
}

TEST_CASE("skelemotion orientation") {
  SkeletonSequence one;
  one.topology = SkeletonTopology::chain(1);
  Joints a = Joints::Zero(1, 3), b = Joints::Zero(1, 3);
  b(0, 0) = 1.0;
  one.frames = {a, b, b};
  const auto img = encode_skelemotion_orientation(one, {});
  CHECK(img(0, 0, 0) == 0.0);
  CHECK(img(0, 0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(img(0, 0, 2) == doctest::Approx(0.5).epsilon(1e-15));
  for (int k = 0; k < 3; ++k) CHECK(img(0, 1, k) == 0.5);

  std::mt19937_64 rng(6);
  const auto& topo = SkeletonTopology::ntu25();
  const auto s = test::random_sequence(rng, 6, topo);
  const auto order = tssi_order(topo, tssi_root(topo));
  const auto o = encode_skelemotion_orientation(s, {});
  for (Index t = 0; t < 5; ++t)
    for (std::size_t r = 0; r < order.size(); ++r) {
      const Eigen::Vector3d v = (s.frames[t + 1].row(order[r]) - s.frames[t].row(order[r])).transpose();
      for (int k = 0; k < 3; ++k) {
        const double angle = std::acos(v(k) / v.norm()) / std::numbers::pi;
        CHECK(std::abs(o(static_cast<Index>(r), t, k) - angle) <= 1e-9);
      }
    }
  CHECK_THROWS_AS(encode_skelemotion_orientation(constant(topo, 1, 0.0), {}), Error);
}

TEST_CASE("skepxel geometry and tiles") {
  const auto& topo = SkeletonTopology::ntu25();
  EncoderConfig cfg;
  JointPermutation identity(25);
  std::iota(identity.begin(), identity.end(), 0);
  cfg.skepxel_permutations = {identity};
  const auto img = encode_skepxel(constant(topo, 4, 0.7), cfg);
  CHECK(img.height() == 5);
  CHECK(img.width() == 20);
  for (const auto& c : img.channels) CHECK((c.array() == 0.7).all());

  cfg.skepxel_permutations.clear();
  cfg.skepxel_count = 2;
  cfg.skepxel_seed = 9;
  std::mt19937_64 rng(8);
  const auto s = test::random_sequence(rng, 1, topo);
  const auto two = encode_skepxel(s, cfg);
  CHECK(two.height() == 10);
  CHECK(two.width() == 5);
  for (int k = 0; k < 2; ++k)
    for (int a = 0; a < 3; ++a) {
      std::vector<double> tile, joints;
      for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) tile.push_back(two(5 * k + r, c, a));
      for (int j = 0; j < 25; ++j) joints.push_back(s.frames[0](j, a));
      std::sort(tile.begin(), tile.end());
      std::sort(joints.begin(), joints.end());
      CHECK(tile == joints);
    }
  CHECK_THROWS_AS(encode_skepxel(toy(3, 2), cfg), Error);
}

TEST_CASE("encoders map [0,1] into [0,1] deterministically") {
  std::mt19937_64 rng(10);
  const auto s = test::random_sequence(rng, 30, SkeletonTopology::ntu25(), 0.0, 1.0);
  for (auto k : {EncoderKind::SkeletonDml, EncoderKind::SlDml, EncoderKind::Tssi,
                 EncoderKind::SkeleMotionMagnitude, EncoderKind::SkeleMotionOrientation,
                 EncoderKind::Skepxel}) {
    const auto cfg = with_kind(k);
    const auto a = encode(s, cfg);
    const auto b = encode(s, cfg);
    CHECK(a == b);
    for (const auto& c : a.channels) {
      CHECK(c.minCoeff() >= 0.0);
      CHECK(c.maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("stacked body fusion") {
  std::mt19937_64 rng(11);
  const auto a = test::random_sequence(rng, 12, SkeletonTopology::ntu25());
  auto cfg = with_kind(EncoderKind::SkeletonDml, 12);
  cfg.body_fusion = BodyFusion::StackHeightwise;
  const auto img = encode_bodies({a}, cfg);
  CHECK(img.height() == 50);
  CHECK((img.channels[0].bottomRows(25).array() == 0.5).all());
}

TEST_CASE("png writer") {
  const auto dir = std::filesystem::temp_directory_path() / "sdml_png_test";
  std::filesystem::create_directories(dir);
  RepresentationImage unit(2, 6, 0.5);
  write_png(unit, dir / "a.png");
  const std::string bytes = read_file(dir / "a.png");
  CHECK(bytes.substr(1, 3) == "PNG");
  std::filesystem::remove_all(dir);
}

}
