#include <doctest.h>

#include <cmath>
#include <limits>

#include "sdml/error.hpp"
#include "sdml/skeleton.hpp"
#include "test_util.hpp"

using namespace sdml;

namespace {

SkeletonSequence zeros(Index frames, int joints = 25) {
  SkeletonSequence s;
  s.topology = joints == 25 ? SkeletonTopology::ntu25() : SkeletonTopology::chain(joints);
  s.frames.assign(static_cast<std::size_t>(frames), Joints::Zero(joints, 3));
  return s;
}

// Independent linear interpolation: output frame i sits at input position
// i * (T - 1) / (T' - 1).
SkeletonSequence interpolate_oracle(const SkeletonSequence& s, Index target) {
  SkeletonSequence out = s;
  out.frames.clear();
  const Index T = s.length();
  for (Index i = 0; i < target; ++i) {
    const double pos = target == 1 ? 0.0 : double(i) * double(T - 1) / double(target - 1);
    const Index lo = std::min<Index>(static_cast<Index>(std::floor(pos)), T - 1);
    const Index hi = std::min<Index>(lo + 1, T - 1);
    const double w = pos - double(lo);
    Joints f(s.joint_count(), 3);
    for (Index j = 0; j < f.rows(); ++j)
      for (int a = 0; a < 3; ++a)
        f(j, a) = (1 - w) * s.frames[lo](j, a) + w * s.frames[hi](j, a);
    out.frames.push_back(f);
  }
  return out;
}

double joint_distance(const Joints& f, Index a, Index b) {
  double d2 = 0;
  for (int k = 0; k < 3; ++k) d2 += (f(a, k) - f(b, k)) * (f(a, k) - f(b, k));
  return std::sqrt(d2);
}

}  // namespace

TEST_SUITE("skeleton") {

TEST_CASE("ntu topology is a single tree rooted at the spine base") {
  const auto& t = SkeletonTopology::ntu25();
  CHECK(t.joint_count() == 25);
  CHECK(t.root() == 0);
  CHECK(t.parent_of()[1] == 0);
  CHECK(t.parent_of()[20] == 1);
  CHECK(t.neighbours(1) == std::vector<int>{0, 20});
}

TEST_CASE("topology rejects cycles and forests") {
  CHECK_THROWS_AS(SkeletonTopology({1, 0, 1}, {}), Error);
  CHECK_THROWS_AS(SkeletonTopology({0, 1, 1}, {}), Error);
  CHECK_THROWS_AS(SkeletonTopology({0, 5}, {}), Error);
}

TEST_CASE("validate returns valid sequences unchanged") {
  const auto s = zeros(2);
  const auto v = validate_sequence(s);
  CHECK(test::max_abs_diff(s, v) == 0.0);
}

TEST_CASE("validate reports the first non-finite coordinate") {
  auto s = zeros(5);
  s.frames[3](7, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    validate_sequence(s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteCoordinate);
    CHECK(e.first() == 3);
    CHECK(e.second() == 7);
  }
}

TEST_CASE("validate reports joint count mismatches") {
  auto s = zeros(3);
  s.frames[2] = Joints::Zero(24, 3);
  try {
    validate_sequence(s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::JointCountMismatch);
    CHECK(e.first() == 2);
  }
}

TEST_CASE("resample extends a single frame") {
  auto s = zeros(1);
  s.frames[0](4, 2) = 1.5;
  const auto r = resample_sequence(s, 4);
  REQUIRE(r.length() == 4);
  for (const auto& f : r.frames) CHECK(f == s.frames[0]);
}

TEST_CASE("resample midpoint") {
  auto s = zeros(2);
  s.frames[1](0, 0) = 1.0;
  const auto r = resample_sequence(s, 3);
  REQUIRE(r.length() == 3);
  CHECK(r.frames[0](0, 0) == 0.0);
  CHECK(r.frames[1](0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.frames[2](0, 0) == 1.0);
}

TEST_CASE("resample matches the brute-force interpolation oracle") {
  std::mt19937_64 rng(11);
  for (Index target : {5, 7, 12, 1, 30}) {
    const auto s = test::random_sequence(rng, 7, SkeletonTopology::ntu25());
    const auto r = resample_sequence(s, target);
    const auto o = interpolate_oracle(s, target);
    REQUIRE(r.length() == target);
    CHECK(test::max_abs_diff(r, o) <= 1e-12);
  }
}

TEST_CASE("resample properties") {
  std::mt19937_64 rng(12);
  const auto s = test::random_sequence(rng, 9, SkeletonTopology::ntu25());
  CHECK(test::max_abs_diff(resample_sequence(s, 9), s) == 0.0);
  const auto back = resample_sequence(resample_sequence(s, 23), 9);
  CHECK(back.frames.front() == s.frames.front());
  CHECK(back.frames.back() == s.frames.back());
  CHECK_THROWS_AS(resample_sequence(s, 0), Error);
}

TEST_CASE("normalize maps the extremes to 0 and 1") {
  auto s = zeros(2);
  s.frames[0](0, 0) = -1.0;
  s.frames[1](3, 2) = 3.0;
  const auto n = normalize_coordinates(s);
  CHECK(n.frames[0](0, 0) == 0.0);
  CHECK(n.frames[1](3, 2) == 1.0);
  CHECK(n.frames[0](1, 1) == doctest::Approx(0.25));
}

TEST_CASE("normalize of a constant sequence is 0.5") {
  auto s = zeros(3);
  for (auto& f : s.frames) f.setConstant(2.0);
  for (const auto& f : normalize_coordinates(s).frames) CHECK((f.array() == 0.5).all());
}

TEST_CASE("normalize matches an elementwise oracle and is idempotent") {
  std::mt19937_64 rng(13);
  const auto s = test::random_sequence(rng, 6, SkeletonTopology::ntu25(), -2.0, 5.0);
  double lo = 1e300, hi = -1e300;
  for (const auto& f : s.frames) {
    lo = std::min(lo, f.minCoeff());
    hi = std::max(hi, f.maxCoeff());
  }
  const auto n = normalize_coordinates(s);
  for (std::size_t t = 0; t < s.frames.size(); ++t)
    for (Index j = 0; j < 25; ++j)
      for (int a = 0; a < 3; ++a) {
        const double v = n.frames[t](j, a);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v == doctest::Approx((s.frames[t](j, a) - lo) / (hi - lo)).epsilon(1e-12));
      }
  CHECK(test::max_abs_diff(normalize_coordinates(n), n) <= 1e-15);
}

TEST_CASE("rotation by zero is the identity") {
  std::mt19937_64 rng(14);
  const auto s = test::random_sequence(rng, 4, SkeletonTopology::ntu25());
  const auto r = rotate_sequence(s, 0.0, Axis::Y);
  for (std::size_t t = 0; t < s.frames.size(); ++t) CHECK(r.frames[t] == s.frames[t]);
}

TEST_CASE("right-handed rotation about y") {
  // Two joints at +-x so the centroid is the origin.
  SkeletonSequence s;
  s.topology = SkeletonTopology::chain(2);
  Joints f(2, 3);
  f << 1, 0, 0, -1, 0, 0;
  s.frames.push_back(f);
  const auto r = rotate_sequence(s, 90.0, Axis::Y);
  CHECK(r.frames[0](0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.frames[0](0, 1) == doctest::Approx(0.0));
  CHECK(r.frames[0](0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("rotation preserves intra-frame distances and inverts") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = test::random_sequence(rng, 5, SkeletonTopology::ntu25());
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
      const auto r = rotate_sequence(s, 5.0, axis);
      for (std::size_t t = 0; t < s.frames.size(); ++t)
        for (Index a = 0; a < 25; ++a)
          for (Index b = a + 1; b < 25; ++b)
            CHECK(std::abs(joint_distance(r.frames[t], a, b) -
                           joint_distance(s.frames[t], a, b)) <= 1e-9);
      CHECK(test::max_abs_diff(rotate_sequence(r, -5.0, axis), s) <= 1e-9);
    }
  }
}

TEST_CASE("random rotation stays within the angle bound and is seeded") {
  std::mt19937_64 rng(16);
  const auto s = test::random_sequence(rng, 3, SkeletonTopology::ntu25());
  const auto a = random_rotation(s, 99, 5.0);
  const auto b = random_rotation(s, 99, 5.0);
  CHECK(test::max_abs_diff(a, b) == 0.0);
  // the y coordinate is untouched by a yaw
  for (std::size_t t = 0; t < s.frames.size(); ++t)
    CHECK((a.frames[t].col(1) - s.frames[t].col(1)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("synth_generate determinism and rest pose") {
  const auto& topo = SkeletonTopology::ntu25();
  auto spec = make_synth_class(3, topo, 5, 4, 0.0, 0.0);
  const auto a = synth_generate(spec, 20, topo, 8);
  const auto b = synth_generate(spec, 20, topo, 8);
  CHECK(test::max_abs_diff(a, b) == 0.0);

  spec.amplitude.setZero();
  const auto still = synth_generate(spec, 10, topo, 8);
  const Joints rest = rest_pose(topo);
  for (const auto& f : still.frames) CHECK((f - rest).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("synthetic classes differ in variance on their active joints") {
  const auto& topo = SkeletonTopology::ntu25();
  const auto c1 = make_synth_class(1, topo, 21);
  const auto c2 = make_synth_class(2, topo, 22);
  auto active = [](const SynthClassSpec& c, Index j) { return c.amplitude.row(j).cwiseAbs().sum() > 0; };

  auto joint_variance = [&](const SynthClassSpec& c) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(25);
    for (int k = 0; k < 100; ++k) {
      const auto s = synth_generate(c, 30, topo, 1000 + k);
      for (Index j = 0; j < 25; ++j) {
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (const auto& f : s.frames) mean += f.row(j).transpose();
        mean /= 30.0;
        double v = 0;
        for (const auto& f : s.frames) v += (f.row(j).transpose() - mean).squaredNorm();
        total(j) += v / 30.0;
      }
    }
    return Eigen::VectorXd(total / 100.0);
  };
  const auto v1 = joint_variance(c1);
  const auto v2 = joint_variance(c2);
  for (Index j = 0; j < 25; ++j) {
    if (active(c1, j) && !active(c2, j)) CHECK(v1(j) > 10 * v2(j));
    if (active(c2, j) && !active(c1, j)) CHECK(v2(j) > 10 * v1(j));
  }
}

}
