#include "sdml/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "sdml/error.hpp"

namespace sdml {

SkeletonTopology::SkeletonTopology(std::vector<int> parent_of,
                                   std::vector<std::string> joint_names)
    : parent_of_(std::move(parent_of)), joint_names_(std::move(joint_names)) {
  const int n = joint_count();
  if (n < 1) throw Error(ErrorKind::InvalidTopology, "topology needs at least one joint");
  if (joint_names_.empty()) {
    joint_names_.reserve(n);
    for (int j = 0; j < n; ++j) joint_names_.push_back("joint" + std::to_string(j));
  }
  if (static_cast<int>(joint_names_.size()) != n)
    throw Error(ErrorKind::InvalidTopology, "joint name count differs from joint count");

  int roots = 0;
  for (int j = 0; j < n; ++j) {
    const int p = parent_of_[j];
    if (p < 0 || p >= n)
      throw Error(ErrorKind::InvalidTopology, "parent index out of range", j);
    if (p == j) {
      root_ = j;
      ++roots;
    }
  }
  if (roots != 1) throw Error(ErrorKind::InvalidTopology, "expected exactly one root");

  // every joint must reach the root in fewer than n steps
  for (int j = 0; j < n; ++j) {
    int cur = j;
    int steps = 0;
    while (cur != root_ && steps <= n) {
      cur = parent_of_[cur];
      ++steps;
    }
    if (cur != root_) throw Error(ErrorKind::InvalidTopology, "cycle in parent links", j);
  }
}

const SkeletonTopology& SkeletonTopology::ntu25() {
  static const SkeletonTopology topology(
      {0, 0, 20, 2, 20, 4, 5, 6, 20, 8, 9, 10, 0, 12, 13, 14, 0, 16, 17, 18, 1, 7, 7, 11, 11},
      {"SpineBase",    "SpineMid",      "Neck",       "Head",          "ShoulderLeft",
       "ElbowLeft",    "WristLeft",     "HandLeft",   "ShoulderRight", "ElbowRight",
       "WristRight",   "HandRight",     "HipLeft",    "KneeLeft",      "AnkleLeft",
       "FootLeft",     "HipRight",      "KneeRight",  "AnkleRight",    "FootRight",
       "SpineShoulder", "HandTipLeft",  "ThumbLeft",  "HandTipRight",  "ThumbRight"});
  return topology;
}

SkeletonTopology SkeletonTopology::chain(int joint_count) {
  std::vector<int> parents(joint_count);
  for (int j = 0; j < joint_count; ++j) parents[j] = j == 0 ? 0 : j - 1;
  return SkeletonTopology(std::move(parents), {});
}

std::vector<int> SkeletonTopology::neighbours(int joint) const {
  std::vector<int> out;
  if (parent_of_[joint] != joint) out.push_back(parent_of_[joint]);
  for (int j = 0; j < joint_count(); ++j)
    if (j != joint && parent_of_[j] == joint) out.push_back(j);
  std::sort(out.begin(), out.end());
  return out;
}

SkeletonSequence validate_sequence(const SkeletonSequence& seq) {
  const Index n = seq.joint_count();
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const Joints& frame = seq.frames[f];
    if (frame.rows() != n)
      throw Error(ErrorKind::JointCountMismatch,
                  "frame " + std::to_string(f) + " has " + std::to_string(frame.rows()) +
                      " joints, topology has " + std::to_string(n),
                  static_cast<std::int64_t>(f));
    for (Index j = 0; j < n; ++j) {
      if (!frame.row(j).allFinite())
        throw Error(ErrorKind::NonFiniteCoordinate,
                    "frame " + std::to_string(f) + " joint " + std::to_string(j),
                    static_cast<std::int64_t>(f), j);
    }
  }
  return seq;
}

SkeletonSequence resample_sequence(const SkeletonSequence& seq, Index target_length) {
  if (target_length < 1)
    throw Error(ErrorKind::InvalidTarget, "target length must be positive", target_length);
  if (seq.frames.empty())
    throw Error(ErrorKind::InvalidTarget, "cannot resample an empty sequence");

  SkeletonSequence out;
  out.topology = seq.topology;
  out.label = seq.label;
  out.meta = seq.meta;
  out.frames.reserve(target_length);

  const Index length = seq.length();
  if (length == target_length) {
    out.frames = seq.frames;
    return out;
  }
  if (length == 1 || target_length == 1) {
    out.frames.assign(target_length, seq.frames.front());
    return out;
  }

  const real scale = static_cast<real>(length - 1) / static_cast<real>(target_length - 1);
  for (Index i = 0; i < target_length; ++i) {
    if (i == target_length - 1) {
      out.frames.push_back(seq.frames.back());
      continue;
    }
    const real pos = static_cast<real>(i) * scale;
    const Index lo = std::min(static_cast<Index>(std::floor(pos)), length - 1);
    const real frac = pos - static_cast<real>(lo);
    if (frac == 0.0 || lo + 1 >= length) {
      out.frames.push_back(seq.frames[lo]);
    } else {
      out.frames.push_back((1.0 - frac) * seq.frames[lo] + frac * seq.frames[lo + 1]);
    }
  }
  return out;
}

SkeletonSequence normalize_coordinates(const SkeletonSequence& seq) {
  SkeletonSequence out = seq;
  if (seq.frames.empty()) return out;

  real lo = std::numeric_limits<real>::infinity();
  real hi = -std::numeric_limits<real>::infinity();
  for (const Joints& f : seq.frames) {
    lo = std::min(lo, f.minCoeff());
    hi = std::max(hi, f.maxCoeff());
  }
  const real range = hi - lo;
  for (Joints& f : out.frames) {
    if (range > 0.0) {
      f = ((f.array() - lo) / range).matrix();
    } else {
      f.setConstant(0.5);
    }
  }
  return out;
}

vec3 sequence_centroid(const SkeletonSequence& seq) {
  vec3 sum = vec3::Zero();
  Index count = 0;
  for (const Joints& f : seq.frames) {
    sum += f.colwise().sum().transpose();
    count += f.rows();
  }
  return count > 0 ? vec3(sum / static_cast<real>(count)) : sum;
}

mat3 axis_rotation(real angle_deg, Axis axis) {
  const real rad = angle_deg * std::numbers::pi / 180.0;
  const vec3 unit = vec3::Unit(static_cast<int>(axis));
  return Eigen::AngleAxis<real>(rad, unit).toRotationMatrix();
}

SkeletonSequence rotate_sequence(const SkeletonSequence& seq, real angle_deg, Axis axis) {
  if (angle_deg == 0.0) return seq;

  const mat3 rot = axis_rotation(angle_deg, axis);
  const Eigen::RowVector3d centroid = sequence_centroid(seq).transpose();
  SkeletonSequence out = seq;
  for (Joints& f : out.frames) {
    f = ((f.rowwise() - centroid) * rot.transpose()).rowwise() + centroid;
  }
  return out;
}

SkeletonSequence random_rotation(const SkeletonSequence& seq, std::uint64_t seed,
                                 real max_deg) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<real> angle(-max_deg, max_deg);
  return rotate_sequence(seq, angle(rng), Axis::Y);
}

Joints rest_pose(const SkeletonTopology& topology) {
  const int n = topology.joint_count();
  Joints pose(n, 3);
  if (topology == SkeletonTopology::ntu25()) {
    pose << 0.00, 0.00, 3.00,    //
        0.00, 0.30, 3.00,        //
        0.00, 0.60, 3.00,        //
        0.00, 0.75, 3.00,        //
        -0.18, 0.50, 3.00,       //
        -0.25, 0.25, 3.00,       //
        -0.28, 0.02, 3.00,       //
        -0.29, -0.05, 3.00,      //
        0.18, 0.50, 3.00,        //
        0.25, 0.25, 3.00,        //
        0.28, 0.02, 3.00,        //
        0.29, -0.05, 3.00,       //
        -0.10, -0.05, 3.00,      //
        -0.10, -0.45, 3.00,      //
        -0.10, -0.85, 3.00,      //
        -0.10, -0.90, 2.90,      //
        0.10, -0.05, 3.00,       //
        0.10, -0.45, 3.00,       //
        0.10, -0.85, 3.00,       //
        0.10, -0.90, 2.90,       //
        0.00, 0.50, 3.00,        //
        -0.30, -0.12, 3.00,      //
        -0.26, -0.07, 2.97,      //
        0.30, -0.12, 3.00,       //
        0.26, -0.07, 2.97;
    return pose;
  }
  for (int j = 0; j < n; ++j) pose.row(j) << 0.0, 0.1 * j, 3.0;
  return pose;
}

SynthClassSpec make_synth_class(int class_id, const SkeletonTopology& topology,
                                std::uint64_t seed, int active_joints, real noise_sigma,
                                real phase_jitter) {
  const int n = topology.joint_count();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<real> amp(0.05, 0.3);
  std::uniform_real_distribution<real> freq(0.5, 3.0);
  std::uniform_real_distribution<real> phase(0.0, 2.0 * std::numbers::pi);

  std::vector<int> joints(n);
  std::iota(joints.begin(), joints.end(), 0);
  std::shuffle(joints.begin(), joints.end(), rng);
  joints.resize(std::clamp(active_joints, 0, n));

  SynthClassSpec spec;
  spec.class_id = class_id;
  spec.amplitude = mat::Zero(n, 3);
  spec.frequency = mat::Ones(n, 3);
  spec.phase = mat::Zero(n, 3);
  spec.noise_sigma = noise_sigma;
  spec.phase_jitter = phase_jitter;
  for (int j : joints) {
    for (int a = 0; a < 3; ++a) {
      spec.amplitude(j, a) = amp(rng);
      spec.frequency(j, a) = freq(rng);
      spec.phase(j, a) = phase(rng);
    }
  }
  return spec;
}

SkeletonSequence synth_generate(const SynthClassSpec& spec, Index frame_count,
                                const SkeletonTopology& topology, std::uint64_t seed) {
  if (frame_count < 1)
    throw Error(ErrorKind::InvalidTarget, "frame count must be positive", frame_count);
  const int n = topology.joint_count();
  if (spec.amplitude.rows() != n || spec.frequency.rows() != n || spec.phase.rows() != n)
    throw Error(ErrorKind::JointCountMismatch, "motion pattern does not match topology");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<real> jitter_dist(-1.0, 1.0);
  std::normal_distribution<real> noise(0.0, 1.0);
  const real jitter = spec.phase_jitter * jitter_dist(rng);

  const Joints rest = rest_pose(topology);
  SkeletonSequence seq;
  seq.topology = topology;
  seq.label = spec.class_id;
  seq.frames.reserve(frame_count);
  const real denom = frame_count > 1 ? static_cast<real>(frame_count - 1) : 1.0;
  for (Index t = 0; t < frame_count; ++t) {
    const real u = static_cast<real>(t) / denom;
    Joints frame = rest;
    for (int j = 0; j < n; ++j) {
      for (int a = 0; a < 3; ++a) {
        const real amp = spec.amplitude(j, a);
        if (amp != 0.0)
          frame(j, a) += amp * std::sin(2.0 * std::numbers::pi * spec.frequency(j, a) * u +
                                        spec.phase(j, a) + jitter);
        if (spec.noise_sigma > 0.0) frame(j, a) += spec.noise_sigma * noise(rng);
      }
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

}  // namespace sdml
