#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdml/types.hpp"

namespace sdml {

/// Kinematic tree over the joints. `parent_of[root] == root`.
class SkeletonTopology {
 public:
  SkeletonTopology() = default;
  /// Throws InvalidTopology unless the parent links form a single tree.
  SkeletonTopology(std::vector<int> parent_of, std::vector<std::string> joint_names);

  /// The 25-joint Kinect v2 layout used by NTU RGB+D (0-based indices).
  static const SkeletonTopology& ntu25();
  /// Simple chain 0 -> 1 -> ... -> n-1 rooted at joint 0.
  static SkeletonTopology chain(int joint_count);

  int joint_count() const noexcept { return static_cast<int>(parent_of_.size()); }
  int root() const noexcept { return root_; }
  const std::vector<int>& parent_of() const noexcept { return parent_of_; }
  const std::vector<std::string>& joint_names() const noexcept { return joint_names_; }
  /// Tree neighbours (parent and children) of `joint`, ascending.
  std::vector<int> neighbours(int joint) const;

  bool operator==(const SkeletonTopology&) const = default;

 private:
  std::vector<int> parent_of_;
  std::vector<std::string> joint_names_;
  int root_ = 0;
};

/// Metadata derived from an NTU-style file name SxxxCxxxPxxxRxxxAxxx.
struct SampleMeta {
  int setup = 0;
  int camera = 0;
  int performer = 0;
  int replication = 0;
  int action = 0;
  std::string source_name;

  bool operator==(const SampleMeta&) const = default;
};

struct SkeletonSequence {
  std::vector<Joints> frames;
  SkeletonTopology topology;
  std::optional<int> label;
  std::optional<SampleMeta> meta;

  Index length() const noexcept { return static_cast<Index>(frames.size()); }
  int joint_count() const noexcept { return topology.joint_count(); }
};

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Returns `seq` unchanged iff every frame has the topology's joint count and
/// every coordinate is finite. Frame and joint indices in errors are 0-based.
SkeletonSequence validate_sequence(const SkeletonSequence& seq);

/// Linear resampling to `target_length` uniformly spaced frames. The first and
/// last input frames are reproduced exactly.
SkeletonSequence resample_sequence(const SkeletonSequence& seq, Index target_length);

/// Joint min-max scaling of every coordinate into [0,1]; a constant sequence
/// maps to 0.5 everywhere.
SkeletonSequence normalize_coordinates(const SkeletonSequence& seq);

/// Right-handed rotation of all joints about `axis` through the centroid of
/// the whole sequence.
SkeletonSequence rotate_sequence(const SkeletonSequence& seq, real angle_deg, Axis axis);

/// Centroid of all joints over all frames.
vec3 sequence_centroid(const SkeletonSequence& seq);

mat3 axis_rotation(real angle_deg, Axis axis);

/// Rotation augmentation: yaw about the vertical axis by an angle drawn
/// uniformly from [-max_deg, max_deg] using `seed`.
SkeletonSequence random_rotation(const SkeletonSequence& seq, std::uint64_t seed,
                                 real max_deg = 5.0);

/// Per-joint, per-axis sinusoidal motion pattern of a synthetic class.
struct SynthClassSpec {
  int class_id = 0;
  mat amplitude;  // N x 3, meters
  mat frequency;  // N x 3, cycles per sequence
  mat phase;      // N x 3, radians
  real noise_sigma = 0.0;
  real phase_jitter = 0.0;  // max per-sample phase offset, radians
};

/// Rest pose used by the synthetic generator: a standing skeleton for the
/// NTU topology, a vertical line for anything else.
Joints rest_pose(const SkeletonTopology& topology);

/// Draws a motion pattern in which `active_joints` randomly chosen joints move.
SynthClassSpec make_synth_class(int class_id, const SkeletonTopology& topology,
                                std::uint64_t seed, int active_joints = 4,
                                real noise_sigma = 0.01, real phase_jitter = 0.5);

/// Deterministic in (spec, frame_count, topology, seed).
SkeletonSequence synth_generate(const SynthClassSpec& spec, Index frame_count,
                                const SkeletonTopology& topology, std::uint64_t seed);

}  // namespace sdml
