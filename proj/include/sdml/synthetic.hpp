#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sdml/ingest.hpp"
#include "sdml/skeleton.hpp"

namespace sdml {

/// Small stand-in for a skeleton action dataset. Each class is a
/// sinusoidal motion pattern on a few joints; samples add phase jitter,
/// coordinate noise and optional nuisance factors that carry no class
/// information.
struct SynthDatasetConfig {
  int classes = 15;
  int first_class = 1;
  int samples_per_class = 21;
  Index frames = 30;
  int active_joints = 4;
  /// When positive, classes are combinations of `primitives_per_class`
  /// body-part motion primitives drawn from a vocabulary of this size,
  /// enumerated in lexicographic order; otherwise every class moves
  /// `active_joints` random joints.
  int primitives = 0;
  int primitives_per_class = 2;
  real noise_sigma = 0.01;
  real phase_jitter = 0.5;
  /// Per-sample yaw drawn uniformly from [-yaw_jitter_deg, yaw_jitter_deg].
  real yaw_jitter_deg = 0.0;
  /// Per-sample static offset of every joint, N(0, pose_jitter^2) per axis.
  real pose_jitter = 0.0;
  /// Per-sample random high-frequency motion on randomly chosen joints.
  int distractor_joints = 0;
  real distractor_amplitude = 0.0;
  real distractor_min_freq = 6.0;
  real distractor_max_freq = 12.0;
  std::uint64_t seed = 0;
};

/// Joint groups of the NTU skeleton used as motion primitives: torso, head,
/// left arm, right arm, left leg, right leg.
const std::vector<std::vector<int>>& ntu_body_parts();

/// Class patterns for the configured classes (index i is class first_class + i).
std::vector<SynthClassSpec> synthetic_classes(const SynthDatasetConfig& cfg);

/// Samples are named S001C001P<k>R001A<class> with k = 1..samples_per_class,
/// ordered by class, then k.
std::vector<Sample> make_synthetic_dataset(const SynthDatasetConfig& cfg);

/// Writes every sample as `<id>.skeleton` in NTU layout under `dir`.
void write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& dir);

}  // namespace sdml
