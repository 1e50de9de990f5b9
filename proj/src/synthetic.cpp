#include "sdml/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "sdml/error.hpp"
#include "sdml/io.hpp"
#include "sdml/seed.hpp"

namespace sdml {

const std::vector<std::vector<int>>& ntu_body_parts() {
  static const std::vector<std::vector<int>> parts = {
      {0, 1, 20}, {2, 3}, {4, 5, 6, 7, 21, 22}, {8, 9, 10, 11, 23, 24},
      {12, 13, 14, 15}, {16, 17, 18, 19}};
  return parts;
}

namespace {

struct Primitive {
  std::vector<int> joints;
  int axis = 0;
  real amplitude = 0.0;
  real frequency = 0.0;
  real phase = 0.0;
};

std::vector<Primitive> primitive_vocabulary(int count, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, {13}));
  std::uniform_real_distribution<real> amp(0.15, 0.3);
  std::uniform_real_distribution<real> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> axis(0, 2);
  const auto& parts = ntu_body_parts();
  std::vector<int> order(parts.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Primitive> out;
  for (int i = 0; i < count; ++i) {
    Primitive p;
    p.joints = parts[order[static_cast<std::size_t>(i) % parts.size()]];
    p.axis = axis(rng);
    p.amplitude = amp(rng);
    p.frequency = 1.0 + 0.5 * i;
    p.phase = phase(rng);
    out.push_back(std::move(p));
  }
  return out;
}

/// k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k);
  std::iota(cur.begin(), cur.end(), 0);
  if (k < 1 || k > n) return out;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

}  // namespace

std::vector<SynthClassSpec> synthetic_classes(const SynthDatasetConfig& cfg) {
  const auto& topology = SkeletonTopology::ntu25();
  std::vector<SynthClassSpec> out;
  if (cfg.primitives > 0) {
    const auto vocabulary = primitive_vocabulary(cfg.primitives, cfg.seed);
    const auto combos = combinations(cfg.primitives, cfg.primitives_per_class);
    const int n = topology.joint_count();
    for (int c = 0; c < cfg.classes; ++c) {
      const int id = cfg.first_class + c;
      const std::size_t index = static_cast<std::size_t>(id - 1);
      if (index >= combos.size())
        throw Error(ErrorKind::InvalidConfig,
                    "class " + std::to_string(id) + " exceeds the primitive combinations");
      SynthClassSpec spec;
      spec.class_id = id;
      spec.amplitude = mat::Zero(n, 3);
      spec.frequency = mat::Ones(n, 3);
      spec.phase = mat::Zero(n, 3);
      spec.noise_sigma = cfg.noise_sigma;
      spec.phase_jitter = cfg.phase_jitter;
      for (int p : combos[index]) {
        const Primitive& prim = vocabulary[static_cast<std::size_t>(p)];
        for (int j : prim.joints) {
          spec.amplitude(j, prim.axis) += prim.amplitude;
          spec.frequency(j, prim.axis) = prim.frequency;
          spec.phase(j, prim.axis) = prim.phase;
        }
      }
      out.push_back(std::move(spec));
    }
    return out;
  }
  for (int c = 0; c < cfg.classes; ++c) {
    const int id = cfg.first_class + c;
    out.push_back(make_synth_class(id, topology,
                                   derive_seed(cfg.seed, {11, static_cast<std::uint64_t>(id)}),
                                   cfg.active_joints, cfg.noise_sigma, cfg.phase_jitter));
  }
  return out;
}

std::vector<Sample> make_synthetic_dataset(const SynthDatasetConfig& cfg) {
  if (cfg.classes < 1 || cfg.samples_per_class < 1 || cfg.frames < 1)
    throw Error(ErrorKind::InvalidConfig, "synthetic dataset needs classes, samples and frames");
  const auto& topology = SkeletonTopology::ntu25();
  const int n = topology.joint_count();
  const auto specs = synthetic_classes(cfg);

  std::vector<Sample> out;
  for (const SynthClassSpec& spec : specs) {
    for (int k = 0; k < cfg.samples_per_class; ++k) {
      const std::uint64_t seed = derive_seed(
          cfg.seed, {12, static_cast<std::uint64_t>(spec.class_id), static_cast<std::uint64_t>(k)});
      SkeletonSequence seq = synth_generate(spec, cfg.frames, topology, seed);

      std::mt19937_64 rng(derive_seed(seed, {1}));
      if (cfg.distractor_joints > 0 && cfg.distractor_amplitude > 0.0) {
        std::vector<int> joints(n);
        std::iota(joints.begin(), joints.end(), 0);
        std::shuffle(joints.begin(), joints.end(), rng);
        std::uniform_real_distribution<real> freq(cfg.distractor_min_freq, cfg.distractor_max_freq);
        std::uniform_real_distribution<real> phase(0.0, 2.0 * std::numbers::pi);
        const real denom = cfg.frames > 1 ? static_cast<real>(cfg.frames - 1) : 1.0;
        for (int d = 0; d < std::min(cfg.distractor_joints, n); ++d) {
          const int j = joints[d];
          for (int a = 0; a < 3; ++a) {
            const real f = freq(rng), p = phase(rng);
            for (Index t = 0; t < cfg.frames; ++t)
              seq.frames[t](j, a) += cfg.distractor_amplitude *
                                     std::sin(2.0 * std::numbers::pi * f * t / denom + p);
          }
        }
      }
      if (cfg.pose_jitter > 0.0) {
        std::normal_distribution<real> offset(0.0, cfg.pose_jitter);
        Joints shift(n, 3);
        for (int j = 0; j < n; ++j)
          for (int a = 0; a < 3; ++a) shift(j, a) = offset(rng);
        for (Joints& f : seq.frames) f += shift;
      }
      if (cfg.yaw_jitter_deg > 0.0) {
        std::uniform_real_distribution<real> yaw(-cfg.yaw_jitter_deg, cfg.yaw_jitter_deg);
        seq = rotate_sequence(seq, yaw(rng), Axis::Y);
      }

      Sample sample;
      sample.meta = {1, 1, k + 1, 1, spec.class_id, ""};
      sample.meta.source_name = format_sample_name(sample.meta);
      sample.id = sample.meta.source_name;
      sample.label = spec.class_id;
      seq.meta = sample.meta;
      sample.bodies.push_back(std::move(seq));
      out.push_back(std::move(sample));
    }
  }
  return out;
}

void write_dataset(const std::vector<Sample>& samples, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const Sample& s : samples)
    atomic_write(dir / (s.id + ".skeleton"), format_ntu_skeleton(s.bodies));
}

}  // namespace sdml
