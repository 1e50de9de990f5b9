#include "sdml/representations.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

#include "sdml/error.hpp"

namespace sdml {

std::string_view to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::SkeletonDml: return "skeleton_dml";
    case EncoderKind::SlDml: return "sl_dml";
    case EncoderKind::Tssi: return "tssi";
    case EncoderKind::SkeleMotionMagnitude: return "skelemotion_magnitude";
    case EncoderKind::SkeleMotionOrientation: return "skelemotion_orientation";
    case EncoderKind::Skepxel: return "skepxel";
  }
  return "unknown";
}

EncoderKind encoder_kind_from_string(std::string_view name) {
  for (EncoderKind k : {EncoderKind::SkeletonDml, EncoderKind::SlDml, EncoderKind::Tssi,
                        EncoderKind::SkeleMotionMagnitude, EncoderKind::SkeleMotionOrientation,
                        EncoderKind::Skepxel})
    if (to_string(k) == name) return k;
  throw Error(ErrorKind::InvalidConfig, "unknown encoder '" + std::string(name) + "'");
}

std::string_view to_string(BodyFusion fusion) {
  return fusion == BodyFusion::FirstBody ? "first_body" : "stack_heightwise";
}

BodyFusion body_fusion_from_string(std::string_view name) {
  if (name == "first_body") return BodyFusion::FirstBody;
  if (name == "stack_heightwise") return BodyFusion::StackHeightwise;
  throw Error(ErrorKind::InvalidConfig, "unknown body fusion '" + std::string(name) + "'");
}

PixelSlot skeleton_dml_slot(Index joint, Index time, int axis, Index length) {
  const Index block = length / 3;
  return {joint, axis * block + time / 3, static_cast<int>(time % 3)};
}

RepresentationImage encode_skeleton_dml(const SkeletonSequence& seq, const EncoderConfig&) {
  const Index length = seq.length();
  if (length < 3 || length % 3 != 0)
    throw Error(ErrorKind::BadLength,
                "sequence length " + std::to_string(length) + " is not a positive multiple of 3",
                length);
  const Index n = seq.joint_count();
  RepresentationImage image(n, length);
  for (Index t = 0; t < length; ++t) {
    const Joints& frame = seq.frames[t];
    for (int a = 0; a < 3; ++a)
      for (Index j = 0; j < n; ++j) {
        const PixelSlot s = skeleton_dml_slot(j, t, a, length);
        image(s.row, s.col, s.channel) = frame(j, a);
      }
  }
  return image;
}

std::vector<Joints> decode_skeleton_dml(const RepresentationImage& image) {
  const Index length = image.width();
  if (length < 3 || length % 3 != 0)
    throw Error(ErrorKind::BadLength, "image width is not a multiple of 3", length);
  const Index n = image.height();
  std::vector<Joints> frames(length, Joints(n, 3));
  for (Index t = 0; t < length; ++t)
    for (int a = 0; a < 3; ++a)
      for (Index j = 0; j < n; ++j) {
        const PixelSlot s = skeleton_dml_slot(j, t, a, length);
        frames[t](j, a) = image(s.row, s.col, s.channel);
      }
  return frames;
}

namespace {

RepresentationImage rows_by_order(const SkeletonSequence& seq, const std::vector<int>& rows) {
  const Index length = seq.length();
  RepresentationImage image(static_cast<Index>(rows.size()), length);
  for (Index t = 0; t < length; ++t)
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (int a = 0; a < 3; ++a) image(static_cast<Index>(r), t, a) = seq.frames[t](rows[r], a);
  return image;
}

void require_motion(const SkeletonSequence& seq) {
  if (seq.length() < 2)
    throw Error(ErrorKind::TooShort, "motion encodings need at least two frames", seq.length());
}

}  // namespace

RepresentationImage encode_sl_dml(const SkeletonSequence& seq, const EncoderConfig&) {
  std::vector<int> rows(seq.joint_count());
  std::iota(rows.begin(), rows.end(), 0);
  return rows_by_order(seq, rows);
}

std::vector<int> tssi_order(const SkeletonTopology& topology, int root) {
  std::vector<int> order;
  std::function<void(int, int)> visit = [&](int joint, int from) {
    order.push_back(joint);
    for (int next : topology.neighbours(joint)) {
      if (next == from) continue;
      visit(next, joint);
      order.push_back(joint);
    }
  };
  visit(root, -1);
  return order;
}

int tssi_root(const SkeletonTopology& topology) {
  if (topology == SkeletonTopology::ntu25()) return 1;  // SpineMid
  return topology.root();
}

RepresentationImage encode_tssi(const SkeletonSequence& seq, const EncoderConfig&) {
  return rows_by_order(seq, tssi_order(seq.topology, tssi_root(seq.topology)));
}

RepresentationImage encode_skelemotion_magnitude(const SkeletonSequence& seq,
                                                 const EncoderConfig&) {
  require_motion(seq);
  const auto rows = tssi_order(seq.topology, tssi_root(seq.topology));
  const Index cols = seq.length() - 1;
  mat magnitude(static_cast<Index>(rows.size()), cols);
  for (Index t = 0; t < cols; ++t)
    for (std::size_t r = 0; r < rows.size(); ++r)
      magnitude(static_cast<Index>(r), t) =
          (seq.frames[t + 1].row(rows[r]) - seq.frames[t].row(rows[r])).norm();

  const real peak = magnitude.maxCoeff();
  if (peak > 0.0) magnitude /= peak;
  else magnitude.setZero();

  RepresentationImage image;
  for (auto& c : image.channels) c = magnitude;
  return image;
}

RepresentationImage encode_skelemotion_orientation(const SkeletonSequence& seq,
                                                   const EncoderConfig&) {
  require_motion(seq);
  const auto rows = tssi_order(seq.topology, tssi_root(seq.topology));
  const Index cols = seq.length() - 1;
  RepresentationImage image(static_cast<Index>(rows.size()), cols);
  for (Index t = 0; t < cols; ++t)
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const Eigen::RowVector3d motion =
          seq.frames[t + 1].row(rows[r]) - seq.frames[t].row(rows[r]);
      const real norm = motion.norm();
      for (int k = 0; k < 3; ++k) {
        real value = 0.5;
        if (norm > 0.0) {
          const real cosine = std::clamp(motion(k) / norm, -1.0, 1.0);
          value = std::clamp(std::acos(cosine) / std::numbers::pi, 0.0, 1.0);
        }
        image(static_cast<Index>(r), t, k) = value;
      }
    }
  return image;
}

std::vector<JointPermutation> skepxel_permutations(const EncoderConfig& cfg) {
  if (!cfg.skepxel_permutations.empty()) {
    for (const auto& p : cfg.skepxel_permutations) {
      JointPermutation sorted = p;
      std::sort(sorted.begin(), sorted.end());
      JointPermutation identity(25);
      std::iota(identity.begin(), identity.end(), 0);
      if (sorted != identity)
        throw Error(ErrorKind::InvalidConfig, "skepxel permutation is not a permutation of 0..24");
    }
    return cfg.skepxel_permutations;
  }
  if (cfg.skepxel_count < 1)
    throw Error(ErrorKind::InvalidConfig, "skepxel count must be positive");
  std::mt19937_64 rng(cfg.skepxel_seed);
  std::vector<JointPermutation> out;
  for (int k = 0; k < cfg.skepxel_count; ++k) {
    JointPermutation p(25);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    out.push_back(std::move(p));
  }
  return out;
}

RepresentationImage encode_skepxel(const SkeletonSequence& seq, const EncoderConfig& cfg) {
  if (seq.joint_count() != 25)
    throw Error(ErrorKind::WrongJointCount, "skepxels need exactly 25 joints", seq.joint_count());
  const auto perms = skepxel_permutations(cfg);
  const Index tiles = static_cast<Index>(perms.size());
  const Index length = seq.length();
  RepresentationImage image(5 * tiles, 5 * length);
  for (Index t = 0; t < length; ++t)
    for (Index k = 0; k < tiles; ++k)
      for (int q = 0; q < 25; ++q)
        for (int a = 0; a < 3; ++a)
          image(5 * k + q / 5, 5 * t + q % 5, a) = seq.frames[t](perms[k][q], a);
  return image;
}

RepresentationImage encode(const SkeletonSequence& seq, const EncoderConfig& cfg) {
  switch (cfg.kind) {
    case EncoderKind::SkeletonDml: return encode_skeleton_dml(seq, cfg);
    case EncoderKind::SlDml: return encode_sl_dml(seq, cfg);
    case EncoderKind::Tssi: return encode_tssi(seq, cfg);
    case EncoderKind::SkeleMotionMagnitude: return encode_skelemotion_magnitude(seq, cfg);
    case EncoderKind::SkeleMotionOrientation: return encode_skelemotion_orientation(seq, cfg);
    case EncoderKind::Skepxel: return encode_skepxel(seq, cfg);
  }
  throw Error(ErrorKind::InvalidConfig, "unknown encoder");
}

RepresentationImage encode_bodies(const std::vector<SkeletonSequence>& bodies,
                                  const EncoderConfig& cfg) {
  if (bodies.empty()) throw Error(ErrorKind::TooShort, "capture holds no body", 0);
  const auto prepare = [&](const SkeletonSequence& s) {
    return encode(normalize_coordinates(resample_sequence(s, cfg.target_length)), cfg);
  };
  RepresentationImage first = prepare(bodies.front());
  if (cfg.body_fusion == BodyFusion::FirstBody) return first;

  SkeletonSequence second_body;
  if (bodies.size() > 1) {
    second_body = bodies[1];
  } else {
    second_body = bodies.front();
    for (Joints& f : second_body.frames) f.setZero();
  }
  const RepresentationImage second = prepare(second_body);
  RepresentationImage stacked;
  for (int k = 0; k < 3; ++k) {
    stacked.channels[k].resize(first.height() + second.height(), first.width());
    stacked.channels[k] << first.channels[k], second.channels[k];
  }
  return stacked;
}

}  // namespace sdml
