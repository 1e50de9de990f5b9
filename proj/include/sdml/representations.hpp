#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sdml/skeleton.hpp"
#include "sdml/types.hpp"

namespace sdml {

/// H x W x 3 image with values in [0,1], stored as three H x W planes.
template <class T>
struct image_t {
  std::array<matrix<T>, 3> channels;

  image_t() = default;
  image_t(Index height, Index width, T fill = T(0)) {
    for (auto& c : channels) c = matrix<T>::Constant(height, width, fill);
  }

  Index height() const noexcept { return channels[0].rows(); }
  Index width() const noexcept { return channels[0].cols(); }
  T& operator()(Index row, Index col, int ch) { return channels[ch](row, col); }
  const T& operator()(Index row, Index col, int ch) const { return channels[ch](row, col); }

  bool operator==(const image_t& other) const {
    for (int k = 0; k < 3; ++k) {
      if (channels[k].rows() != other.channels[k].rows() ||
          channels[k].cols() != other.channels[k].cols() || channels[k] != other.channels[k])
        return false;
    }
    return true;
  }
};

using RepresentationImage = image_t<real>;

enum class EncoderKind {
  SkeletonDml,
  SlDml,
  Tssi,
  SkeleMotionMagnitude,
  SkeleMotionOrientation,
  Skepxel,
};

enum class BodyFusion { FirstBody, StackHeightwise };

std::string_view to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(std::string_view name);
std::string_view to_string(BodyFusion fusion);
BodyFusion body_fusion_from_string(std::string_view name);

using JointPermutation = std::vector<int>;

struct EncoderConfig {
  EncoderKind kind = EncoderKind::SkeletonDml;
  Index target_length = 90;
  BodyFusion body_fusion = BodyFusion::FirstBody;
  int skepxel_count = 5;
  std::uint64_t skepxel_seed = 0;
  /// Explicit Skepxel permutations; drawn from `skepxel_seed` when empty.
  std::vector<JointPermutation> skepxel_permutations;
};

/// Axis-blocked layout: H = N, W = T, blocks [x | y | z] of width T/3 each.
/// Within block a, pixel (j, c, k) holds axis a of joint j at time 3c + k.
RepresentationImage encode_skeleton_dml(const SkeletonSequence& seq, const EncoderConfig& cfg);

/// Pixel slot of value (joint, time, axis) in the axis-blocked layout.
struct PixelSlot {
  Index row;
  Index col;
  int channel;
  bool operator==(const PixelSlot&) const = default;
};
PixelSlot skeleton_dml_slot(Index joint, Index time, int axis, Index length);

/// Inverse of encode_skeleton_dml: recovers the T frames of N x 3 coordinates.
std::vector<Joints> decode_skeleton_dml(const RepresentationImage& image);

/// H = N, W = T; channel k holds axis k.
RepresentationImage encode_sl_dml(const SkeletonSequence& seq, const EncoderConfig& cfg);

/// Depth-first Euler tour rooted at `root` with backtracking; neighbours are
/// visited in ascending index order.
std::vector<int> tssi_order(const SkeletonTopology& topology, int root);
/// Root used for the tree-structured layout (SpineMid for NTU, else the tree root).
int tssi_root(const SkeletonTopology& topology);

RepresentationImage encode_tssi(const SkeletonSequence& seq, const EncoderConfig& cfg);
RepresentationImage encode_skelemotion_magnitude(const SkeletonSequence& seq,
                                                 const EncoderConfig& cfg);
RepresentationImage encode_skelemotion_orientation(const SkeletonSequence& seq,
                                                   const EncoderConfig& cfg);

/// Permutations for `cfg`: explicit ones if given, else `skepxel_count`
/// seeded shuffles of 0..24.
std::vector<JointPermutation> skepxel_permutations(const EncoderConfig& cfg);
RepresentationImage encode_skepxel(const SkeletonSequence& seq, const EncoderConfig& cfg);

/// Dispatches on cfg.kind; input must already be normalized and resampled.
RepresentationImage encode(const SkeletonSequence& seq, const EncoderConfig& cfg);

/// Resample, normalize and encode one capture, applying cfg.body_fusion.
/// With StackHeightwise a missing second body is encoded from a zero sequence.
RepresentationImage encode_bodies(const std::vector<SkeletonSequence>& bodies,
                                  const EncoderConfig& cfg);

/// Writes an 8-bit RGB PNG, value v -> round(255 v).
void write_png(const RepresentationImage& image, const std::filesystem::path& path);

}  // namespace sdml
