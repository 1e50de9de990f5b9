#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sdml/representations.hpp"
#include "sdml/types.hpp"

namespace sdml {

/// 3x3 convolution, stride 1, zero padding 1. weight is out x (in * 9) with
/// column index c * 9 + ky * 3 + kx.
struct Conv2d {
  mat weight;
  mat bias;  // out x 1
};

struct Relu {};
struct MaxPool2 {};
struct AvgPool2 {};
struct GlobalAvgPool {};

/// y = W x + b, weight is out x in.
struct Dense {
  mat weight;
  mat bias;  // out x 1
};

using Layer = std::variant<Conv2d, Relu, MaxPool2, AvgPool2, GlobalAvgPool, Dense>;

/// Default small backbone: three conv/relu/pool blocks of widths 16, 32,
/// 64, global average pooling, then a 256-unit perceptron into the embedding.
inline constexpr std::string_view kDefaultArchitecture =
    "conv:16,relu,maxpool,conv:32,relu,maxpool,conv:64,relu,maxpool,gap,dense:256,relu,embed";

enum class InitScheme { FanInUniform, Zero };

/// Embedding network g_theta mapping a 3-channel image to a d-vector.
///
/// The architecture is a comma-separated layer list:
///   conv:<out>   3x3 convolution
///   relu         rectifier
///   maxpool      2x2 max pooling, stride 2 (floor)
///   avgpool      2x2 average pooling, stride 2 (floor)
///   gap          global average pooling to a vector
///   dense:<out>  fully connected layer (after gap)
///   embed        final fully connected layer to the embedding dimension
/// and must end with `embed`.
struct EmbedderModel {
  std::string architecture;
  Index embedding_dim = 0;
  std::vector<Layer> layers;
  /// Optional linear classification head over the embedding (C x d), used
  /// only during training with the cross-entropy term enabled.
  std::optional<Dense> classifier;

  /// Parameter tensors in a fixed order with stable names ("layer3.weight").
  std::vector<std::pair<std::string, mat*>> parameters();
  std::vector<std::pair<std::string, const mat*>> parameters() const;
  Index parameter_count() const;
};

EmbedderModel build_model(std::string_view architecture, Index embedding_dim, std::uint64_t seed,
                          InitScheme init = InitScheme::FanInUniform);

/// Adds a C-way classifier head initialised from `seed`.
void attach_classifier(EmbedderModel& model, Index classes, std::uint64_t seed);

/// Per-sample intermediate values kept for the backward pass.
struct ForwardTrace {
  struct Step {
    mat cached;  // im2col matrix (conv), layer input (relu, dense)
    std::vector<Index> argmax;
    Index in_height = 0;
    Index in_width = 0;
    Index in_channels = 0;
  };
  std::vector<Step> steps;
};

/// Row i of the result is the embedding of images[i]. Samples never interact.
Embeddings forward(const EmbedderModel& model, std::span<const RepresentationImage> images);
Embeddings forward(const EmbedderModel& model, std::span<const RepresentationImage> images,
                   std::vector<ForwardTrace>& traces);

/// Gradients aligned with model.parameters().
using Gradients = std::vector<mat>;

Gradients zero_gradients(const EmbedderModel& model);

Gradients backward(const EmbedderModel& model, std::span<const ForwardTrace> traces,
                   const Embeddings& upstream);
Gradients backward(const EmbedderModel& model, std::span<const RepresentationImage> images,
                   const Embeddings& upstream);

}  // namespace sdml
