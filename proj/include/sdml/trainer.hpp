#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sdml/embedder.hpp"
#include "sdml/ingest.hpp"
#include "sdml/metric.hpp"
#include "sdml/optimizer.hpp"
#include "sdml/representations.hpp"
#include "sdml/seed.hpp"

namespace sdml {

enum class LossKind { MultiSimilarity, TripletMargin };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

struct TrainerConfig {
  Index batch_size = 32;
  int epochs = 100;
  /// Reference value; a randomly initialised backbone wants ~1e-3.
  real learning_rate = 1e-6;
  OptimizerKind optimizer = OptimizerKind::RmsProp;
  RmsPropConfig rmsprop;
  Index embedding_dim = 128;
  LossKind loss = LossKind::MultiSimilarity;
  MinerConfig miner;
  LossConfig loss_params;
  bool augment_rotation = false;
  real rotation_max_deg = 5.0;
  /// Unit-normalise embeddings before the similarity matrix (cosine
  /// similarity). Raw dot products collapse during training.
  bool normalize_embeddings = true;
  /// Joint softmax cross-entropy head over the training classes (unit weight).
  bool classifier_head = false;
  std::uint64_t seed = 0;
};

/// Everything needed to resume training bit-exactly.
struct TrainerState {
  OptimizerState optimizer;
  int epochs_completed = 0;
  std::uint64_t seed = 0;
  std::vector<real> history;  // mean batch loss per completed epoch
};

struct BatchResult {
  real loss = 0.0;
  Gradients gradients;
  PairSet pairs;
};

/// Full pipeline for one batch: forward, similarity, mining, loss, backward.
/// `class_index` maps labels to classifier rows when the head is present.
BatchResult batch_loss_and_gradients(const EmbedderModel& model,
                                     std::span<const RepresentationImage> images,
                                     std::span<const int> labels, const TrainerConfig& cfg);

/// Trains on pre-encoded images (rotation augmentation is unavailable here).
/// Continues from `state.epochs_completed` up to cfg.epochs.
const std::vector<real>& train(EmbedderModel& model, TrainerState& state,
                               std::span<const RepresentationImage> images,
                               std::span<const int> labels, const TrainerConfig& cfg);

/// Trains on captures, encoding each batch with `encoder`; rotation
/// augmentation is applied to the sequences before encoding when enabled.
const std::vector<real>& train(EmbedderModel& model, TrainerState& state,
                               std::span<const Sample> samples, const EncoderConfig& encoder,
                               const TrainerConfig& cfg);

}  // namespace sdml
