#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdml/embedder.hpp"
#include "sdml/ingest.hpp"
#include "sdml/representations.hpp"
#include "sdml/trainer.hpp"

namespace sdml {

struct GalleryEntry {
  int class_id = 0;
  vec embedding;
  std::string sample_id;
};

/// One reference embedding per novel class, ordered by class id.
struct Gallery {
  std::vector<GalleryEntry> entries;
  Index dim() const { return entries.empty() ? 0 : entries.front().embedding.size(); }
};

enum class DistanceKind { Euclidean, Cosine };

struct ClassifyOptions {
  DistanceKind distance = DistanceKind::Euclidean;
  /// Queries farther than this from every reference are flagged as rejected.
  std::optional<real> rejection_threshold;
};

struct Classification {
  int class_id = 0;
  real distance = 0.0;
  bool rejected = false;
};

/// Maps a batch of images to row embeddings.
using EmbedFn = std::function<Embeddings(std::span<const RepresentationImage>)>;

/// Borrows `model`; the model must outlive the returned function.
EmbedFn model_embedder(const EmbedderModel& model);

/// Encodes and embeds each reference capture. When `required_classes` is
/// non-empty every listed class must be present (MissingClass otherwise).
Gallery build_gallery(const EmbedFn& embed, std::span<const Sample> references,
                      const EncoderConfig& encoder, std::span<const int> required_classes = {});
Gallery build_gallery(const EmbedderModel& model, std::span<const Sample> references,
                      const EncoderConfig& encoder, std::span<const int> required_classes = {});

real embedding_distance(const vec& a, const vec& b, DistanceKind kind);

/// Nearest reference; ties go to the lowest class id.
Classification classify(const vec& query, const Gallery& gallery,
                        const ClassifyOptions& options = {});

struct Prediction {
  std::string sample_id;
  int true_class = 0;
  int predicted_class = 0;
  real distance = 0.0;
  bool rejected = false;
};

struct EvalReport {
  real accuracy = 0.0;
  std::vector<int> classes;                        // gallery order
  std::map<int, std::pair<long, long>> per_class;  // class -> (correct, total)
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> confusion;  // true x predicted
  real mean_correct_distance = 0.0;
  real mean_incorrect_distance = 0.0;
  long rejected = 0;
  std::vector<Prediction> predictions;
};

/// Classifies precomputed query embeddings (rows) against the gallery.
EvalReport evaluate_embeddings(const Embeddings& queries, std::span<const int> labels,
                               std::span<const std::string> ids, const Gallery& gallery,
                               const ClassifyOptions& options = {});

EvalReport evaluate(const EmbedFn& embed, std::span<const Sample> eval_set,
                    const Gallery& gallery, const EncoderConfig& encoder,
                    const ClassifyOptions& options = {});
EvalReport evaluate(const EmbedderModel& model, std::span<const Sample> eval_set,
                    const Gallery& gallery, const EncoderConfig& encoder,
                    const ClassifyOptions& options = {});

/// JSON document with a fixed key order.
std::string report_json(const EvalReport& report, std::uint64_t seed);

/// "sample_id,class,e0,...,e{d-1}" rows with a header line.
std::string embeddings_csv(std::span<const std::string> ids, std::span<const int> labels,
                           const Embeddings& embeddings);

/// Captures of a split: training captures of the auxiliary classes, the
/// reference captures, and the remaining captures of the novel classes.
struct OneShotPartition {
  std::vector<Sample> training;
  std::vector<Sample> references;
  std::vector<Sample> queries;
};

OneShotPartition partition_dataset(std::span<const Sample> dataset, const ProtocolSplit& split);

struct ExperimentConfig {
  ProtocolSpec protocol;
  EncoderConfig encoder;
  TrainerConfig trainer;
  std::string architecture = std::string(kDefaultArchitecture);
  ClassifyOptions classify;
};

struct OneShotRun {
  int auxiliary_size = 0;
  ProtocolSplit split;
  EvalReport report;
  std::vector<real> history;
};

/// Builds the split, trains a fresh model on the auxiliary classes and
/// evaluates it on the novel classes. `trained == false` skips training.
OneShotRun run_oneshot(std::span<const Sample> dataset, int auxiliary_size,
                       const ExperimentConfig& cfg, bool trained = true);

/// One run per auxiliary size (same seed each), in the given order.
std::vector<OneShotRun> run_reduction_experiment(std::span<const Sample> dataset,
                                                 std::span<const int> sizes,
                                                 const ExperimentConfig& cfg);

struct AblationRow {
  LossKind loss = LossKind::MultiSimilarity;
  bool augment = false;
  Index embedding_dim = 0;
  real accuracy = 0.0;
};

/// Loss {ms, tm} x augmentation {off, on} x embedding size grid.
std::vector<AblationRow> run_ablation_grid(std::span<const Sample> dataset, int auxiliary_size,
                                           const ExperimentConfig& cfg,
                                           std::span<const Index> embedding_dims);

std::string ablation_csv(std::span<const AblationRow> rows, std::uint64_t seed);

}  // namespace sdml
