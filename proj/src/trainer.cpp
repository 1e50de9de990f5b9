#include "sdml/trainer.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "sdml/error.hpp"

namespace sdml {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::MultiSimilarity ? "ms" : "tm";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "ms") return LossKind::MultiSimilarity;
  if (name == "tm") return LossKind::TripletMargin;
  throw Error(ErrorKind::InvalidConfig, "unknown loss '" + std::string(name) + "'");
}

namespace {

std::vector<int> class_indices(const EmbedderModel& model, std::span<const int> labels,
                               const std::vector<int>& classes) {
  std::vector<int> out;
  if (!model.classifier) return out;
  out.reserve(labels.size());
  for (int label : labels) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label)
      throw Error(ErrorKind::UnknownLabel, "label outside the classifier classes", label);
    out.push_back(static_cast<int>(it - classes.begin()));
  }
  return out;
}

BatchResult batch_step(const EmbedderModel& model, std::span<const RepresentationImage> images,
                       std::span<const int> labels, const TrainerConfig& cfg,
                       const std::vector<int>& classes) {
  if (images.size() != labels.size())
    throw Error(ErrorKind::ShapeMismatch, "image and label counts differ");

  std::vector<ForwardTrace> traces;
  const Embeddings raw = forward(model, images, traces);
  const Embeddings emb = cfg.normalize_embeddings ? normalize_rows(raw) : raw;

  BatchResult result;
  const mat s = similarity_matrix(emb);
  result.pairs = mine_pairs(s, labels, cfg.miner);

  LossResult metric;
  if (cfg.loss == LossKind::MultiSimilarity) {
    metric = ms_loss(emb, s, result.pairs, cfg.loss_params);
  } else {
    const auto triplets = triplets_from_pairs(result.pairs);
    metric = triplet_margin_loss(emb, std::span<const Triplet>(triplets),
                                 cfg.loss_params.triplet_margin);
  }
  result.loss = metric.loss;
  mat upstream = std::move(metric.gradient);

  mat head_weight_grad, head_bias_grad;
  if (model.classifier) {
    const Dense& head = *model.classifier;
    const mat logits = (emb * head.weight.transpose()).rowwise() + head.bias.col(0).transpose();
    const auto targets = class_indices(model, labels, classes);
    const LossResult ce = softmax_cross_entropy(logits, std::span<const int>(targets));
    result.loss += ce.loss;
    upstream += ce.gradient * head.weight;
    head_weight_grad = ce.gradient.transpose() * emb;
    head_bias_grad = ce.gradient.colwise().sum().transpose();
  }

  if (cfg.normalize_embeddings) upstream = normalize_rows_backward(raw, upstream);
  result.gradients = backward(model, std::span<const ForwardTrace>(traces), upstream);
  if (model.classifier) {
    const std::size_t n = result.gradients.size();
    result.gradients[n - 2] = std::move(head_weight_grad);
    result.gradients[n - 1] = std::move(head_bias_grad);
  }
  return result;
}

std::vector<int> distinct_sorted(std::span<const int> labels) {
  std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

using BatchImages =
    std::function<std::vector<RepresentationImage>(std::span<const std::size_t>, int epoch)>;

const std::vector<real>& train_loop(EmbedderModel& model, TrainerState& state,
                                    std::span<const int> labels, const BatchImages& images_for,
                                    const TrainerConfig& cfg) {
  if (cfg.batch_size < 2) throw Error(ErrorKind::InvalidConfig, "batch size must be at least 2");
  const auto classes = distinct_sorted(labels);
  if (classes.size() < 2)
    throw Error(ErrorKind::SingleClassDataset, "training needs at least two classes");
  if (cfg.classifier_head && !model.classifier)
    attach_classifier(model, static_cast<Index>(classes.size()), derive_seed(cfg.seed, {7}));
  if (model.classifier && model.classifier->weight.rows() != static_cast<Index>(classes.size()))
    throw Error(ErrorKind::ShapeMismatch, "classifier head does not match the class count");
  state.seed = cfg.seed;

  auto named = model.parameters();
  std::vector<mat*> params;
  for (auto& [name, p] : named) params.push_back(p);

  const std::size_t n = labels.size();
  for (int epoch = state.epochs_completed; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);

    real total = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      if (end - start < 2) break;
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const auto images = images_for(idx, epoch);
      std::vector<int> batch_labels;
      for (std::size_t i : idx) batch_labels.push_back(labels[i]);

      BatchResult step = batch_step(model, images, batch_labels, cfg, classes);
      optimizer_step(params, step.gradients, state.optimizer, cfg.optimizer, cfg.learning_rate,
                     cfg.rmsprop);
      total += step.loss;
      ++batches;
    }
    state.history.push_back(batches > 0 ? total / batches : 0.0);
    state.epochs_completed = epoch + 1;
  }
  return state.history;
}

}  // namespace

BatchResult batch_loss_and_gradients(const EmbedderModel& model,
                                     std::span<const RepresentationImage> images,
                                     std::span<const int> labels, const TrainerConfig& cfg) {
  return batch_step(model, images, labels, cfg, distinct_sorted(labels));
}

const std::vector<real>& train(EmbedderModel& model, TrainerState& state,
                               std::span<const RepresentationImage> images,
                               std::span<const int> labels, const TrainerConfig& cfg) {
  if (images.size() != labels.size())
    throw Error(ErrorKind::ShapeMismatch, "image and label counts differ");
  if (cfg.augment_rotation)
    throw Error(ErrorKind::InvalidConfig, "rotation augmentation needs sequence input");
  const BatchImages pick = [&](std::span<const std::size_t> idx, int) {
    std::vector<RepresentationImage> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(images[i]);
    return out;
  };
  return train_loop(model, state, labels, pick, cfg);
}

const std::vector<real>& train(EmbedderModel& model, TrainerState& state,
                               std::span<const Sample> samples, const EncoderConfig& encoder,
                               const TrainerConfig& cfg) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const Sample& s : samples) labels.push_back(s.label);

  std::vector<RepresentationImage> cached;
  if (!cfg.augment_rotation) {
    cached.reserve(samples.size());
    for (const Sample& s : samples) cached.push_back(encode_bodies(s.bodies, encoder));
  }

  const BatchImages pick = [&](std::span<const std::size_t> idx, int epoch) {
    std::vector<RepresentationImage> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
      if (!cfg.augment_rotation) {
        out.push_back(cached[i]);
        continue;
      }
      const std::uint64_t seed =
          derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(epoch), i});
      std::vector<SkeletonSequence> rotated;
      for (const SkeletonSequence& body : samples[i].bodies)
        rotated.push_back(random_rotation(body, seed, cfg.rotation_max_deg));
      out.push_back(encode_bodies(rotated, encoder));
    }
    return out;
  };
  return train_loop(model, state, labels, pick, cfg);
}

}  // namespace sdml
