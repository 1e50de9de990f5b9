#include "sdml/oneshot.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <nlohmann/json.hpp>

#include "sdml/error.hpp"
#include "sdml/io.hpp"

namespace sdml {

namespace {

std::vector<RepresentationImage> encode_all(std::span<const Sample> samples,
                                            const EncoderConfig& encoder) {
  std::vector<RepresentationImage> images;
  images.reserve(samples.size());
  for (const Sample& s : samples) images.push_back(encode_bodies(s.bodies, encoder));
  return images;
}

}  // namespace

EmbedFn model_embedder(const EmbedderModel& model) {
  return [&model](std::span<const RepresentationImage> images) { return forward(model, images); };
}

Gallery build_gallery(const EmbedFn& embed, std::span<const Sample> references,
                      const EncoderConfig& encoder, std::span<const int> required_classes) {
  std::set<int> seen;
  for (const Sample& s : references)
    if (!seen.insert(s.label).second)
      throw Error(ErrorKind::DuplicateClass,
                  "class " + std::to_string(s.label) + " has more than one reference", s.label);
  for (int cls : required_classes)
    if (!seen.contains(cls))
      throw Error(ErrorKind::MissingClass, "no reference for class " + std::to_string(cls), cls);

  const auto images = encode_all(references, encoder);
  const Embeddings emb = images.empty() ? Embeddings() : embed(images);

  Gallery gallery;
  for (std::size_t i = 0; i < references.size(); ++i)
    gallery.entries.push_back(
        {references[i].label, emb.row(static_cast<Index>(i)).transpose(), references[i].id});
  std::sort(gallery.entries.begin(), gallery.entries.end(),
            [](const GalleryEntry& a, const GalleryEntry& b) { return a.class_id < b.class_id; });
  return gallery;
}

Gallery build_gallery(const EmbedderModel& model, std::span<const Sample> references,
                      const EncoderConfig& encoder, std::span<const int> required_classes) {
  return build_gallery(model_embedder(model), references, encoder, required_classes);
}

real embedding_distance(const vec& a, const vec& b, DistanceKind kind) {
  if (kind == DistanceKind::Euclidean) return (a - b).norm();
  const real denom = a.norm() * b.norm();
  if (denom == 0.0) return 1.0;
  return 1.0 - a.dot(b) / denom;
}

Classification classify(const vec& query, const Gallery& gallery, const ClassifyOptions& options) {
  if (gallery.entries.empty()) throw Error(ErrorKind::EmptyGallery, "gallery has no entries");
  if (query.size() != gallery.dim())
    throw Error(ErrorKind::DimMismatch,
                "query has " + std::to_string(query.size()) + " dims, gallery " +
                    std::to_string(gallery.dim()),
                query.size(), gallery.dim());

  Classification best{0, std::numeric_limits<real>::infinity(), false};
  bool found = false;
  for (const GalleryEntry& e : gallery.entries) {
    const real d = embedding_distance(query, e.embedding, options.distance);
    if (!found || d < best.distance || (d == best.distance && e.class_id < best.class_id)) {
      best.class_id = e.class_id;
      best.distance = d;
      found = true;
    }
  }
  if (options.rejection_threshold && best.distance > *options.rejection_threshold)
    best.rejected = true;
  return best;
}

EvalReport evaluate_embeddings(const Embeddings& queries, std::span<const int> labels,
                               std::span<const std::string> ids, const Gallery& gallery,
                               const ClassifyOptions& options) {
  if (queries.rows() != static_cast<Index>(labels.size()))
    throw Error(ErrorKind::ShapeMismatch, "query and label counts differ");

  EvalReport report;
  for (const GalleryEntry& e : gallery.entries) report.classes.push_back(e.class_id);
  const auto index_of = [&](int cls) -> Index {
    const auto it = std::find(report.classes.begin(), report.classes.end(), cls);
    if (it == report.classes.end())
      throw Error(ErrorKind::UnknownLabel, "label " + std::to_string(cls) + " not in gallery",
                  cls);
    return it - report.classes.begin();
  };

  const Index u = static_cast<Index>(report.classes.size());
  report.confusion.setZero(u, u);
  for (int cls : report.classes) report.per_class[cls] = {0, 0};

  long correct = 0;
  real correct_dist = 0.0, incorrect_dist = 0.0;
  for (Index i = 0; i < queries.rows(); ++i) {
    const int truth = labels[static_cast<std::size_t>(i)];
    const Index row = index_of(truth);
    const Classification c = classify(queries.row(i).transpose(), gallery, options);
    const bool ok = c.class_id == truth && !c.rejected;
    report.confusion(row, index_of(c.class_id)) += 1;
    auto& [pc_correct, pc_total] = report.per_class[truth];
    ++pc_total;
    if (ok) {
      ++pc_correct;
      ++correct;
      correct_dist += c.distance;
    } else {
      incorrect_dist += c.distance;
    }
    if (c.rejected) ++report.rejected;
    report.predictions.push_back(
        {i < static_cast<Index>(ids.size()) ? ids[static_cast<std::size_t>(i)] : std::string(),
         truth, c.class_id, c.distance, c.rejected});
  }
  const long total = static_cast<long>(queries.rows());
  report.accuracy = total > 0 ? static_cast<real>(correct) / static_cast<real>(total) : 0.0;
  report.mean_correct_distance = correct > 0 ? correct_dist / static_cast<real>(correct) : 0.0;
  report.mean_incorrect_distance =
      total > correct ? incorrect_dist / static_cast<real>(total - correct) : 0.0;
  return report;
}

EvalReport evaluate(const EmbedFn& embed, std::span<const Sample> eval_set,
                    const Gallery& gallery, const EncoderConfig& encoder,
                    const ClassifyOptions& options) {
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (const Sample& s : eval_set) {
    labels.push_back(s.label);
    ids.push_back(s.id);
  }
  const auto images = encode_all(eval_set, encoder);
  const Embeddings emb = images.empty() ? Embeddings(0, gallery.dim()) : embed(images);
  return evaluate_embeddings(emb, labels, ids, gallery, options);
}

EvalReport evaluate(const EmbedderModel& model, std::span<const Sample> eval_set,
                    const Gallery& gallery, const EncoderConfig& encoder,
                    const ClassifyOptions& options) {
  return evaluate(model_embedder(model), eval_set, gallery, encoder, options);
}

std::string report_json(const EvalReport& report, std::uint64_t seed) {
  nlohmann::ordered_json doc;
  doc["seed"] = seed;
  doc["accuracy"] = report.accuracy;
  doc["classes"] = report.classes;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (const auto& [cls, counts] : report.per_class)
    per_class[std::to_string(cls)] = {{"correct", counts.first}, {"total", counts.second}};
  doc["per_class"] = per_class;
  nlohmann::ordered_json confusion = nlohmann::ordered_json::array();
  for (Index r = 0; r < report.confusion.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Index c = 0; c < report.confusion.cols(); ++c) row.push_back(report.confusion(r, c));
    confusion.push_back(row);
  }
  doc["confusion"] = confusion;
  doc["mean_correct_distance"] = report.mean_correct_distance;
  doc["mean_incorrect_distance"] = report.mean_incorrect_distance;
  doc["rejected"] = report.rejected;
  nlohmann::ordered_json preds = nlohmann::ordered_json::array();
  for (const Prediction& p : report.predictions)
    preds.push_back({{"sample", p.sample_id},
                     {"true", p.true_class},
                     {"predicted", p.predicted_class},
                     {"distance", p.distance}});
  doc["predictions"] = preds;
  return doc.dump(2) + "\n";
}

std::string embeddings_csv(std::span<const std::string> ids, std::span<const int> labels,
                           const Embeddings& embeddings) {
  std::string out = "sample_id,class";
  for (Index k = 0; k < embeddings.cols(); ++k) out += ",e" + std::to_string(k);
  out += "\n";
  for (Index i = 0; i < embeddings.rows(); ++i) {
    out += ids[static_cast<std::size_t>(i)] + "," +
           std::to_string(labels[static_cast<std::size_t>(i)]);
    for (Index k = 0; k < embeddings.cols(); ++k) out += "," + format_real(embeddings(i, k));
    out += "\n";
  }
  return out;
}

OneShotPartition partition_dataset(std::span<const Sample> dataset, const ProtocolSplit& split) {
  const std::set<int> aux(split.auxiliary_classes.begin(), split.auxiliary_classes.end());
  const std::set<int> novel(split.novel_classes.begin(), split.novel_classes.end());
  std::set<std::string> reference_ids;
  for (const auto& [cls, id] : split.reference_samples) reference_ids.insert(id);

  OneShotPartition part;
  for (const Sample& s : dataset) {
    if (aux.contains(s.label)) {
      part.training.push_back(s);
    } else if (novel.contains(s.label)) {
      if (reference_ids.contains(s.id)) part.references.push_back(s);
      else part.queries.push_back(s);
    }
  }
  return part;
}

OneShotRun run_oneshot(std::span<const Sample> dataset, int auxiliary_size,
                       const ExperimentConfig& cfg, bool trained) {
  std::vector<SampleMeta> catalog;
  for (const Sample& s : dataset) catalog.push_back(s.meta);

  OneShotRun run;
  run.auxiliary_size = auxiliary_size;
  run.split = build_split(catalog, cfg.protocol, auxiliary_size);
  const OneShotPartition part = partition_dataset(dataset, run.split);

  EmbedderModel model = build_model(cfg.architecture, cfg.trainer.embedding_dim, cfg.trainer.seed);
  if (trained) {
    TrainerState state;
    run.history = train(model, state, std::span<const Sample>(part.training), cfg.encoder,
                        cfg.trainer);
  }
  const Gallery gallery = build_gallery(model, part.references, cfg.encoder,
                                        run.split.novel_classes);
  run.report = evaluate(model, part.queries, gallery, cfg.encoder, cfg.classify);
  return run;
}

std::vector<OneShotRun> run_reduction_experiment(std::span<const Sample> dataset,
                                                 std::span<const int> sizes,
                                                 const ExperimentConfig& cfg) {
  std::vector<OneShotRun> runs;
  for (int size : sizes) runs.push_back(run_oneshot(dataset, size, cfg));
  return runs;
}

std::vector<AblationRow> run_ablation_grid(std::span<const Sample> dataset, int auxiliary_size,
                                           const ExperimentConfig& cfg,
                                           std::span<const Index> embedding_dims) {
  std::vector<AblationRow> rows;
  for (LossKind loss : {LossKind::MultiSimilarity, LossKind::TripletMargin})
    for (bool augment : {false, true})
      for (Index dim : embedding_dims) {
        ExperimentConfig run_cfg = cfg;
        run_cfg.trainer.loss = loss;
        run_cfg.trainer.augment_rotation = augment;
        run_cfg.trainer.embedding_dim = dim;
        const OneShotRun run = run_oneshot(dataset, auxiliary_size, run_cfg);
        rows.push_back({loss, augment, dim, run.report.accuracy});
      }
  return rows;
}

std::string ablation_csv(std::span<const AblationRow> rows, std::uint64_t seed) {
  std::string out = "# seed=" + std::to_string(seed) + "\nloss,augment,embedding_dim,accuracy\n";
  for (const AblationRow& r : rows)
    out += std::string(to_string(r.loss)) + "," + (r.augment ? "rot" : "none") + "," +
           std::to_string(r.embedding_dim) + "," + format_real(r.accuracy) + "\n";
  return out;
}

}  // namespace sdml
