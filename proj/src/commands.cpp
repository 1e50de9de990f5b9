#include "sdml/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <thread>

#include "sdml/checkpoint.hpp"
#include "sdml/error.hpp"
#include "sdml/io.hpp"

namespace sdml {

namespace fs = std::filesystem;

namespace {

std::string seed_line(std::uint64_t seed) { return "# seed=" + std::to_string(seed) + "\n"; }

std::vector<Sample> load_inputs(const RunConfig& cfg) {
  if (cfg.dataset_root.empty()) throw Error(ErrorKind::InvalidConfig, "dataset.root is not set");
  if (!fs::is_directory(cfg.dataset_root))
    throw Error(ErrorKind::Io, "dataset root does not exist: " + cfg.dataset_root.string());
  return load_dataset(cfg.dataset_root);
}

std::vector<SampleMeta> catalog_of(const std::vector<Sample>& samples) {
  std::vector<SampleMeta> catalog;
  catalog.reserve(samples.size());
  for (const Sample& s : samples) catalog.push_back(s.meta);
  return catalog;
}

// Runs fn(i) for i in [0, n) on thread_count() workers. The first exception
// thrown by any worker is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

int thread_count() {
  const char* env = std::getenv("SDML_NUM_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

RunConfig resolve_run_config(const CommandOptions& options) {
  if (!fs::is_regular_file(options.config))
    throw Error(ErrorKind::InvalidConfig, "config file not found: " + options.config.string());
  RunConfig cfg = load_run_config(options.config);
  if (options.out) cfg.output_dir = *options.out;
  if (options.seed) apply_seed(cfg, *options.seed);
  return cfg;
}

void cmd_encode(const RunConfig& cfg, std::ostream& log) {
  const auto samples = load_inputs(cfg);
  const fs::path image_dir = cfg.output_dir / "images";
  std::vector<std::string> rows(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Sample& s = samples[i];
    const RepresentationImage image = encode_bodies(s.bodies, cfg.experiment.encoder);
    const fs::path file = image_dir / (s.id + ".png");
    fs::path tmp = file;
    tmp += ".tmp";
    fs::create_directories(image_dir);
    write_png(image, tmp);
    fs::rename(tmp, file);
    rows[i] = s.id + "," + std::to_string(s.label) + ",images/" + s.id + ".png," +
              std::string(to_string(cfg.experiment.encoder.kind)) + "," +
              std::to_string(image.height()) + "," + std::to_string(image.width()) + "\n";
  });
  std::string manifest = seed_line(cfg.seed) + "sample_id,class,file,encoder,height,width\n";
  for (const auto& r : rows) manifest += r;
  atomic_write(cfg.output_dir / "manifest.csv", manifest);
  log << "encoded " << samples.size() << " captures into " << image_dir.string() << "\n";
}

void cmd_train(const RunConfig& cfg, const std::optional<fs::path>& resume, std::ostream& log) {
  const auto samples = load_inputs(cfg);
  const ProtocolSplit split =
      build_split(catalog_of(samples), cfg.experiment.protocol, cfg.auxiliary_size);
  const OneShotPartition part = partition_dataset(samples, split);
  const TrainerConfig& tc = cfg.experiment.trainer;

  EmbedderModel model;
  TrainerState state;
  if (resume) {
    Checkpoint ck = load_checkpoint(*resume);
    if (ck.state.seed != tc.seed)
      throw Error(ErrorKind::InvalidConfig, "checkpoint was trained with a different seed");
    if (ck.model.architecture != cfg.experiment.architecture ||
        ck.model.embedding_dim != tc.embedding_dim)
      throw Error(ErrorKind::InvalidConfig, "checkpoint architecture differs from the config");
    model = std::move(ck.model);
    state = std::move(ck.state);
  } else {
    model = build_model(cfg.experiment.architecture, tc.embedding_dim, tc.seed);
    state.seed = tc.seed;
  }

  train(model, state, std::span<const Sample>(part.training), cfg.experiment.encoder, tc);

  std::string csv = seed_line(cfg.seed) + "epoch,loss\n";
  for (std::size_t e = 0; e < state.history.size(); ++e)
    csv += std::to_string(e + 1) + "," + format_real(state.history[e]) + "\n";
  save_checkpoint(model, state, cfg.output_dir / "checkpoint.bin");
  atomic_write(cfg.output_dir / "loss_history.csv", csv);
  atomic_write(cfg.output_dir / "split.json", split_manifest(split, cfg.seed));
  log << "trained " << state.epochs_completed << " epochs on " << part.training.size()
      << " captures of " << split.auxiliary_classes.size() << " classes\n";
}

real cmd_eval(const RunConfig& cfg, const fs::path& checkpoint, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  const auto samples = load_inputs(cfg);
  const ProtocolSplit split =
      build_split(catalog_of(samples), cfg.experiment.protocol, cfg.auxiliary_size);
  const OneShotPartition part = partition_dataset(samples, split);
  const EncoderConfig& enc = cfg.experiment.encoder;

  const Gallery gallery = build_gallery(ck.model, part.references, enc, split.novel_classes);
  const auto& eval_set = cfg.eval_set == EvalSet::References ? part.references : part.queries;

  std::vector<RepresentationImage> images;
  std::vector<int> labels;
  std::vector<std::string> ids;
  for (const Sample& s : eval_set) {
    images.push_back(encode_bodies(s.bodies, enc));
    labels.push_back(s.label);
    ids.push_back(s.id);
  }
  const Embeddings emb = forward(ck.model, images);
  const EvalReport report =
      evaluate_embeddings(emb, labels, ids, gallery, cfg.experiment.classify);

  atomic_write(cfg.output_dir / "embeddings.csv",
               seed_line(cfg.seed) + embeddings_csv(ids, labels, emb));
  atomic_write(cfg.output_dir / "report.json", report_json(report, cfg.seed));
  out << "accuracy=" << format_real(report.accuracy) << "\n";
  return report.accuracy;
}

void cmd_reduce(const RunConfig& cfg, std::ostream& log) {
  if (cfg.sizes.empty()) throw Error(ErrorKind::InvalidConfig, "split.sizes is empty");
  const auto samples = load_inputs(cfg);
  std::vector<int> sizes = cfg.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  const auto runs = run_reduction_experiment(samples, sizes, cfg.experiment);
  std::string summary = seed_line(cfg.seed) + "size,accuracy\n";
  for (const OneShotRun& run : runs) {
    atomic_write(cfg.output_dir / ("report_size_" + std::to_string(run.auxiliary_size) + ".json"),
                 report_json(run.report, cfg.seed));
    summary += std::to_string(run.auxiliary_size) + "," + format_real(run.report.accuracy) + "\n";
    log << "size=" << run.auxiliary_size << " accuracy=" << format_real(run.report.accuracy)
        << "\n";
  }
  atomic_write(cfg.output_dir / "reduction_summary.csv", summary);
}

void cmd_ablate(const RunConfig& cfg, std::ostream& log) {
  const auto samples = load_inputs(cfg);
  const auto rows =
      run_ablation_grid(samples, cfg.auxiliary_size, cfg.experiment, cfg.ablation_dims);
  atomic_write(cfg.output_dir / "ablation_summary.csv", ablation_csv(rows, cfg.seed));
  log << "ablation grid: " << rows.size() << " runs\n";
}

void cmd_synth(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  const auto samples = make_synthetic_dataset(cfg.synth);
  write_dataset(samples, dir);
  log << "wrote " << samples.size() << " synthetic captures to " << dir.string() << "\n";
}

int run_command(const std::string& name, const CommandOptions& options, std::ostream& out,
                std::ostream& err) {
  try {
    const RunConfig cfg = resolve_run_config(options);
    if (name == "encode") {
      cmd_encode(cfg, out);
    } else if (name == "train") {
      cmd_train(cfg, options.checkpoint, out);
    } else if (name == "eval") {
      cmd_eval(cfg, options.checkpoint.value_or(cfg.output_dir / "checkpoint.bin"), out);
    } else if (name == "reduce") {
      cmd_reduce(cfg, out);
    } else if (name == "ablate") {
      cmd_ablate(cfg, out);
    } else if (name == "synth") {
      cmd_synth(cfg, options.out ? *options.out : cfg.dataset_root, out);
    } else {
      err << "error: unknown command '" << name << "'\n";
      return kExitUsage;
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::InvalidConfig ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace sdml
