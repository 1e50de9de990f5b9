#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdml/config.hpp"

namespace sdml {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

/// Worker count from SDML_NUM_THREADS (default 1).
int thread_count();

/// Options shared by every subcommand; `out` and `seed` override the file.
struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve_run_config(const CommandOptions& options);

/// Encodes every capture of the dataset to `<out>/images/<id>.png` and writes
/// `<out>/manifest.csv`.
void cmd_encode(const RunConfig& cfg, std::ostream& log);

/// Trains on the auxiliary classes of the split and writes
/// `<out>/checkpoint.bin`, `<out>/loss_history.csv` and `<out>/split.json`.
/// With `resume`, training continues from that checkpoint.
void cmd_train(const RunConfig& cfg, const std::optional<std::filesystem::path>& resume,
               std::ostream& log);

/// Evaluates a checkpoint on the novel classes; writes `<out>/report.json`
/// and `<out>/embeddings.csv` and prints "accuracy=<value>".
real cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint, std::ostream& out);

/// One `<out>/report_size_<n>.json` per auxiliary size plus
/// `<out>/reduction_summary.csv`, ascending by size.
void cmd_reduce(const RunConfig& cfg, std::ostream& log);

/// Loss x augmentation x embedding size grid to `<out>/ablation_summary.csv`.
void cmd_ablate(const RunConfig& cfg, std::ostream& log);

/// Writes the configured synthetic dataset under `dir` as NTU-layout files.
void cmd_synth(const RunConfig& cfg, const std::filesystem::path& dir, std::ostream& log);

/// Runs a named subcommand, mapping failures to exit codes: InvalidConfig
/// is a usage error, every other failure a data error.
int run_command(const std::string& name, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace sdml
