#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sdml/oneshot.hpp"
#include "sdml/synthetic.hpp"

namespace sdml {

/// Flat `key = value` text with `#` comments. Keys are dotted
/// (`trainer.epochs`); repeated keys are rejected.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  real get_real(const std::string& key, real fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated integers; `a..b` and `a..b:step` expand to ranges.
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  /// Keys present in the file but never read.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

enum class EvalSet {
  Queries,     // remaining captures of the novel classes
  References,  // the reference captures themselves
};

struct RunConfig {
  std::filesystem::path dataset_root;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  ExperimentConfig experiment;
  int auxiliary_size = 0;
  std::vector<int> sizes;  // reduce
  std::vector<Index> ablation_dims{128, 256, 512};
  EvalSet eval_set = EvalSet::Queries;
  SynthDatasetConfig synth;
  bool synth_seed_explicit = false;
};

/// Builds a RunConfig. Relative paths resolve against `base_dir`. Unknown
/// keys and malformed values raise InvalidConfig.
RunConfig run_config_from(const KeyValueConfig& kv, const std::filesystem::path& base_dir);
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Re-derives every seeded component from `seed` (an explicit synth.seed
/// is kept).
void apply_seed(RunConfig& cfg, std::uint64_t seed);

}  // namespace sdml
