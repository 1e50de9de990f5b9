#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdml/skeleton.hpp"

namespace sdml {

/// Parses the leading SxxxCxxxPxxxRxxxAxxx block of a file name (directories
/// and extensions are ignored). Returns nullopt when the pattern is absent.
std::optional<SampleMeta> parse_sample_name(std::string_view name);

/// Canonical 20-character stem, e.g. "S001C003P008R001A007".
std::string format_sample_name(const SampleMeta& meta);

/// Parses the NTU RGB+D plain-text skeleton layout. One sequence is returned
/// per distinct body id, in order of first appearance; bodies missing from a
/// frame are zero-filled there. Labels come from the A-field of `name`.
std::vector<SkeletonSequence> parse_ntu_skeleton(std::istream& in, std::string_view name);
std::vector<SkeletonSequence> parse_ntu_skeleton_text(std::string_view text,
                                                      std::string_view name);
std::vector<SkeletonSequence> parse_ntu_skeleton_file(const std::filesystem::path& path);

/// Writes `bodies` (equal length, NTU topology) in the same layout. Coordinates
/// are printed in shortest round-trip form.
std::string format_ntu_skeleton(const std::vector<SkeletonSequence>& bodies);

/// One capture: all bodies found in one file.
struct Sample {
  std::string id;
  int label = 0;
  SampleMeta meta;
  std::vector<SkeletonSequence> bodies;
};

/// Loads every `*.skeleton` file under `root` (sorted by file name).
/// Files whose name carries no action id are rejected with InvalidConfig.
std::vector<Sample> load_dataset(const std::filesystem::path& root);

enum class ReferenceRule {
  /// S001C003P008R001 for actions up to 60, S018C003P008R001 above.
  NtuPrefix,
  /// Lexicographically smallest sample name of the class.
  FirstByName,
};

struct ProtocolSpec {
  std::vector<int> novel_classes;
  std::vector<int> validation_classes;
  std::vector<int> allowed_auxiliary_sizes;  // empty: any size
  ReferenceRule reference_rule = ReferenceRule::NtuPrefix;

  /// One-shot protocol of NTU RGB+D 120.
  static ProtocolSpec ntu120();
};

struct ProtocolSplit {
  std::vector<int> auxiliary_classes;
  std::vector<int> novel_classes;
  std::map<int, std::string> reference_samples;
  std::vector<int> validation_classes;
};

ProtocolSplit build_split(const std::vector<SampleMeta>& catalog, const ProtocolSpec& spec,
                          int auxiliary_size);

/// `build_split` with the NTU RGB+D 120 one-shot protocol.
ProtocolSplit build_oneshot_split(const std::vector<SampleMeta>& catalog, int auxiliary_size);

/// Deterministic JSON document describing the split.
std::string split_manifest(const ProtocolSplit& split, std::uint64_t seed);

}  // namespace sdml
