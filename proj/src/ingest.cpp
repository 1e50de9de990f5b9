#include "sdml/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sdml/error.hpp"

namespace sdml {

namespace {

constexpr int kNtuJoints = 25;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <class T>
std::optional<T> parse_number(std::string_view field) {
  T value{};
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-blank line, or nullopt at end of input.
  std::optional<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
    }
    return std::nullopt;
  }

  std::int64_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::int64_t line_no_ = 0;
};

int parse_count(const std::string& line, std::int64_t line_no) {
  const auto fields = split_fields(line);
  if (fields.size() != 1) throw Error(ErrorKind::NonNumericField, "expected a count", line_no);
  const auto value = parse_number<long>(fields[0]);
  if (!value || *value < 0) throw Error(ErrorKind::NonNumericField, "expected a count", line_no);
  return static_cast<int>(*value);
}

int parse_field(std::string_view s, std::size_t pos, char tag) {
  if (pos >= s.size() || s[pos] != tag) return -1;
  const auto v = parse_number<int>(s.substr(pos + 1, 3));
  return v.value_or(-1);
}

}  // namespace

std::optional<SampleMeta> parse_sample_name(std::string_view name) {
  const auto slash = name.find_last_of("/\\");
  if (slash != std::string_view::npos) name.remove_prefix(slash + 1);
  if (name.size() < 20) return std::nullopt;

  SampleMeta meta;
  meta.setup = parse_field(name, 0, 'S');
  meta.camera = parse_field(name, 4, 'C');
  meta.performer = parse_field(name, 8, 'P');
  meta.replication = parse_field(name, 12, 'R');
  meta.action = parse_field(name, 16, 'A');
  if (meta.setup < 0 || meta.camera < 0 || meta.performer < 0 || meta.replication < 0 ||
      meta.action < 1)
    return std::nullopt;
  const auto dot = name.find('.');
  meta.source_name = std::string(name.substr(0, dot));
  return meta;
}

std::string format_sample_name(const SampleMeta& meta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "S%03dC%03dP%03dR%03dA%03d", meta.setup, meta.camera,
                meta.performer, meta.replication, meta.action);
  return buf;
}

std::vector<SkeletonSequence> parse_ntu_skeleton(std::istream& in, std::string_view name) {
  LineReader reader(in);
  const auto header = reader.next();
  if (!header) throw Error(ErrorKind::MalformedHeader, "missing frame count", 1);
  const auto header_fields = split_fields(*header);
  const auto frame_count =
      header_fields.size() == 1 ? parse_number<long>(header_fields[0]) : std::nullopt;
  if (!frame_count || *frame_count < 0)
    throw Error(ErrorKind::MalformedHeader, "first line must hold the frame count",
                reader.line_no());

  std::vector<std::string> body_ids;
  std::vector<std::vector<std::optional<Joints>>> body_frames;

  const auto require = [&](long frame) {
    auto line = reader.next();
    if (!line)
      throw Error(ErrorKind::TruncatedFrame, "input ends inside frame " + std::to_string(frame),
                  frame);
    return *line;
  };

  for (long f = 0; f < *frame_count; ++f) {
    const int bodies = parse_count(require(f), reader.line_no());
    for (int b = 0; b < bodies; ++b) {
      const std::string info = require(f);
      const auto info_fields = split_fields(info);
      const std::string id(info_fields.front());

      const int joints = parse_count(require(f), reader.line_no());
      if (joints != kNtuJoints)
        throw Error(ErrorKind::MalformedHeader,
                    "expected 25 joints, found " + std::to_string(joints), reader.line_no());

      Joints frame(joints, 3);
      for (int j = 0; j < joints; ++j) {
        const std::string line = require(f);
        const auto fields = split_fields(line);
        if (fields.size() < 3)
          throw Error(ErrorKind::NonNumericField, "joint line needs x y z", reader.line_no());
        for (int a = 0; a < 3; ++a) {
          const auto v = parse_number<double>(fields[a]);
          if (!v) throw Error(ErrorKind::NonNumericField, std::string(fields[a]), reader.line_no());
          frame(j, a) = *v;
        }
      }

      auto it = std::find(body_ids.begin(), body_ids.end(), id);
      std::size_t index = static_cast<std::size_t>(it - body_ids.begin());
      if (it == body_ids.end()) {
        body_ids.push_back(id);
        body_frames.emplace_back(static_cast<std::size_t>(*frame_count));
      }
      body_frames[index][static_cast<std::size_t>(f)] = std::move(frame);
    }
  }

  const auto meta = parse_sample_name(name);
  std::vector<SkeletonSequence> out;
  out.reserve(body_ids.size());
  for (auto& frames : body_frames) {
    SkeletonSequence seq;
    seq.topology = SkeletonTopology::ntu25();
    seq.meta = meta;
    if (meta) seq.label = meta->action;
    seq.frames.reserve(frames.size());
    for (auto& frame : frames)
      seq.frames.push_back(frame ? std::move(*frame) : Joints(Joints::Zero(kNtuJoints, 3)));
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<SkeletonSequence> parse_ntu_skeleton_text(std::string_view text,
                                                      std::string_view name) {
  std::istringstream in{std::string(text)};
  return parse_ntu_skeleton(in, name);
}

std::vector<SkeletonSequence> parse_ntu_skeleton_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_ntu_skeleton(in, path.filename().string());
}

std::string format_ntu_skeleton(const std::vector<SkeletonSequence>& bodies) {
  const std::size_t frames = bodies.empty() ? 0 : bodies.front().frames.size();
  std::string out = std::to_string(frames) + "\n";
  char buf[64];
  const auto put = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
  };
  for (std::size_t f = 0; f < frames; ++f) {
    out += std::to_string(bodies.size()) + "\n";
    for (std::size_t b = 0; b < bodies.size(); ++b) {
      const Joints& joints = bodies[b].frames.at(f);
      out += std::to_string(72057594037931000ULL + b) + " 0 1 1 1 1 0 0 0 2\n";
      out += std::to_string(joints.rows()) + "\n";
      for (Index j = 0; j < joints.rows(); ++j) {
        for (int a = 0; a < 3; ++a) {
          put(joints(j, a));
          out += ' ';
        }
        out += "0 0 0 0 0 0 0 0 2\n";
      }
    }
  }
  return out;
}

std::vector<Sample> load_dataset(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw Error(ErrorKind::Io, "not a directory: " + root.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_regular_file() && entry.path().extension() == ".skeleton")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<Sample> out;
  out.reserve(files.size());
  for (const auto& file : files) {
    const auto meta = parse_sample_name(file.filename().string());
    if (!meta)
      throw Error(ErrorKind::InvalidConfig, "file name lacks an action id: " + file.string());
    Sample sample;
    sample.id = meta->source_name;
    sample.label = meta->action;
    sample.meta = *meta;
    sample.bodies = parse_ntu_skeleton_file(file);
    for (auto& body : sample.bodies) body = validate_sequence(body);
    out.push_back(std::move(sample));
  }
  return out;
}

ProtocolSpec ProtocolSpec::ntu120() {
  ProtocolSpec spec;
  for (int a = 1; a <= 115; a += 6) spec.novel_classes.push_back(a);
  for (int a = 2; a <= 116; a += 6) spec.validation_classes.push_back(a);
  spec.allowed_auxiliary_sizes = {20, 40, 60, 80, 100};
  spec.reference_rule = ReferenceRule::NtuPrefix;
  return spec;
}

ProtocolSplit build_split(const std::vector<SampleMeta>& catalog, const ProtocolSpec& spec,
                          int auxiliary_size) {
  if (!spec.allowed_auxiliary_sizes.empty() &&
      std::find(spec.allowed_auxiliary_sizes.begin(), spec.allowed_auxiliary_sizes.end(),
                auxiliary_size) == spec.allowed_auxiliary_sizes.end())
    throw Error(ErrorKind::UnknownAuxiliarySize,
                "auxiliary size " + std::to_string(auxiliary_size) + " is not allowed",
                auxiliary_size);
  if (auxiliary_size < 1)
    throw Error(ErrorKind::UnknownAuxiliarySize, "auxiliary size must be positive",
                auxiliary_size);

  ProtocolSplit split;
  split.novel_classes = spec.novel_classes;
  std::sort(split.novel_classes.begin(), split.novel_classes.end());
  split.validation_classes = spec.validation_classes;
  std::sort(split.validation_classes.begin(), split.validation_classes.end());
  const std::set<int> novel(split.novel_classes.begin(), split.novel_classes.end());

  for (int cls : split.novel_classes) {
    std::optional<std::string> chosen;
    for (const SampleMeta& m : catalog) {
      if (m.action != cls) continue;
      bool eligible = true;
      if (spec.reference_rule == ReferenceRule::NtuPrefix) {
        const int setup = cls <= 60 ? 1 : 18;
        eligible = m.setup == setup && m.camera == 3 && m.performer == 8 && m.replication == 1;
      }
      if (eligible && (!chosen || m.source_name < *chosen)) chosen = m.source_name;
    }
    if (!chosen)
      throw Error(ErrorKind::MissingReferenceSample,
                  "no reference sample for class " + std::to_string(cls), cls);
    split.reference_samples.emplace(cls, *chosen);
  }

  std::set<int> remaining;
  for (const SampleMeta& m : catalog)
    if (!novel.contains(m.action)) remaining.insert(m.action);
  if (static_cast<int>(remaining.size()) < auxiliary_size)
    throw Error(ErrorKind::UnknownAuxiliarySize,
                "catalog holds only " + std::to_string(remaining.size()) +
                    " non-novel classes",
                auxiliary_size);
  auto it = remaining.begin();
  for (int i = 0; i < auxiliary_size; ++i, ++it) split.auxiliary_classes.push_back(*it);
  return split;
}

ProtocolSplit build_oneshot_split(const std::vector<SampleMeta>& catalog, int auxiliary_size) {
  return build_split(catalog, ProtocolSpec::ntu120(), auxiliary_size);
}

std::string split_manifest(const ProtocolSplit& split, std::uint64_t seed) {
  nlohmann::ordered_json doc;
  doc["seed"] = seed;
  doc["auxiliary_classes"] = split.auxiliary_classes;
  doc["novel_classes"] = split.novel_classes;
  doc["validation_classes"] = split.validation_classes;
  nlohmann::ordered_json refs = nlohmann::ordered_json::object();
  for (const auto& [cls, name] : split.reference_samples) refs[std::to_string(cls)] = name;
  doc["reference_samples"] = refs;
  return doc.dump(2) + "\n";
}

}  // namespace sdml
