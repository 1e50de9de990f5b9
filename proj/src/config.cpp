#include "sdml/config.hpp"

#include <charconv>
#include <sstream>

#include "sdml/error.hpp"
#include "sdml/io.hpp"
#include "sdml/seed.hpp"

namespace sdml {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw Error(ErrorKind::InvalidConfig, key + ": expected " + what + ", got '" + value + "'");
}

template <class T>
T parse_number(const std::string& key, std::string_view text, const char* what) {
  T out{};
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc{} || p != end || text.empty()) bad_value(key, std::string(text), what);
  return out;
}

ReferenceRule reference_rule_from_string(const std::string& key, const std::string& v) {
  if (v == "ntu_prefix") return ReferenceRule::NtuPrefix;
  if (v == "first_by_name") return ReferenceRule::FirstByName;
  bad_value(key, v, "ntu_prefix or first_by_name");
}

DistanceKind distance_from_string(const std::string& key, const std::string& v) {
  if (v == "euclidean") return DistanceKind::Euclidean;
  if (v == "cosine") return DistanceKind::Cosine;
  bad_value(key, v, "euclidean or cosine");
}

EvalSet eval_set_from_string(const std::string& key, const std::string& v) {
  if (v == "queries") return EvalSet::Queries;
  if (v == "references") return EvalSet::References;
  bad_value(key, v, "queries or references");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  long line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": missing '='",
                  line_no);
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": empty key",
                  line_no);
    if (cfg.values_.count(key))
      throw Error(ErrorKind::InvalidConfig,
                  "line " + std::to_string(line_no) + ": duplicate key '" + key + "'", line_no);
    cfg.values_.emplace(std::move(key), std::move(value));
  }
  return cfg;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  auto v = get(key);
  return v ? parse_number<long long>(key, *v, "an integer") : fallback;
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  return v ? parse_number<std::uint64_t>(key, *v, "a non-negative integer") : fallback;
}

real KeyValueConfig::get_real(const std::string& key, real fallback) const {
  auto v = get(key);
  return v ? parse_number<real>(key, *v, "a number") : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "on" || *v == "1") return true;
  if (*v == "false" || *v == "off" || *v == "0") return false;
  bad_value(key, *v, "true or false");
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              const std::vector<int>& fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::vector<int> out;
  std::string_view rest = *v;
  while (!trim(rest).empty()) {
    const auto comma = rest.find(',');
    std::string_view item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      std::string_view hi = item.substr(dots + 2);
      int step = 1;
      if (const auto colon = hi.find(':'); colon != std::string_view::npos) {
        step = parse_number<int>(key, trim(hi.substr(colon + 1)), "a range step");
        hi = hi.substr(0, colon);
      }
      const int a = parse_number<int>(key, trim(item.substr(0, dots)), "a range start");
      const int b = parse_number<int>(key, trim(hi), "a range end");
      if (step <= 0) bad_value(key, *v, "a positive range step");
      for (int x = a; x <= b; x += step) out.push_back(x);
    } else {
      out.push_back(parse_number<int>(key, item, "an integer list"));
    }
  }
  return out;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

void apply_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.experiment.trainer.seed = derive_seed(seed, {1});
  cfg.experiment.encoder.skepxel_seed = derive_seed(seed, {2});
  if (!cfg.synth_seed_explicit) cfg.synth.seed = derive_seed(seed, {3});
}

RunConfig run_config_from(const KeyValueConfig& kv, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  if (auto root = kv.get("dataset.root")) cfg.dataset_root = resolve(base_dir, *root);
  cfg.output_dir = resolve(base_dir, kv.get_string("output.dir", "out"));

  auto& protocol = cfg.experiment.protocol;
  const std::string proto = kv.get_string("protocol", "ntu120");
  if (proto == "ntu120") {
    protocol = ProtocolSpec::ntu120();
  } else if (proto != "custom") {
    bad_value("protocol", proto, "ntu120 or custom");
  } else {
    protocol.reference_rule = ReferenceRule::FirstByName;
  }
  protocol.novel_classes = kv.get_int_list("protocol.novel_classes", protocol.novel_classes);
  protocol.validation_classes =
      kv.get_int_list("protocol.validation_classes", protocol.validation_classes);
  protocol.allowed_auxiliary_sizes =
      kv.get_int_list("protocol.auxiliary_sizes", protocol.allowed_auxiliary_sizes);
  if (auto rule = kv.get("protocol.reference"))
    protocol.reference_rule = reference_rule_from_string("protocol.reference", *rule);

  cfg.auxiliary_size = static_cast<int>(kv.get_int("split.auxiliary_size", 0));
  cfg.sizes = kv.get_int_list("split.sizes", {});

  auto& enc = cfg.experiment.encoder;
  enc.kind = encoder_kind_from_string(kv.get_string("encoder.kind", std::string(to_string(enc.kind))));
  enc.target_length = kv.get_int("encoder.target_length", enc.target_length);
  enc.body_fusion = body_fusion_from_string(
      kv.get_string("encoder.body_fusion", std::string(to_string(enc.body_fusion))));
  enc.skepxel_count = static_cast<int>(kv.get_int("encoder.skepxel_count", enc.skepxel_count));

  cfg.experiment.architecture = kv.get_string("model.architecture", cfg.experiment.architecture);

  auto& tr = cfg.experiment.trainer;
  tr.batch_size = kv.get_int("trainer.batch_size", tr.batch_size);
  tr.epochs = static_cast<int>(kv.get_int("trainer.epochs", tr.epochs));
  tr.learning_rate = kv.get_real("trainer.learning_rate", tr.learning_rate);
  tr.optimizer = optimizer_kind_from_string(
      kv.get_string("trainer.optimizer", std::string(to_string(tr.optimizer))));
  tr.rmsprop.decay = kv.get_real("trainer.rmsprop.decay", tr.rmsprop.decay);
  tr.rmsprop.epsilon = kv.get_real("trainer.rmsprop.epsilon", tr.rmsprop.epsilon);
  tr.embedding_dim = kv.get_int("trainer.embedding_dim", tr.embedding_dim);
  tr.loss = loss_kind_from_string(kv.get_string("trainer.loss", std::string(to_string(tr.loss))));
  tr.miner.epsilon = kv.get_real("trainer.miner.epsilon", tr.miner.epsilon);
  tr.loss_params.alpha = kv.get_real("trainer.loss.alpha", tr.loss_params.alpha);
  tr.loss_params.beta = kv.get_real("trainer.loss.beta", tr.loss_params.beta);
  tr.loss_params.lambda = kv.get_real("trainer.loss.lambda", tr.loss_params.lambda);
  tr.loss_params.triplet_margin =
      kv.get_real("trainer.loss.triplet_margin", tr.loss_params.triplet_margin);
  tr.augment_rotation = kv.get_bool("trainer.augment_rotation", tr.augment_rotation);
  tr.rotation_max_deg = kv.get_real("trainer.rotation_max_deg", tr.rotation_max_deg);
  tr.normalize_embeddings = kv.get_bool("trainer.normalize_embeddings", tr.normalize_embeddings);
  tr.classifier_head = kv.get_bool("trainer.classifier_head", tr.classifier_head);

  auto& cl = cfg.experiment.classify;
  cl.distance =
      distance_from_string("eval.distance", kv.get_string("eval.distance", "euclidean"));
  if (kv.contains("eval.rejection_threshold"))
    cl.rejection_threshold = kv.get_real("eval.rejection_threshold", 0.0);
  cfg.eval_set = eval_set_from_string("eval.set", kv.get_string("eval.set", "queries"));

  const auto dims = kv.get_int_list("ablation.embedding_dims", {128, 256, 512});
  cfg.ablation_dims.assign(dims.begin(), dims.end());

  auto& sy = cfg.synth;
  sy.classes = static_cast<int>(kv.get_int("synth.classes", sy.classes));
  sy.first_class = static_cast<int>(kv.get_int("synth.first_class", sy.first_class));
  sy.samples_per_class =
      static_cast<int>(kv.get_int("synth.samples_per_class", sy.samples_per_class));
  sy.frames = kv.get_int("synth.frames", sy.frames);
  sy.active_joints = static_cast<int>(kv.get_int("synth.active_joints", sy.active_joints));
  sy.primitives = static_cast<int>(kv.get_int("synth.primitives", sy.primitives));
  sy.primitives_per_class =
      static_cast<int>(kv.get_int("synth.primitives_per_class", sy.primitives_per_class));
  sy.noise_sigma = kv.get_real("synth.noise_sigma", sy.noise_sigma);
  sy.phase_jitter = kv.get_real("synth.phase_jitter", sy.phase_jitter);
  sy.yaw_jitter_deg = kv.get_real("synth.yaw_jitter_deg", sy.yaw_jitter_deg);
  sy.pose_jitter = kv.get_real("synth.pose_jitter", sy.pose_jitter);
  if (auto s = kv.get("synth.seed")) {
    sy.seed = parse_number<std::uint64_t>("synth.seed", *s, "a non-negative integer");
    cfg.synth_seed_explicit = true;
  }

  apply_seed(cfg, kv.get_uint("seed", 0));

  if (tr.batch_size < 2) bad_value("trainer.batch_size", std::to_string(tr.batch_size), ">= 2");
  if (tr.epochs < 0) bad_value("trainer.epochs", std::to_string(tr.epochs), ">= 0");
  if (tr.embedding_dim < 1)
    bad_value("trainer.embedding_dim", std::to_string(tr.embedding_dim), ">= 1");
  if (enc.target_length < 1)
    bad_value("encoder.target_length", std::to_string(enc.target_length), ">= 1");

  if (auto unused = kv.unused_keys(); !unused.empty())
    throw Error(ErrorKind::InvalidConfig, "unknown key '" + unused.front() + "'");
  return cfg;
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  return run_config_from(KeyValueConfig::parse(text), base_dir);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path), path.parent_path());
}

}  // namespace sdml
