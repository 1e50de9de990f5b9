#include "sdml/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <map>
#include <sstream>

#include "sdml/error.hpp"
#include "sdml/io.hpp"

namespace sdml {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::string_view kMagic = "SDMLCKPT";
constexpr std::string_view kTrailer = "SDMLEND!";
constexpr std::uint8_t kDtypeF64 = 1;

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_text(std::string& out, std::string_view text) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.append(text);
}

void put_tensor(std::string& out, std::string_view name, const mat& m, int rank) {
  put_text(out, name);
  put<std::uint8_t>(out, kDtypeF64);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(rank));
  if (rank == 2) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  } else {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.size()));
  }
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (n > bytes_.size() - pos_)
      throw Error(ErrorKind::CorruptCheckpoint, "checkpoint truncated",
                  static_cast<std::int64_t>(pos_));
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <class T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)).data(), sizeof(T));
    return value;
  }

  std::string text() { return std::string(take(get<std::uint32_t>())); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

template <class T>
T kv_number(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw Error(ErrorKind::CorruptCheckpoint, "missing key " + key);
  T value{};
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::CorruptCheckpoint, "bad value for " + key);
  return value;
}

}  // namespace

std::string serialize_checkpoint(const EmbedderModel& model, const TrainerState& state) {
  std::string out;
  out.append(kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);

  const Index classes = model.classifier ? model.classifier->weight.rows() : 0;
  put_text(out, "architecture=" + model.architecture + "\nembedding_dim=" +
                    std::to_string(model.embedding_dim) + "\nclassifier_classes=" +
                    std::to_string(classes) + "\n");
  put_text(out, "epochs_completed=" + std::to_string(state.epochs_completed) +
                    "\nseed=" + std::to_string(state.seed) +
                    "\noptimizer_steps=" + std::to_string(state.optimizer.steps) + "\n");

  const auto params = model.parameters();
  const std::uint32_t count = static_cast<std::uint32_t>(
      params.size() + state.optimizer.mean_square.size() + 1);
  put<std::uint32_t>(out, count);
  for (const auto& [name, p] : params) put_tensor(out, name, *p, 2);
  for (std::size_t i = 0; i < state.optimizer.mean_square.size(); ++i)
    put_tensor(out, "optimizer.mean_square." + params.at(i).first, state.optimizer.mean_square[i],
               2);
  const mat history = Eigen::Map<const mat>(state.history.data(),
                                            static_cast<Index>(state.history.size()), 1);
  put_tensor(out, "trainer.history", history, 1);
  out.append(kTrailer);
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic)
    throw Error(ErrorKind::CorruptCheckpoint, "not a checkpoint (bad magic)");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw Error(ErrorKind::VersionMismatch,
                "checkpoint version " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion),
                version);

  const auto arch = parse_kv(in.text());
  const auto state_kv = parse_kv(in.text());
  const auto arch_it = arch.find("architecture");
  if (arch_it == arch.end()) throw Error(ErrorKind::CorruptCheckpoint, "missing architecture");

  Checkpoint ckpt;
  try {
    ckpt.model = build_model(arch_it->second, kv_number<Index>(arch, "embedding_dim"), 0,
                             InitScheme::Zero);
  } catch (const Error& e) {
    throw Error(ErrorKind::CorruptCheckpoint, std::string("bad architecture: ") + e.what());
  }
  const auto classes = kv_number<Index>(arch, "classifier_classes");
  if (classes > 0) attach_classifier(ckpt.model, classes, 0);

  ckpt.state.epochs_completed = kv_number<int>(state_kv, "epochs_completed");
  ckpt.state.seed = kv_number<std::uint64_t>(state_kv, "seed");
  ckpt.state.optimizer.steps = kv_number<long>(state_kv, "optimizer_steps");

  std::map<std::string, mat> tensors;
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name = in.text();
    if (in.get<std::uint8_t>() != kDtypeF64)
      throw Error(ErrorKind::CorruptCheckpoint, "unsupported dtype for " + name);
    const auto rank = in.get<std::uint32_t>();
    if (rank != 1 && rank != 2) throw Error(ErrorKind::CorruptCheckpoint, "bad rank for " + name);
    const auto rows = in.get<std::uint64_t>();
    const auto cols = rank == 2 ? in.get<std::uint64_t>() : 1;
    if (rows > bytes.size() || cols > bytes.size() ||
        (rows * cols) > bytes.size() / sizeof(double))
      throw Error(ErrorKind::CorruptCheckpoint, "implausible shape for " + name);
    mat m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = in.get<double>();
    tensors.emplace(std::move(name), std::move(m));
  }
  if (in.take(kTrailer.size()) != kTrailer || !in.done())
    throw Error(ErrorKind::CorruptCheckpoint, "missing trailer");

  const auto take_tensor = [&](const std::string& name, Index rows, Index cols) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw Error(ErrorKind::CorruptCheckpoint, "missing tensor " + name);
    if (it->second.rows() != rows || it->second.cols() != cols)
      throw Error(ErrorKind::CorruptCheckpoint, "shape mismatch for " + name);
    return std::move(it->second);
  };

  const auto params = ckpt.model.parameters();
  for (const auto& [name, p] : params) *p = take_tensor(name, p->rows(), p->cols());
  if (tensors.contains("optimizer.mean_square." + params.front().first)) {
    for (const auto& [name, p] : params)
      ckpt.state.optimizer.mean_square.push_back(
          take_tensor("optimizer.mean_square." + name, p->rows(), p->cols()));
  }
  const auto hist = tensors.find("trainer.history");
  if (hist == tensors.end()) throw Error(ErrorKind::CorruptCheckpoint, "missing history");
  ckpt.state.history.assign(hist->second.data(), hist->second.data() + hist->second.size());
  return ckpt;
}

void save_checkpoint(const EmbedderModel& model, const TrainerState& state,
                     const std::filesystem::path& path) {
  atomic_write(path, serialize_checkpoint(model, state));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace sdml
