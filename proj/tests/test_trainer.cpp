#include <doctest.h>

#include <filesystem>

#include "sdml/checkpoint.hpp"
#include "sdml/error.hpp"
#include "sdml/io.hpp"
#include "sdml/synthetic.hpp"
#include "sdml/trainer.hpp"

using namespace sdml;

namespace {

constexpr const char* kSmall = "conv:4,relu,maxpool,gap,dense:16,relu,embed";

std::vector<Sample> two_class_set() {
  SynthDatasetConfig cfg;
  cfg.classes = 2;
  cfg.samples_per_class = 10;
  cfg.frames = 12;
  cfg.primitives = 4;
  cfg.seed = 5;
  return make_synthetic_dataset(cfg);
}

EncoderConfig small_encoder() {
  EncoderConfig e;
  e.target_length = 12;
  return e;
}

TrainerConfig small_trainer(int epochs) {
  TrainerConfig t;
  t.batch_size = 8;
  t.epochs = epochs;
  t.learning_rate = 1e-3;
  t.embedding_dim = 8;
  t.seed = 17;
  return t;
}

bool same_parameters(const EmbedderModel& a, const EmbedderModel& b) {
  const auto pa = a.parameters(), pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (pa[i].first != pb[i].first || *pa[i].second != *pb[i].second) return false;
  return true;
}

double max_parameter_diff(const EmbedderModel& a, const EmbedderModel& b) {
  const auto pa = a.parameters(), pb = b.parameters();
  double m = 0;
  for (std::size_t i = 0; i < pa.size(); ++i)
    m = std::max(m, (*pa[i].second - *pb[i].second).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("zero learning rate leaves the model untouched") {
  const auto data = two_class_set();
  auto model = build_model(kSmall, 8, 1);
  const auto initial = model;
  auto cfg = small_trainer(2);
  cfg.learning_rate = 0.0;
  TrainerState state;
  train(model, state, std::span<const Sample>(data), small_encoder(), cfg);
  CHECK(same_parameters(model, initial));
  CHECK(state.history.size() == 2);
}

TEST_CASE("loss falls on a separable two-class set") {
  const auto data = two_class_set();
  auto model = build_model(kSmall, 8, 1);
  TrainerState state;
  const auto& h = train(model, state, std::span<const Sample>(data), small_encoder(),
                        small_trainer(50));
  REQUIRE(h.size() == 50);
  CHECK(h.back() < h.front());
  double first = 0, last = 0;
  for (int e = 0; e < 10; ++e) {
    first += h[e];
    last += h[40 + e];
  }
  CHECK(last < first);
}

TEST_CASE("training is reproducible") {
  const auto data = two_class_set();
  auto a = build_model(kSmall, 8, 1), b = build_model(kSmall, 8, 1);
  TrainerState sa, sb;
  auto cfg = small_trainer(4);
  cfg.augment_rotation = true;
  train(a, sa, std::span<const Sample>(data), small_encoder(), cfg);
  train(b, sb, std::span<const Sample>(data), small_encoder(), cfg);
  CHECK(sa.history == sb.history);
  CHECK(same_parameters(a, b));
}

TEST_CASE("single-class data is rejected") {
  auto data = two_class_set();
  std::erase_if(data, [](const Sample& s) { return s.label != 1; });
  auto model = build_model(kSmall, 8, 1);
  TrainerState state;
  try {
    train(model, state, std::span<const Sample>(data), small_encoder(), small_trainer(1));
    FAIL("expected SingleClassDataset");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingleClassDataset);
  }
}

TEST_CASE("classifier head and triplet loss train") {
  const auto data = two_class_set();
  auto model = build_model(kSmall, 8, 1);
  TrainerState state;
  auto cfg = small_trainer(3);
  cfg.classifier_head = true;
  cfg.loss = LossKind::TripletMargin;
  train(model, state, std::span<const Sample>(data), small_encoder(), cfg);
  REQUIRE(model.classifier);
  CHECK(model.classifier->weight.rows() == 2);
  CHECK(std::isfinite(state.history.back()));
}

TEST_CASE("checkpoint round trip is bitwise") {
  const auto data = two_class_set();
  auto model = build_model(kSmall, 8, 1);
  TrainerState state;
  train(model, state, std::span<const Sample>(data), small_encoder(), small_trainer(2));
  const std::string bytes = serialize_checkpoint(model, state);
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(same_parameters(back.model, model));
  CHECK(back.model.architecture == model.architecture);
  CHECK(back.state.optimizer == state.optimizer);
  CHECK(back.state.history == state.history);
  CHECK(back.state.epochs_completed == 2);
  CHECK(back.state.seed == state.seed);
  CHECK(serialize_checkpoint(back.model, back.state) == bytes);
}

TEST_CASE("damaged checkpoints are rejected") {
  const auto model = build_model(kSmall, 8, 1);
  const std::string bytes = serialize_checkpoint(model, TrainerState{});
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{12}, bytes.size() / 2,
                          bytes.size() - 1}) {
    try {
      deserialize_checkpoint(std::string_view(bytes).substr(0, cut));
      FAIL("expected CorruptCheckpoint at " << cut);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::CorruptCheckpoint);
    }
  }
  std::string newer = bytes;
  newer[8] = 2;  // version field follows the 8-byte magic
  try {
    deserialize_checkpoint(newer);
    FAIL("expected VersionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::VersionMismatch);
  }
}

TEST_CASE("checkpoint files and resume equivalence") {
  const auto data = two_class_set();
  const auto dir = std::filesystem::temp_directory_path() / "sdml_resume_test";
  std::filesystem::remove_all(dir);

  auto unbroken = build_model(kSmall, 8, 1);
  TrainerState su;
  train(unbroken, su, std::span<const Sample>(data), small_encoder(), small_trainer(6));

  auto first = build_model(kSmall, 8, 1);
  TrainerState sf;
  train(first, sf, std::span<const Sample>(data), small_encoder(), small_trainer(3));
  save_checkpoint(first, sf, dir / "mid.bin");
  CHECK_FALSE(std::filesystem::exists(dir / "mid.bin.tmp"));

  Checkpoint ck = load_checkpoint(dir / "mid.bin");
  train(ck.model, ck.state, std::span<const Sample>(data), small_encoder(), small_trainer(6));
  CHECK(max_parameter_diff(ck.model, unbroken) <= 1e-12);
  REQUIRE(ck.state.history.size() == su.history.size());
  for (std::size_t e = 0; e < su.history.size(); ++e)
    CHECK(std::abs(ck.state.history[e] - su.history[e]) <= 1e-12);
  std::filesystem::remove_all(dir);
}

}
