#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "sdml/error.hpp"
#include "sdml/oneshot.hpp"
#include "sdml/synthetic.hpp"

using namespace sdml;

namespace {

Gallery make_gallery(const std::vector<std::pair<int, vec>>& entries) {
  Gallery g;
  for (const auto& [cls, e] : entries) g.entries.push_back({cls, e, "ref" + std::to_string(cls)});
  return g;
}

vec v2(double a, double b) {
  vec v(2);
  v << a, b;
  return v;
}

std::vector<Sample> small_dataset(int classes, int per_class) {
  SynthDatasetConfig cfg;
  cfg.classes = classes;
  cfg.samples_per_class = per_class;
  cfg.frames = 12;
  cfg.primitives = 7;
  cfg.seed = 3;
  return make_synthetic_dataset(cfg);
}

ExperimentConfig small_experiment(std::vector<int> novel) {
  ExperimentConfig cfg;
  cfg.protocol.novel_classes = std::move(novel);
  cfg.protocol.reference_rule = ReferenceRule::FirstByName;
  cfg.encoder.target_length = 12;
  cfg.architecture = "conv:4,relu,maxpool,gap,dense:16,relu,embed";
  cfg.trainer.embedding_dim = 8;
  cfg.trainer.epochs = 2;
  cfg.trainer.batch_size = 8;
  cfg.trainer.learning_rate = 1e-3;
  cfg.trainer.seed = 4;
  return cfg;
}

}  // namespace

TEST_SUITE("oneshot") {

TEST_CASE("classify geometry, exact match and ties") {
  const auto g = make_gallery({{1, v2(0, 0)}, {2, v2(2, 0)}});
  auto c = classify(v2(0.9, 0), g);
  CHECK(c.class_id == 1);
  CHECK(c.distance == doctest::Approx(0.9).epsilon(1e-15));
  c = classify(v2(2, 0), g);
  CHECK(c.class_id == 2);
  CHECK(c.distance == 0.0);
  CHECK(classify(v2(1, 0), g).class_id == 1);
  const auto reversed = make_gallery({{2, v2(2, 0)}, {1, v2(0, 0)}});
  CHECK(classify(v2(1, 5), reversed).class_id == 1);
}

TEST_CASE("classify errors") {
  CHECK_THROWS_AS(classify(v2(0, 0), Gallery{}), Error);
  vec three(3);
  three << 1, 2, 3;
  try {
    classify(three, make_gallery({{1, v2(0, 0)}}));
    FAIL("expected DimMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimMismatch);
  }
}

TEST_CASE("classify invariances") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<int, vec>> entries;
    for (int c = 1; c <= 5; ++c) entries.push_back({c, vec::NullaryExpr(4, [&] { return n01(rng); })});
    const vec q = vec::NullaryExpr(4, [&] { return n01(rng); });
    const auto base = classify(q, make_gallery(entries));

    // rigid motion of everything
    const Eigen::Matrix4d rot =
        Eigen::HouseholderQR<Eigen::Matrix4d>(Eigen::Matrix4d::NullaryExpr([&] { return n01(rng); }))
            .householderQ();
    const vec shift = vec::NullaryExpr(4, [&] { return n01(rng); });
    auto moved = entries;
    for (auto& [c, e] : moved) e = rot * e + shift;
    const auto m = classify(rot * q + shift, make_gallery(moved));
    CHECK(m.class_id == base.class_id);
    CHECK(m.distance == doctest::Approx(base.distance).epsilon(1e-9));

    // appending a losing entry
    auto longer = entries;
    longer.push_back({9, q + vec::Constant(4, base.distance + 1.0)});
    CHECK(classify(q, make_gallery(longer)).class_id == base.class_id);
  }
}

TEST_CASE("cosine distance and rejection") {
  const auto g = make_gallery({{1, v2(1, 0)}, {2, v2(0, 1)}});
  ClassifyOptions opt;
  opt.distance = DistanceKind::Cosine;
  CHECK(classify(v2(10, 1), g, opt).class_id == 1);
  opt.rejection_threshold = 0.01;
  CHECK(classify(v2(1, 1), g, opt).rejected);
  CHECK_FALSE(classify(v2(5, 0), g, opt).rejected);
}

TEST_CASE("separated clusters classify perfectly") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> small(0.0, 0.01);
  std::vector<std::pair<int, vec>> centres;
  for (int c = 0; c < 5; ++c) centres.push_back({10 + c, vec::Unit(5, c) * 10.0});
  Embeddings q(50, 5);
  std::vector<int> y;
  std::vector<std::string> ids;
  for (int i = 0; i < 50; ++i) {
    const int c = i % 5;
    q.row(i) = (centres[c].second + vec::NullaryExpr(5, [&] { return small(rng); })).transpose();
    y.push_back(10 + c);
    ids.push_back("q" + std::to_string(i));
  }
  const auto report = evaluate_embeddings(q, y, ids, make_gallery(centres));
  CHECK(report.accuracy == 1.0);
  CHECK(report.confusion.trace() == 50);

  // permuting the evaluation set changes nothing
  std::vector<int> order(50);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Embeddings qp(50, 5);
  std::vector<int> yp;
  std::vector<std::string> idp;
  for (int i = 0; i < 50; ++i) {
    qp.row(i) = q.row(order[i]);
    yp.push_back(y[order[i]]);
    idp.push_back(ids[order[i]]);
  }
  CHECK(evaluate_embeddings(qp, yp, idp, make_gallery(centres)).accuracy == report.accuracy);

  y[3] = 99;
  CHECK_THROWS_AS(evaluate_embeddings(q, y, ids, make_gallery(centres)), Error);
}

TEST_CASE("constant embedding stub scores the frequency of the tie winner") {
  const auto data = small_dataset(3, 4);
  std::vector<Sample> refs, queries;
  for (const Sample& s : data) (s.meta.performer == 1 ? refs : queries).push_back(s);
  queries.pop_back();  // unbalanced: class 3 has one query fewer
  const EmbedFn constant = [](std::span<const RepresentationImage> imgs) {
    return Embeddings(Embeddings::Ones(static_cast<Index>(imgs.size()), 3));
  };
  EncoderConfig enc;
  enc.target_length = 12;
  const Gallery g = build_gallery(constant, refs, enc);
  const auto report = evaluate(constant, queries, g, enc);
  const auto winners = std::count_if(queries.begin(), queries.end(),
                                     [](const Sample& s) { return s.label == 1; });
  CHECK(report.accuracy == doctest::Approx(double(winners) / double(queries.size())));
}

TEST_CASE("gallery construction") {
  const auto data = small_dataset(3, 2);
  EncoderConfig enc;
  enc.target_length = 12;
  const auto model = build_model("conv:4,relu,maxpool,gap,dense:16,relu,embed", 8, 1);
  std::vector<Sample> refs;
  for (const Sample& s : data)
    if (s.meta.performer == 1) refs.push_back(s);
  std::reverse(refs.begin(), refs.end());
  const Gallery g = build_gallery(model, refs, enc, std::vector<int>{1, 2, 3});
  REQUIRE(g.entries.size() == 3);
  CHECK(g.entries[0].class_id == 1);
  CHECK(g.dim() == 8);

  const std::vector<Sample> one{refs[0]};
  const Gallery single = build_gallery(model, one, enc);
  for (const Sample& s : data) {
    const std::vector<RepresentationImage> img{encode_bodies(s.bodies, enc)};
    const vec e = forward(model, img).row(0).transpose();
    CHECK(classify(e, single).class_id == refs[0].label);
  }

  auto dup = refs;
  dup.push_back(refs[0]);
  CHECK_THROWS_AS(build_gallery(model, dup, enc), Error);
  CHECK_THROWS_AS(build_gallery(model, one, enc, std::vector<int>{1, 2}), Error);

  // self-retrieval
  CHECK(evaluate(model, refs, g, enc).accuracy == 1.0);
}

TEST_CASE("twenty-class gallery") {
  const auto data = small_dataset(20, 1);
  EncoderConfig enc;
  enc.target_length = 12;
  const auto model = build_model("conv:4,relu,maxpool,gap,dense:16,relu,embed", 8, 1);
  CHECK(build_gallery(model, data, enc).entries.size() == 20);
}

TEST_CASE("partition and reduction experiment") {
  const auto data = small_dataset(8, 4);
  const auto cfg = small_experiment({4, 8});
  std::vector<SampleMeta> catalog;
  for (const auto& s : data) catalog.push_back(s.meta);
  const auto split = build_split(catalog, cfg.protocol, 3);
  const auto part = partition_dataset(data, split);
  CHECK(part.training.size() == 12);
  CHECK(part.references.size() == 2);
  CHECK(part.queries.size() == 6);

  const std::vector<int> sizes{2, 4, 6};
  const auto runs = run_reduction_experiment(data, sizes, cfg);
  REQUIRE(runs.size() == 3);
  for (const auto& r : runs) {
    CHECK(r.split.novel_classes == std::vector<int>{4, 8});
    CHECK(r.report.predictions.size() == 6);
  }
  const auto again = run_reduction_experiment(data, sizes, cfg);
  for (std::size_t i = 0; i < runs.size(); ++i)
    CHECK(std::abs(again[i].report.accuracy - runs[i].report.accuracy) <= 1e-12);

  const std::vector<int> single{6};
  const auto one = run_reduction_experiment(data, single, cfg);
  CHECK(one[0].report.accuracy == runs[2].report.accuracy);
}

TEST_CASE("report documents") {
  const auto g = make_gallery({{1, v2(0, 0)}, {2, v2(2, 0)}});
  Embeddings q(3, 2);
  q << 0.1, 0, 1.9, 0, 0.2, 0;
  const std::vector<int> y{1, 2, 2};
  const std::vector<std::string> ids{"a", "b", "c"};
  const auto report = evaluate_embeddings(q, y, ids, g);
  CHECK(report.accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(report.confusion(1, 0) == 1);
  const auto doc = nlohmann::json::parse(report_json(report, 42));
  CHECK(doc["seed"] == 42);
  CHECK(report_json(report, 42) == report_json(report, 42));
  const std::string csv = embeddings_csv(ids, y, q);
  CHECK(csv.rfind("sample_id,class,e0,e1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

}
