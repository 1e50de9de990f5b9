#include "sdml/embedder.hpp"

#include <charconv>
#include <cmath>
#include <random>

#include "sdml/error.hpp"

namespace sdml {

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

/// C x (H*W) activation, column index r * W + c.
struct Activation {
  mat data;
  Index height = 1;
  Index width = 1;
  Index channels() const { return data.rows(); }
};

std::vector<std::string_view> split_tokens(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto token = text.substr(start, end - start);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (!token.empty()) out.push_back(token);
    start = end + 1;
  }
  return out;
}

Index parse_width(std::string_view token) {
  const auto colon = token.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorKind::InvalidSpec, "layer '" + std::string(token) + "' needs a width");
  const auto digits = token.substr(colon + 1);
  Index value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value < 1)
    throw Error(ErrorKind::InvalidSpec, "bad width in '" + std::string(token) + "'");
  return value;
}

void init_uniform(mat& weight, Index fan_in, std::mt19937_64& rng, InitScheme init) {
  if (init == InitScheme::Zero) {
    weight.setZero();
    return;
  }
  const real bound = std::sqrt(6.0 / static_cast<real>(fan_in));
  std::uniform_real_distribution<real> dist(-bound, bound);
  for (Index j = 0; j < weight.cols(); ++j)
    for (Index i = 0; i < weight.rows(); ++i) weight(i, j) = dist(rng);
}

mat im2col(const Activation& x) {
  const Index h = x.height, w = x.width, c_in = x.channels();
  mat col = mat::Zero(c_in * 9, h * w);
  for (Index c = 0; c < c_in; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const Index row = c * 9 + ky * 3 + kx;
        for (Index r = 0; r < h; ++r) {
          const Index sr = r + ky - 1;
          if (sr < 0 || sr >= h) continue;
          for (Index q = 0; q < w; ++q) {
            const Index sq = q + kx - 1;
            if (sq < 0 || sq >= w) continue;
            col(row, r * w + q) = x.data(c, sr * w + sq);
          }
        }
      }
  return col;
}

mat col2im(const mat& col, Index c_in, Index h, Index w) {
  mat out = mat::Zero(c_in, h * w);
  for (Index c = 0; c < c_in; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const Index row = c * 9 + ky * 3 + kx;
        for (Index r = 0; r < h; ++r) {
          const Index sr = r + ky - 1;
          if (sr < 0 || sr >= h) continue;
          for (Index q = 0; q < w; ++q) {
            const Index sq = q + kx - 1;
            if (sq < 0 || sq >= w) continue;
            out(c, sr * w + sq) += col(row, r * w + q);
          }
        }
      }
  return out;
}

Activation from_image(const RepresentationImage& image) {
  Activation a;
  a.height = image.height();
  a.width = image.width();
  a.data.resize(3, a.height * a.width);
  for (int k = 0; k < 3; ++k)
    for (Index r = 0; r < a.height; ++r)
      for (Index c = 0; c < a.width; ++c) a.data(k, r * a.width + c) = image(r, c, k);
  return a;
}

Activation pool_forward(const Activation& x, bool take_max, std::vector<Index>* argmax) {
  const Index oh = x.height / 2, ow = x.width / 2;
  if (oh < 1 || ow < 1)
    throw Error(ErrorKind::ShapeMismatch, "pooling a " + std::to_string(x.height) + "x" +
                                              std::to_string(x.width) + " activation");
  Activation y;
  y.height = oh;
  y.width = ow;
  y.data.resize(x.channels(), oh * ow);
  if (argmax) argmax->assign(static_cast<std::size_t>(x.channels() * oh * ow), 0);
  for (Index c = 0; c < x.channels(); ++c)
    for (Index r = 0; r < oh; ++r)
      for (Index q = 0; q < ow; ++q) {
        const Index base = (2 * r) * x.width + 2 * q;
        const Index idx[4] = {base, base + 1, base + x.width, base + x.width + 1};
        if (take_max) {
          Index best = idx[0];
          for (int m = 1; m < 4; ++m)
            if (x.data(c, idx[m]) > x.data(c, best)) best = idx[m];
          y.data(c, r * ow + q) = x.data(c, best);
          if (argmax) (*argmax)[static_cast<std::size_t>(c * oh * ow + r * ow + q)] = best;
        } else {
          real sum = 0.0;
          for (Index i : idx) sum += x.data(c, i);
          y.data(c, r * ow + q) = 0.25 * sum;
        }
      }
  return y;
}

/// Runs one sample through the layers, optionally keeping a trace.
vec forward_one(const EmbedderModel& model, const RepresentationImage& image,
                ForwardTrace* trace) {
  Activation x = from_image(image);
  if (trace) trace->steps.assign(model.layers.size(), {});
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    ForwardTrace::Step* step = trace ? &trace->steps[l] : nullptr;
    if (step) {
      step->in_height = x.height;
      step->in_width = x.width;
      step->in_channels = x.channels();
    }
    std::visit(
        overloaded{
            [&](const Conv2d& conv) {
              if (conv.weight.cols() != x.channels() * 9)
                throw Error(ErrorKind::ShapeMismatch, "conv input channel mismatch");
              mat col = im2col(x);
              mat out = conv.weight * col;
              out.colwise() += conv.bias.col(0);
              x.data = std::move(out);
              if (step) step->cached = std::move(col);
            },
            [&](const Relu&) {
              if (step) step->cached = x.data;
              x.data = x.data.cwiseMax(0.0);
            },
            [&](const MaxPool2&) { x = pool_forward(x, true, step ? &step->argmax : nullptr); },
            [&](const AvgPool2&) { x = pool_forward(x, false, nullptr); },
            [&](const GlobalAvgPool&) {
              mat mean = x.data.rowwise().mean();
              x.data = std::move(mean);
              x.height = x.width = 1;
            },
            [&](const Dense& dense) {
              if (x.height * x.width != 1 || dense.weight.cols() != x.channels())
                throw Error(ErrorKind::ShapeMismatch, "dense input size mismatch");
              if (step) step->cached = x.data;
              mat out = dense.weight * x.data + dense.bias;
              x.data = std::move(out);
            },
        },
        model.layers[l]);
  }
  return x.data.col(0);
}

}  // namespace

std::vector<std::pair<std::string, mat*>> EmbedderModel::parameters() {
  std::vector<std::pair<std::string, mat*>> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l);
    if (auto* conv = std::get_if<Conv2d>(&layers[l])) {
      out.emplace_back(prefix + ".weight", &conv->weight);
      out.emplace_back(prefix + ".bias", &conv->bias);
    } else if (auto* dense = std::get_if<Dense>(&layers[l])) {
      out.emplace_back(prefix + ".weight", &dense->weight);
      out.emplace_back(prefix + ".bias", &dense->bias);
    }
  }
  if (classifier) {
    out.emplace_back("classifier.weight", &classifier->weight);
    out.emplace_back("classifier.bias", &classifier->bias);
  }
  return out;
}

std::vector<std::pair<std::string, const mat*>> EmbedderModel::parameters() const {
  auto mutable_params = const_cast<EmbedderModel*>(this)->parameters();
  std::vector<std::pair<std::string, const mat*>> out;
  out.reserve(mutable_params.size());
  for (auto& [name, ptr] : mutable_params) out.emplace_back(std::move(name), ptr);
  return out;
}

Index EmbedderModel::parameter_count() const {
  Index total = 0;
  for (const auto& [name, p] : parameters()) total += p->size();
  return total;
}

EmbedderModel build_model(std::string_view architecture, Index embedding_dim, std::uint64_t seed,
                          InitScheme init) {
  if (embedding_dim < 1) throw Error(ErrorKind::InvalidSpec, "embedding dimension must be >= 1");
  EmbedderModel model;
  model.architecture = std::string(architecture);
  model.embedding_dim = embedding_dim;

  std::mt19937_64 rng(seed);
  Index channels = 3;
  bool spatial = true;
  const auto tokens = split_tokens(architecture);
  if (tokens.empty() || tokens.back() != "embed")
    throw Error(ErrorKind::InvalidSpec, "architecture must end with 'embed'");

  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const std::string_view token = tokens[t];
    const std::string_view kind = token.substr(0, token.find(':'));
    if (kind == "conv") {
      if (!spatial) throw Error(ErrorKind::InvalidSpec, "conv after global pooling");
      const Index out = parse_width(token);
      Conv2d conv{mat(out, channels * 9), mat::Zero(out, 1)};
      init_uniform(conv.weight, channels * 9, rng, init);
      model.layers.emplace_back(std::move(conv));
      channels = out;
    } else if (kind == "relu") {
      model.layers.emplace_back(Relu{});
    } else if (kind == "maxpool" || kind == "avgpool") {
      if (!spatial) throw Error(ErrorKind::InvalidSpec, "pooling after global pooling");
      if (kind == "maxpool") model.layers.emplace_back(MaxPool2{});
      else model.layers.emplace_back(AvgPool2{});
    } else if (kind == "gap") {
      if (!spatial) throw Error(ErrorKind::InvalidSpec, "repeated global pooling");
      model.layers.emplace_back(GlobalAvgPool{});
      spatial = false;
    } else if (kind == "dense" || kind == "embed") {
      if (spatial) throw Error(ErrorKind::InvalidSpec, "dense layer needs 'gap' first");
      if (kind == "embed" && t + 1 != tokens.size())
        throw Error(ErrorKind::InvalidSpec, "'embed' must be the last layer");
      const Index out = kind == "embed" ? embedding_dim : parse_width(token);
      Dense dense{mat(out, channels), mat::Zero(out, 1)};
      init_uniform(dense.weight, channels, rng, init);
      model.layers.emplace_back(std::move(dense));
      channels = out;
    } else {
      throw Error(ErrorKind::InvalidSpec, "unknown layer '" + std::string(token) + "'");
    }
  }
  return model;
}

void attach_classifier(EmbedderModel& model, Index classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dense head{mat(classes, model.embedding_dim), mat::Zero(classes, 1)};
  init_uniform(head.weight, model.embedding_dim, rng, InitScheme::FanInUniform);
  model.classifier = std::move(head);
}

Embeddings forward(const EmbedderModel& model, std::span<const RepresentationImage> images) {
  Embeddings out(static_cast<Index>(images.size()), model.embedding_dim);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].height() != images.front().height() ||
        images[i].width() != images.front().width())
      throw Error(ErrorKind::ShapeMismatch, "images in a batch must share dimensions",
                  static_cast<std::int64_t>(i));
    out.row(static_cast<Index>(i)) = forward_one(model, images[i], nullptr).transpose();
  }
  return out;
}

Embeddings forward(const EmbedderModel& model, std::span<const RepresentationImage> images,
                   std::vector<ForwardTrace>& traces) {
  traces.assign(images.size(), {});
  Embeddings out(static_cast<Index>(images.size()), model.embedding_dim);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].height() != images.front().height() ||
        images[i].width() != images.front().width())
      throw Error(ErrorKind::ShapeMismatch, "images in a batch must share dimensions",
                  static_cast<std::int64_t>(i));
    out.row(static_cast<Index>(i)) = forward_one(model, images[i], &traces[i]).transpose();
  }
  return out;
}

Gradients zero_gradients(const EmbedderModel& model) {
  Gradients grads;
  for (const auto& [name, p] : model.parameters()) grads.push_back(mat::Zero(p->rows(), p->cols()));
  return grads;
}

Gradients backward(const EmbedderModel& model, std::span<const ForwardTrace> traces,
                   const Embeddings& upstream) {
  if (upstream.rows() != static_cast<Index>(traces.size()) ||
      upstream.cols() != model.embedding_dim)
    throw Error(ErrorKind::ShapeMismatch, "upstream gradient shape does not match forward output");

  Gradients grads = zero_gradients(model);
  // parameter slot of each layer's weight in `grads`
  std::vector<std::size_t> slot(model.layers.size(), 0);
  std::size_t next = 0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    if (std::holds_alternative<Conv2d>(model.layers[l]) ||
        std::holds_alternative<Dense>(model.layers[l])) {
      slot[l] = next;
      next += 2;
    }
  }

  for (std::size_t i = 0; i < traces.size(); ++i) {
    const ForwardTrace& trace = traces[i];
    mat grad = upstream.row(static_cast<Index>(i)).transpose();
    for (std::size_t l = model.layers.size(); l-- > 0;) {
      const ForwardTrace::Step& step = trace.steps[l];
      std::visit(
          overloaded{
              [&](const Conv2d& conv) {
                grads[slot[l]].noalias() += grad * step.cached.transpose();
                grads[slot[l] + 1] += grad.rowwise().sum();
                mat dcol = conv.weight.transpose() * grad;
                grad = col2im(dcol, step.in_channels, step.in_height, step.in_width);
              },
              [&](const Relu&) {
                grad = (step.cached.array() > 0.0).select(grad, 0.0);
              },
              [&](const MaxPool2&) {
                mat dx = mat::Zero(step.in_channels, step.in_height * step.in_width);
                const Index cells = grad.cols();
                for (Index c = 0; c < grad.rows(); ++c)
                  for (Index q = 0; q < cells; ++q)
                    dx(c, step.argmax[static_cast<std::size_t>(c * cells + q)]) += grad(c, q);
                grad = std::move(dx);
              },
              [&](const AvgPool2&) {
                mat dx = mat::Zero(step.in_channels, step.in_height * step.in_width);
                const Index oh = step.in_height / 2, ow = step.in_width / 2;
                for (Index c = 0; c < grad.rows(); ++c)
                  for (Index r = 0; r < oh; ++r)
                    for (Index q = 0; q < ow; ++q) {
                      const real g = 0.25 * grad(c, r * ow + q);
                      const Index base = (2 * r) * step.in_width + 2 * q;
                      dx(c, base) += g;
                      dx(c, base + 1) += g;
                      dx(c, base + step.in_width) += g;
                      dx(c, base + step.in_width + 1) += g;
                    }
                grad = std::move(dx);
              },
              [&](const GlobalAvgPool&) {
                const Index cells = step.in_height * step.in_width;
                mat dx = grad.col(0).replicate(1, cells) / static_cast<real>(cells);
                grad = std::move(dx);
              },
              [&](const Dense& dense) {
                grads[slot[l]].noalias() += grad * step.cached.transpose();
                grads[slot[l] + 1] += grad;
                mat dx = dense.weight.transpose() * grad;
                grad = std::move(dx);
              },
          },
          model.layers[l]);
    }
  }
  return grads;
}

Gradients backward(const EmbedderModel& model, std::span<const RepresentationImage> images,
                   const Embeddings& upstream) {
  std::vector<ForwardTrace> traces;
  forward(model, images, traces);
  return backward(model, std::span<const ForwardTrace>(traces), upstream);
}

}  // namespace sdml
