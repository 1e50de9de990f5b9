#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sdml/types.hpp"

namespace sdml {

/// n x n matrix of pairwise dot products, S(i,j) = f_i . f_j. Rows of the
/// input are embeddings.
template <class Derived>
matrix<typename Derived::Scalar> similarity_matrix(const Eigen::MatrixBase<Derived>& embeddings) {
  using T = typename Derived::Scalar;
  matrix<T> s = embeddings * embeddings.transpose();
  // exact symmetry regardless of GEMM blocking
  s = (s + s.transpose().eval()) * T(0.5);
  return s;
}

struct MinerConfig {
  real epsilon = 0.05;
};

struct PairSet {
  std::vector<std::pair<Index, Index>> positives;
  std::vector<std::pair<Index, Index>> negatives;

  bool operator==(const PairSet&) const = default;
};

/// Multi-similarity pair mining. For anchor i a positive (i,p) is kept iff
///   S(i,p) < max over differently-labelled k of S(i,k) + epsilon,
/// a negative (i,q) iff
///   S(i,q) > min over same-labelled k != i of S(i,k) - epsilon.
/// Anchors lacking either candidate kind yield no pairs. Pairs are ordered by
/// anchor, then partner index.
template <class Derived>
PairSet mine_pairs(const Eigen::MatrixBase<Derived>& s, std::span<const int> labels,
                   const MinerConfig& cfg) {
  using T = typename Derived::Scalar;
  const Index n = static_cast<Index>(labels.size());
  PairSet pairs;
  for (Index i = 0; i < n; ++i) {
    T hardest_negative = -std::numeric_limits<T>::infinity();
    T hardest_positive = std::numeric_limits<T>::infinity();
    for (Index k = 0; k < n; ++k) {
      if (k == i) continue;
      if (labels[k] == labels[i]) hardest_positive = std::min(hardest_positive, s(i, k));
      else hardest_negative = std::max(hardest_negative, s(i, k));
    }
    if (!std::isfinite(hardest_negative) || !std::isfinite(hardest_positive)) continue;
    const T eps = static_cast<T>(cfg.epsilon);
    for (Index k = 0; k < n; ++k) {
      if (k == i) continue;
      if (labels[k] == labels[i]) {
        if (s(i, k) < hardest_negative + eps) pairs.positives.emplace_back(i, k);
      } else if (s(i, k) > hardest_positive - eps) {
        pairs.negatives.emplace_back(i, k);
      }
    }
  }
  return pairs;
}

struct LossConfig {
  real alpha = 2.0;
  real beta = 50.0;
  real lambda = 0.5;
  real triplet_margin = 0.1;
};

template <class T>
struct loss_result {
  T loss = T(0);
  matrix<T> gradient;  // d loss / d embeddings, same shape as the input
};

using LossResult = loss_result<real>;

namespace detail {

/// log(1 + sum_k exp(x_k)) and the softmax-style weights exp(x_k) / (1 + sum).
template <class T>
T log1p_sum_exp(const std::vector<T>& x, std::vector<T>& weights) {
  T peak = T(0);
  for (T v : x) peak = std::max(peak, v);
  T rest = T(0);
  weights.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    weights[k] = std::exp(x[k] - peak);
    rest += weights[k];
  }
  const T denom = std::exp(-peak) + rest;
  for (T& w : weights) w /= denom;
  // log1p keeps tiny sums from rounding away when no term dominates
  return peak == T(0) ? std::log1p(rest) : peak + std::log(denom);
}

}  // namespace detail

/// Multi-similarity loss over mined pairs,
///   (1/n) sum_i [ 1/alpha log(1 + sum_{P_i} e^{-alpha (S_ik - lambda)})
///               + 1/beta  log(1 + sum_{N_i} e^{ beta (S_ik - lambda)}) ],
/// with its exact gradient through S_ik = f_i . f_k.
template <class Derived, class DerivedS>
loss_result<typename Derived::Scalar> ms_loss(const Eigen::MatrixBase<Derived>& embeddings,
                                              const Eigen::MatrixBase<DerivedS>& s,
                                              const PairSet& pairs, const LossConfig& cfg) {
  using T = typename Derived::Scalar;
  const Index n = embeddings.rows();
  loss_result<T> out;
  out.gradient = matrix<T>::Zero(n, embeddings.cols());
  if (n == 0) return out;

  const T alpha = static_cast<T>(cfg.alpha);
  const T beta = static_cast<T>(cfg.beta);
  const T lambda = static_cast<T>(cfg.lambda);
  const T inv_n = T(1) / static_cast<T>(n);

  std::vector<std::vector<Index>> pos(n), neg(n);
  for (auto [a, k] : pairs.positives) pos[a].push_back(k);
  for (auto [a, k] : pairs.negatives) neg[a].push_back(k);

  std::vector<T> x, w;
  for (Index i = 0; i < n; ++i) {
    if (!pos[i].empty()) {
      x.clear();
      for (Index k : pos[i]) x.push_back(-alpha * (s(i, k) - lambda));
      out.loss += inv_n / alpha * detail::log1p_sum_exp(x, w);
      for (std::size_t m = 0; m < pos[i].size(); ++m) {
        const Index k = pos[i][m];
        const T d_s = -inv_n * w[m];
        out.gradient.row(i) += d_s * embeddings.row(k);
        out.gradient.row(k) += d_s * embeddings.row(i);
      }
    }
    if (!neg[i].empty()) {
      x.clear();
      for (Index k : neg[i]) x.push_back(beta * (s(i, k) - lambda));
      out.loss += inv_n / beta * detail::log1p_sum_exp(x, w);
      for (std::size_t m = 0; m < neg[i].size(); ++m) {
        const Index k = neg[i][m];
        const T d_s = inv_n * w[m];
        out.gradient.row(i) += d_s * embeddings.row(k);
        out.gradient.row(k) += d_s * embeddings.row(i);
      }
    }
  }
  return out;
}

template <class Derived>
loss_result<typename Derived::Scalar> ms_loss(const Eigen::MatrixBase<Derived>& embeddings,
                                              const PairSet& pairs, const LossConfig& cfg) {
  return ms_loss(embeddings, similarity_matrix(embeddings), pairs, cfg);
}

struct Triplet {
  Index anchor;
  Index positive;
  Index negative;
  bool operator==(const Triplet&) const = default;
};

/// Joins mined positive and negative pairs on their shared anchor.
inline std::vector<Triplet> triplets_from_pairs(const PairSet& pairs) {
  std::vector<Triplet> out;
  for (auto [a, p] : pairs.positives)
    for (auto [b, q] : pairs.negatives)
      if (a == b) out.push_back({a, p, q});
  std::sort(out.begin(), out.end(), [](const Triplet& l, const Triplet& r) {
    return std::tie(l.anchor, l.positive, l.negative) <
           std::tie(r.anchor, r.positive, r.negative);
  });
  return out;
}

/// Mean over triplets of max(0, |f_a - f_p| - |f_a - f_n| + margin). The
/// gradient of a zero-length distance is taken as zero.
template <class Derived>
loss_result<typename Derived::Scalar> triplet_margin_loss(
    const Eigen::MatrixBase<Derived>& embeddings, std::span<const Triplet> triplets,
    typename Derived::Scalar margin) {
  using T = typename Derived::Scalar;
  loss_result<T> out;
  out.gradient = matrix<T>::Zero(embeddings.rows(), embeddings.cols());
  if (triplets.empty()) return out;

  const T inv_count = T(1) / static_cast<T>(triplets.size());
  for (const Triplet& t : triplets) {
    const auto to_pos = (embeddings.row(t.anchor) - embeddings.row(t.positive)).eval();
    const auto to_neg = (embeddings.row(t.anchor) - embeddings.row(t.negative)).eval();
    const T d_pos = to_pos.norm();
    const T d_neg = to_neg.norm();
    const T hinge = d_pos - d_neg + margin;
    if (hinge <= T(0)) continue;
    out.loss += inv_count * hinge;
    if (d_pos > T(0)) {
      const auto g = (inv_count / d_pos * to_pos).eval();
      out.gradient.row(t.anchor) += g;
      out.gradient.row(t.positive) -= g;
    }
    if (d_neg > T(0)) {
      const auto g = (inv_count / d_neg * to_neg).eval();
      out.gradient.row(t.anchor) -= g;
      out.gradient.row(t.negative) += g;
    }
  }
  return out;
}

/// Mean softmax cross-entropy of `logits` (n x C) against class indices.
template <class Derived>
loss_result<typename Derived::Scalar> softmax_cross_entropy(
    const Eigen::MatrixBase<Derived>& logits, std::span<const int> targets) {
  using T = typename Derived::Scalar;
  const Index n = logits.rows();
  loss_result<T> out;
  out.gradient = matrix<T>::Zero(n, logits.cols());
  if (n == 0) return out;
  for (Index i = 0; i < n; ++i) {
    const T peak = logits.row(i).maxCoeff();
    const auto shifted = (logits.row(i).array() - peak).exp().eval();
    const T total = shifted.sum();
    out.loss += (std::log(total) + peak - logits(i, targets[i])) / static_cast<T>(n);
    out.gradient.row(i) = (shifted / total).matrix() / static_cast<T>(n);
    out.gradient(i, targets[i]) -= T(1) / static_cast<T>(n);
  }
  return out;
}

/// Rows scaled to unit length (zero rows stay zero).
template <class Derived>
matrix<typename Derived::Scalar> normalize_rows(const Eigen::MatrixBase<Derived>& x) {
  matrix<typename Derived::Scalar> y = x;
  for (Index i = 0; i < y.rows(); ++i) {
    const auto norm = y.row(i).norm();
    if (norm > 0) y.row(i) /= norm;
  }
  return y;
}

/// Pulls d loss / d normalize_rows(x) back to d loss / d x.
template <class DerivedX, class DerivedG>
matrix<typename DerivedX::Scalar> normalize_rows_backward(const Eigen::MatrixBase<DerivedX>& x,
                                                          const Eigen::MatrixBase<DerivedG>& grad) {
  using T = typename DerivedX::Scalar;
  matrix<T> out = matrix<T>::Zero(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const T norm = x.row(i).norm();
    if (norm == T(0)) continue;
    const auto y = (x.row(i) / norm).eval();
    out.row(i) = (grad.row(i) - y * y.dot(grad.row(i))) / norm;
  }
  return out;
}

}  // namespace sdml
