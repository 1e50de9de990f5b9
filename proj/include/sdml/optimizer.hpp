#pragma once

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sdml/types.hpp"

namespace sdml {

enum class OptimizerKind { RmsProp, Sgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(std::string_view name);

struct RmsPropConfig {
  real decay = 0.99;
  real epsilon = 1e-8;
};

/// One RMSProp update of a single tensor:
///   v <- decay v + (1 - decay) g^2
///   p <- p - lr g / (sqrt(v) + eps)
template <class P, class G, class V>
void rmsprop_update(Eigen::MatrixBase<P>& param, const Eigen::MatrixBase<G>& grad,
                    Eigen::MatrixBase<V>& mean_square, real lr, const RmsPropConfig& cfg = {}) {
  mean_square.array() = cfg.decay * mean_square.array() + (1.0 - cfg.decay) * grad.array().square();
  param.array() -= lr * grad.array() / (mean_square.array().sqrt() + cfg.epsilon);
}

/// Optimizer accumulators, one per parameter tensor.
struct OptimizerState {
  std::vector<mat> mean_square;
  long steps = 0;

  bool operator==(const OptimizerState& other) const {
    if (steps != other.steps || mean_square.size() != other.mean_square.size()) return false;
    for (std::size_t i = 0; i < mean_square.size(); ++i)
      if (mean_square[i].rows() != other.mean_square[i].rows() ||
          mean_square[i].cols() != other.mean_square[i].cols() ||
          mean_square[i] != other.mean_square[i])
        return false;
    return true;
  }
};

/// Applies one step to every tensor; accumulators are created on first use.
void optimizer_step(std::span<mat* const> params, std::span<const mat> grads,
                    OptimizerState& state, OptimizerKind kind, real lr,
                    const RmsPropConfig& cfg = {});

}  // namespace sdml
