#include "sdml/optimizer.hpp"

#include "sdml/error.hpp"

namespace sdml {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::RmsProp ? "rmsprop" : "sgd";
}

OptimizerKind optimizer_kind_from_string(std::string_view name) {
  if (name == "rmsprop") return OptimizerKind::RmsProp;
  if (name == "sgd") return OptimizerKind::Sgd;
  throw Error(ErrorKind::InvalidConfig, "unknown optimizer '" + std::string(name) + "'");
}

void optimizer_step(std::span<mat* const> params, std::span<const mat> grads,
                    OptimizerState& state, OptimizerKind kind, real lr, const RmsPropConfig& cfg) {
  if (params.size() != grads.size())
    throw Error(ErrorKind::ShapeMismatch, "parameter and gradient counts differ");
  if (state.mean_square.empty() && kind == OptimizerKind::RmsProp)
    for (mat* p : params) state.mean_square.push_back(mat::Zero(p->rows(), p->cols()));

  for (std::size_t i = 0; i < params.size(); ++i) {
    mat& p = *params[i];
    if (p.rows() != grads[i].rows() || p.cols() != grads[i].cols())
      throw Error(ErrorKind::ShapeMismatch, "gradient shape differs from parameter",
                  static_cast<std::int64_t>(i));
    if (kind == OptimizerKind::RmsProp) {
      rmsprop_update(p, grads[i], state.mean_square.at(i), lr, cfg);
    } else {
      p -= lr * grads[i];
    }
  }
  ++state.steps;
}

}  // namespace sdml
