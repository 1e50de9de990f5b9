#pragma once

#include <Eigen/Core>

namespace sdml {

using Index = Eigen::Index;

template <class T, int M = Eigen::Dynamic, int N = Eigen::Dynamic>
using matrix = Eigen::Matrix<T, M, N>;

template <class T, int M = Eigen::Dynamic>
using vector = matrix<T, M, 1>;

using real = double;

using mat = matrix<real>;
using vec = vector<real>;
using rowvec = Eigen::Matrix<real, 1, Eigen::Dynamic>;
using vec3 = vector<real, 3>;
using mat3 = matrix<real, 3, 3>;

/// N x 3 joint coordinates of one time step, one joint per row.
template <class T>
using joints_t = Eigen::Matrix<T, Eigen::Dynamic, 3>;

using Joints = joints_t<real>;

/// Row-per-sample embedding batch (n x d).
using Embeddings = mat;

}  // namespace sdml
