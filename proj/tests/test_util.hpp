#pragma once

#include <random>

#include "sdml/skeleton.hpp"

namespace sdml::test {

inline SkeletonSequence random_sequence(std::mt19937_64& rng, Index frames,
                                        const SkeletonTopology& topology, double lo = -1.0,
                                        double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  SkeletonSequence seq;
  seq.topology = topology;
  for (Index t = 0; t < frames; ++t) {
    Joints f(topology.joint_count(), 3);
    for (Index j = 0; j < f.rows(); ++j)
      for (int a = 0; a < 3; ++a) f(j, a) = u(rng);
    seq.frames.push_back(f);
  }
  return seq;
}

inline double max_abs_diff(const SkeletonSequence& a, const SkeletonSequence& b) {
  double m = 0.0;
  for (std::size_t t = 0; t < a.frames.size(); ++t)
    m = std::max(m, (a.frames[t] - b.frames[t]).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace sdml::test
