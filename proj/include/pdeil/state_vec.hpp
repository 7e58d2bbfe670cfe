#pragma once

#include "pdeil/density.hpp"
#include "pdeil/envs.hpp"

namespace pdeil {

inline Vec to_vec(const State& s) {
  return Eigen::Map<const Vec>(s.values.data(),
                               static_cast<Eigen::Index>(s.values.size()));
}

inline Vec joint_vec(const State& s, Action a) {
  Vec v(static_cast<Eigen::Index>(s.values.size()) + 1);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = s.values[i];
  }
  v[v.size() - 1] = a.value;
  return v;
}

}  // namespace pdeil
