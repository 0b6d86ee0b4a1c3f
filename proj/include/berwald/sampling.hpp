#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "berwald/base_metric.hpp"
#include "berwald/tensor.hpp"

namespace berwald {

/// Deterministic sampling plan; the seed is echoed in every report.
struct SamplingPlan {
  int points = 20;       // spacetime events per chart
  int directions = 500;  // velocity directions per event
  std::uint64_t seed = 20240601;
};

using Rng = std::mt19937_64;

inline Vec4<> sample_coords(const CoordinateBox& box, Rng& rng) {
  Vec4<> x{};
  for (int i = 0; i < kDim; ++i) {
    std::uniform_real_distribution<double> u(box.lo[i], box.hi[i]);
    x[i] = u(rng);
  }
  return x;
}

/// Uniform direction on the Euclidean unit 3-sphere of velocity space.
inline Vec4<> sample_direction(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Vec4<> v{n(rng), n(rng), n(rng), n(rng)};
    double len = norm2(v);
    if (len > 1e-8) {
      for (double& c : v) c /= len;
      return v;
    }
  }
}

}  // namespace berwald
