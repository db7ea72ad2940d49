#pragma once

#include "wcga/lpspace.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace wcga::testing {

inline Eigen::VectorXd random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return v;
}

inline SampledFunction random_function(const GridPtr& grid, std::mt19937_64& rng) {
  return SampledFunction(grid, random_vector(grid->size(), rng));
}

/// Central difference of u -> ||f + u g||_p at u = 0.
inline double norm_derivative(const SampledFunction& f, const SampledFunction& g, double p, double h = 1e-4) {
  return (lp_norm(f + h * g, p) - lp_norm(f - h * g, p)) / (2.0 * h);
}

}  // namespace wcga::testing
