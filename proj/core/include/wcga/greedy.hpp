#pragma once

#include "wcga/dictionaries.hpp"
#include "wcga/lpspace.hpp"
#include "wcga/solvers.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wcga {

struct GreedyConfig {
  /// Weakness parameter, 0 < t <= 1.
  double t = 1.0;
  double p = 2.0;
  /// Iteration cap; 0 means 10 * |dictionary|.
  int max_iter = 0;
  /// Halt once ||f_m|| <= stop_tol. Defaults to 1e-10 ||f0||.
  std::optional<double> stop_tol;
  /// Passed to project_best. Defaults to 1e-9 ||f0||.
  std::optional<double> opt_tol;
  int max_inner_iter = 200;
  /// When set and t < 1, each step picks uniformly among all t-near-maximizers
  /// using mt19937_64 seeded with this value.
  std::optional<std::uint64_t> weak_seed;
  /// Throw when a projection misses opt_tol instead of continuing.
  bool strict_projection = true;

  void validate() const;
};

enum class StopReason {
  ZeroTarget,         // ||f0|| = 0
  ResidualTolerance,  // ||f_m|| <= stop_tol
  ZeroFunctional,     // sup_g |F(g)| = 0
  Stall,              // best element already selected; the span cannot grow
  MaxIter,
  TermBudget,         // TGA kept the requested number of terms
};

std::string to_string(StopReason reason);
StopReason stop_reason_from_string(const std::string& s);

struct GreedyTrace {
  std::string algorithm;
  GreedyConfig config;
  /// Dictionary indices in selection order (T^m); always distinct.
  std::vector<std::size_t> selected;
  /// ||f_m|| for m = 0..M; residual_norms[0] = ||f0||.
  std::vector<double> residual_norms;
  /// Per iteration m = 1..M: max over selected phi_j of |F_{f_m}(phi_j)|.
  std::vector<double> optimality;
  Projection final_projection;
  int ties_broken = 0;
  StopReason stop = StopReason::MaxIter;

  std::size_t iterations() const noexcept { return selected.size(); }
  /// ||f_m||, or the last recorded norm when the run stopped before m.
  double residual_after(std::size_t m) const;
};

/// Weak Chebyshev Greedy Algorithm.
///
/// Each step scores every element by |F_{f_{m-1}}(g)|, takes the smallest
/// index attaining the maximum (scores within a relative 1e-12 of the maximum
/// count as ties), and re-projects f0 onto the span of everything selected so
/// far. Solver failures are rethrown with the iteration number prepended.
GreedyTrace wcga_run(const SampledFunction& f0, const Dictionary& dict, const GreedyConfig& cfg);

/// Weak Orthogonal Matching Pursuit: wcga_run with p = 2. Rejects cfg.p != 2.
GreedyTrace womp_run(const SampledFunction& f0, const Dictionary& dict, const GreedyConfig& cfg);

/// Thresholding Greedy Algorithm for an L2-orthogonal basis.
///
/// Coefficients are c_k = <f0, psi_k> / ||psi_k||_2^2; the m largest in
/// magnitude (ties by index) are kept. residual_norms holds the L_p error of
/// every prefix 0..m. Rejects dictionaries that are not orthogonal-type.
GreedyTrace tga_run(const SampledFunction& f0, const Dictionary& basis, int m, double p);

/// TGA expansion coefficients <f, psi_k> / ||psi_k||_2^2.
Eigen::VectorXd basis_coefficients(const SampledFunction& f, const Dictionary& basis);

/// Indices i with scores[i] >= t * max(scores).
std::vector<std::size_t> weak_eligible(std::span<const double> scores, double t);

/// Uniform draw from weak_eligible(scores, t); the deterministic argmax when t = 1.
std::size_t weak_select(std::span<const double> scores, double t, std::mt19937_64& rng);

/// Smallest index within a relative 1e-12 of the maximum; `ties` receives
/// the number of indices in that band.
std::size_t argmax_smallest(std::span<const double> scores, std::size_t* ties = nullptr);

}  // namespace wcga
