#pragma once

#include "wcga/dictionaries.hpp"
#include "wcga/greedy.hpp"
#include "wcga/lpspace.hpp"
#include "wcga/solvers.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wcga {

enum class ConditionKind { Nikolskii_C1, Unconditionality_U, L1Incoherence_V, RIP_delta };

std::string to_string(ConditionKind kind);
ConditionKind condition_kind_from_string(const std::string& s);

/// Subsets and coefficients attaining an estimated constant.
///
/// `subset_b` lists the full support in coefficient order and begins with
/// `subset_a`. For C1 and delta, subset_b equals subset_a.
struct Witness {
  std::vector<std::size_t> subset_a;
  std::vector<std::size_t> subset_b;
  Eigen::VectorXd coefficients;
};

struct ConditionEstimate {
  ConditionKind kind = ConditionKind::Nikolskii_C1;
  double value = 0.0;
  /// True when every candidate subset was examined and every per-subset
  /// supremum was computed by an exact reduction; false for sampled subsets
  /// or local-ascent suprema, where `value` is a certified lower bound.
  bool exact = false;
  Witness witness;
  int K = 0;
  int D = 0;
  double r = 0.0;
  double p = 2.0;
  std::size_t candidates = 0;
  std::string method;  // "exhaustive" or "sampled"
};

struct EstimateOptions {
  /// Largest candidate count examined exhaustively.
  std::uint64_t budget = 2'000'000;
  /// Candidates drawn when the budget is exceeded.
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  /// Multi-start count for the U supremum when p != 2.
  int starts = 20;
  /// Restrict A to subsets of this support (the individual-element form).
  std::optional<std::vector<std::size_t>> support;
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned threads = 1;
  ProjectionOptions projection{.opt_tol = 1e-11, .residual_atol = 1e-14, .max_inner_iter = 400};
};

/// A1: sup over |A| <= K and x of sum|x_i| / (|A|^r ||f_A||_p).
ConditionEstimate estimate_nikolskii(const Dictionary& dict, int K, double r, double p,
                                     const EstimateOptions& options = {});

/// A2: sup over A subset B, |A| <= K, |B| <= D, c of ||sum_A c g|| / ||sum_B c g||.
ConditionEstimate estimate_unconditionality(const Dictionary& dict, int K, int D, double p,
                                            const EstimateOptions& options = {});

/// A3: sup over A subset B, |A| <= K, |B| <= D, c of sum_A|c_i| / (|A|^r ||sum_B c g||).
ConditionEstimate estimate_a3(const Dictionary& dict, int K, int D, double r, double p,
                              const EstimateOptions& options = {});

/// Restricted isometry constant at depth D from the L2 Gram submatrices.
ConditionEstimate rip_delta(const Dictionary& dict, int D, const EstimateOptions& options = {});

/// Recomputes the ratio certified by an estimate's witness.
double evaluate_witness(const Dictionary& dict, const ConditionEstimate& estimate);

/// Number of candidates the estimators would enumerate exhaustively.
std::uint64_t candidate_count(std::size_t dict_size, std::size_t pool_size, int k_min, int k_max,
                              int completion_to);

struct SigmaTable {
  /// sigma_m for m = 0..m_max.
  std::vector<double> values;
  std::vector<std::vector<std::size_t>> supports;
  std::string method;  // "exhaustive" or "capped"
  double p = 2.0;
  std::uint64_t projections = 0;
};

struct SigmaOptions {
  std::uint64_t combo_cap = 2'000'000;
  /// Beam search over supports instead of full enumeration. Values are then
  /// upper bounds on sigma_m.
  bool capped = false;
  std::size_t beam_width = 64;
  unsigned threads = 1;
  ProjectionOptions projection;
};

/// Best m-term error for m = 0..m_max. Throws CapExceeded in exhaustive
/// mode when sum_{m <= m_max} C(|dict|, m) exceeds combo_cap.
SigmaTable sigma_m_oracle(const SampledFunction& f0, const Dictionary& dict, int m_max, double p,
                          const SigmaOptions& options = {});

struct DecayBoundReport {
  double c1 = 0.0;
  double exponent = 0.0;  // r q'
  std::size_t pairs_checked = 0;
  std::size_t violations = 0;
  /// max over pairs of ||f_m|| / bound(k, m).
  double max_ratio = 0.0;
  /// 1 - max_ratio.
  double min_slack = 1.0;
  std::size_t worst_k = 0;
  std::size_t worst_m = 0;
  bool pass = true;
};

/// Checks ||f_m|| <= ||f_k|| exp(-c1 (m-k) / K^(r q')) + 2 eps for every
/// pair k < m of the trace, with c1 = t^q' / (2 (16 gamma)^(1/(q-1)) V^q').
/// A pair passes when ||f_m|| <= bound (1 + rel_slack). Rejects r q' < 1.
DecayBoundReport verify_decay_bound(const GreedyTrace& trace, int K, double r, double V, double eps,
                                    const SmoothnessParams& params, double t,
                                    double rel_slack = 1e-6);

struct RateBoundReport {
  /// Smallest C with ||f_m|| <= max(2 eps, C (A + eps)(1 + m t^q')^(-1/q')) for all m.
  double constant = 0.0;
  std::size_t binding_m = 0;
  std::size_t rows_constrained = 0;
};

RateBoundReport verify_rate_bound(const GreedyTrace& trace, double a_eps, double eps,
                                  const SmoothnessParams& params, double t);

/// Least-squares slope of log(values) against log(ms). Nonpositive values are skipped.
double fit_loglog_slope(const std::vector<double>& ms, const std::vector<double>& values);

struct Lemma31Report {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // max ||S_A f||^2 / ||f||^2
  double bound = 0.0;      // (1 + delta) / (1 - delta)
};

/// Monte-Carlo check of ||S_A(f)||^2 <= (1+delta)/(1-delta) ||f||^2 for random
/// f supported on s <= D elements and random A. Rejects delta >= 1.
Lemma31Report lemma31_check(const Dictionary& dict, int D, double delta, std::size_t trials,
                            std::uint64_t seed, double rel_slack = 1e-9);

}  // namespace wcga
