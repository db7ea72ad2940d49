#include "wcga/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wcga {

namespace {

/// Scores of unit-norm elements below this are treated as rounding noise.
constexpr double kZeroFunctionalTol = 1e-13;


constexpr double kTieBand = 1e-12;

template <class Error>
[[noreturn]] void rethrow_with_context(const Error& e, std::size_t iteration) {
  throw Error(std::string("wcga iteration ") + std::to_string(iteration) + ": " + e.what());
}

}  // namespace

void GreedyConfig::validate() const {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("weakness parameter t must lie in (0, 1]");
  require_valid_exponent(p);
  if (max_iter < 0) throw std::invalid_argument("max_iter must be nonnegative");
  if (stop_tol && *stop_tol < 0.0) throw std::invalid_argument("stop_tol must be nonnegative");
  if (opt_tol && *opt_tol <= 0.0) throw std::invalid_argument("opt_tol must be positive");
  if (max_inner_iter < 1) throw std::invalid_argument("max_inner_iter must be positive");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::ZeroTarget: return "zero_target";
    case StopReason::ResidualTolerance: return "residual_tolerance";
    case StopReason::ZeroFunctional: return "zero_functional";
    case StopReason::Stall: return "stall";
    case StopReason::MaxIter: return "max_iter";
    case StopReason::TermBudget: return "term_budget";
  }
  return "unknown";
}

StopReason stop_reason_from_string(const std::string& s) {
  for (auto r : {StopReason::ZeroTarget, StopReason::ResidualTolerance, StopReason::ZeroFunctional,
                 StopReason::Stall, StopReason::MaxIter, StopReason::TermBudget}) {
    if (to_string(r) == s) return r;
  }
  throw std::invalid_argument("unknown stop reason '" + s + "'");
}

double GreedyTrace::residual_after(std::size_t m) const {
  if (residual_norms.empty()) return 0.0;
  return residual_norms[std::min(m, residual_norms.size() - 1)];
}

std::size_t argmax_smallest(std::span<const double> scores, std::size_t* ties) {
  if (scores.empty()) throw std::invalid_argument("argmax over an empty score vector");
  const double best = *std::max_element(scores.begin(), scores.end());
  const double band = best * (1.0 - kTieBand);
  std::size_t pick = scores.size();
  std::size_t count = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= band) {
      if (pick == scores.size()) pick = i;
      ++count;
    }
  }
  if (ties) *ties = count;
  return pick;
}

std::vector<std::size_t> weak_eligible(std::span<const double> scores, double t) {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("weakness parameter t must lie in (0, 1]");
  std::vector<std::size_t> out;
  if (scores.empty()) return out;
  const double best = *std::max_element(scores.begin(), scores.end());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= t * best) out.push_back(i);
  }
  return out;
}

std::size_t weak_select(std::span<const double> scores, double t, std::mt19937_64& rng) {
  if (t == 1.0) return argmax_smallest(scores);
  const auto eligible = weak_eligible(scores, t);
  std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
  return eligible[pick(rng)];
}

GreedyTrace wcga_run(const SampledFunction& f0, const Dictionary& dict, const GreedyConfig& cfg) {
  cfg.validate();
  if (!(f0.grid() == dict.grid())) {
    throw std::invalid_argument("wcga_run: target and dictionary live on different grids");
  }
  GreedyTrace trace;
  trace.algorithm = "wcga";
  trace.config = cfg;

  const double p = cfg.p;
  const double norm0 = lp_norm(f0, p);
  trace.residual_norms.push_back(norm0);
  trace.final_projection = Projection{.coefficients = Eigen::VectorXd(0), .residual = f0};
  trace.final_projection.residual_norm = norm0;
  trace.final_projection.converged = true;
  if (norm0 == 0.0) {
    trace.stop = StopReason::ZeroTarget;
    return trace;
  }

  const double stop_tol = cfg.stop_tol.value_or(1e-10 * norm0);
  const int max_iter = cfg.max_iter > 0 ? cfg.max_iter : static_cast<int>(10 * dict.size());
  ProjectionOptions opts;
  opts.opt_tol = cfg.opt_tol.value_or(1e-9 * norm0);
  opts.residual_atol = stop_tol;
  opts.max_inner_iter = cfg.max_inner_iter;
  opts.strict = cfg.strict_projection;

  const bool randomized = cfg.weak_seed.has_value() && cfg.t < 1.0;
  std::mt19937_64 rng(cfg.weak_seed.value_or(0));

  if (norm0 <= stop_tol) {
    trace.stop = StopReason::ResidualTolerance;
    return trace;
  }

  std::vector<char> chosen(dict.size(), 0);
  trace.stop = StopReason::MaxIter;
  for (int m = 1; m <= max_iter; ++m) {
    const SampledFunction& residual = trace.final_projection.residual;
    const NormingFunctional functional(residual, p);
    const Eigen::VectorXd scores = functional.apply_columns(dict.matrix()).cwiseAbs();
    const std::span<const double> view(scores.data(), static_cast<std::size_t>(scores.size()));

    if (!(scores.maxCoeff() > kZeroFunctionalTol)) {
      trace.stop = StopReason::ZeroFunctional;
      break;
    }
    std::size_t ties = 0;
    std::size_t pick = 0;
    if (randomized) {
      pick = weak_select(view, cfg.t, rng);
    } else {
      pick = argmax_smallest(view, &ties);
      if (ties > 1) ++trace.ties_broken;
    }
    if (chosen[pick]) {
      // Same span as before, so the residual cannot decrease.
      trace.stop = StopReason::Stall;
      break;
    }
    chosen[pick] = 1;
    trace.selected.push_back(pick);

    // Warm start: previous coefficients plus the L2 coefficient of the new
    // element against the current residual.
    const auto g = dict.column(pick);
    Eigen::VectorXd warm(static_cast<Eigen::Index>(trace.selected.size()));
    warm.head(warm.size() - 1) = trace.final_projection.coefficients;
    warm[warm.size() - 1] = residual.values().dot(g) / g.squaredNorm();

    try {
      trace.final_projection = project_best(f0, dict, trace.selected, p, opts, &warm);
    } catch (const NoConvergence& e) {
      throw NoConvergence(std::string("wcga iteration ") + std::to_string(m) + ": " + e.what(),
                          e.best());
    } catch (const NumericallyDependentSpan& e) {
      throw NumericallyDependentSpan(
          std::string("wcga iteration ") + std::to_string(m) + ": " + e.what(), e.condition());
    } catch (const NumericalError& e) {
      rethrow_with_context(e, static_cast<std::size_t>(m));
    }
    trace.residual_norms.push_back(trace.final_projection.residual_norm);
    trace.optimality.push_back(trace.final_projection.optimality);
    if (trace.final_projection.residual_norm <= stop_tol) {
      trace.stop = StopReason::ResidualTolerance;
      break;
    }
  }
  return trace;
}

GreedyTrace womp_run(const SampledFunction& f0, const Dictionary& dict, const GreedyConfig& cfg) {
  if (cfg.p != 2.0) throw std::invalid_argument("womp_run requires p = 2");
  GreedyTrace trace = wcga_run(f0, dict, cfg);
  trace.algorithm = "womp";
  return trace;
}

Eigen::VectorXd basis_coefficients(const SampledFunction& f, const Dictionary& basis) {
  if (!basis.orthogonal_type()) {
    throw std::invalid_argument("TGA needs an orthogonal-type basis with computable coefficients");
  }
  if (!(f.grid() == basis.grid())) throw std::invalid_argument("basis_coefficients: grid mismatch");
  const Eigen::MatrixXd& m = basis.matrix();
  const Eigen::VectorXd inner = m.transpose() * f.values();
  const Eigen::VectorXd sq = m.colwise().squaredNorm().transpose();
  return inner.cwiseQuotient(sq);
}

GreedyTrace tga_run(const SampledFunction& f0, const Dictionary& basis, int m, double p) {
  require_valid_exponent(p);
  if (m < 0) throw std::invalid_argument("tga_run: m must be nonnegative");
  const Eigen::VectorXd coef = basis_coefficients(f0, basis);

  std::vector<std::size_t> order(basis.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(coef[static_cast<Eigen::Index>(a)]) > std::abs(coef[static_cast<Eigen::Index>(b)]);
  });
  const std::size_t keep = std::min(static_cast<std::size_t>(m), basis.size());

  GreedyTrace trace;
  trace.algorithm = "tga";
  trace.config.p = p;
  trace.config.max_iter = m;
  trace.stop = StopReason::TermBudget;

  Eigen::VectorXd residual = f0.values();
  const double weight = f0.grid().weight();
  trace.residual_norms.push_back(lp_norm(residual, weight, p));
  Eigen::VectorXd kept(static_cast<Eigen::Index>(keep));
  for (std::size_t j = 0; j < keep; ++j) {
    const std::size_t k = order[j];
    const double c = coef[static_cast<Eigen::Index>(k)];
    residual -= c * basis.column(k);
    trace.selected.push_back(k);
    kept[static_cast<Eigen::Index>(j)] = c;
    trace.residual_norms.push_back(lp_norm(residual, weight, p));
  }
  trace.final_projection = Projection{.coefficients = kept,
                                      .residual = SampledFunction(f0.grid_ptr(), residual)};
  trace.final_projection.residual_norm = trace.residual_norms.back();
  trace.final_projection.converged = true;
  trace.final_projection.iterations_used = static_cast<int>(keep);
  return trace;
}

}  // namespace wcga
