#include "wcga/solvers.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace wcga {

namespace {

// State of the p-th power objective sum_i w |r_i|^p at one coefficient vector,
// for the normalized problem (target scaled to unit norm).
struct Evaluation {
  Eigen::VectorXd residual;
  double objective = 0.0;
  Eigen::VectorXd gradient;  // d objective / dc
  double optimality = 0.0;   // max_j |F_r(phi_j)|
};

Evaluation evaluate(const Eigen::VectorXd& y, const Eigen::Ref<const Eigen::MatrixXd>& span,
                    const Eigen::VectorXd& c, double weight, double p) {
  Evaluation e;
  e.residual = y - span * c;
  const Eigen::Index n = e.residual.size();
  Eigen::VectorXd dual(n);  // w |r|^(p-1) sign r
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = e.residual[i];
    const double a = std::abs(r);
    const double ap1 = std::pow(a, p - 1.0);
    sum += ap1 * a;
    dual[i] = weight * (r < 0.0 ? -ap1 : ap1);
  }
  e.objective = weight * sum;
  const Eigen::VectorXd corr = span.transpose() * dual;
  e.gradient = -p * corr;
  if (e.objective > 0.0) {
    // F_r(phi) = ||r||^(1-p) sum w |r|^(p-1) sign(r) phi, ||r||^p = objective.
    const double scale = std::pow(e.objective, (1.0 - p) / p);
    e.optimality = corr.size() == 0 ? 0.0 : scale * corr.cwiseAbs().maxCoeff();
  }
  return e;
}

Eigen::VectorXd least_squares(const Eigen::Ref<const Eigen::MatrixXd>& span, const Eigen::VectorXd& y) {
  return span.householderQr().solve(y);
}

Projection finish(const SampledFunction& f0, const Eigen::Ref<const Eigen::MatrixXd>& span, double p,
                  Eigen::VectorXd coefficients, int iterations, double opt_tol, double atol) {
  Eigen::VectorXd r = f0.values() - span * coefficients;
  SampledFunction residual(f0.grid_ptr(), std::move(r));
  Projection out{.coefficients = std::move(coefficients), .residual = std::move(residual)};
  out.residual_norm = lp_norm(out.residual, p);
  out.iterations_used = iterations;
  if (out.residual_norm <= atol) {
    out.optimality = 0.0;
    out.converged = true;
  } else {
    out.optimality = projection_optimality(out.residual, span, p);
    out.converged = out.optimality <= opt_tol;
  }
  return out;
}

}  // namespace

double gram_condition(const Eigen::Ref<const Eigen::MatrixXd>& span, double weight) {
  if (span.cols() == 0) return 1.0;
  if (span.rows() < span.cols()) return std::numeric_limits<double>::infinity();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(std::sqrt(weight) * span);
  const auto& sv = svd.singularValues();
  const double smax = sv.maxCoeff();
  const double smin = sv.minCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  const double ratio = smax / smin;
  return ratio * ratio;
}

double projection_optimality(const SampledFunction& residual,
                             const Eigen::Ref<const Eigen::MatrixXd>& span, double p) {
  if (span.cols() == 0) return 0.0;
  if (lp_norm(residual, p) == 0.0) return 0.0;
  const NormingFunctional functional(residual, p);
  return functional.apply_columns(span).cwiseAbs().maxCoeff();
}

Projection project_best(const SampledFunction& f0, const Eigen::Ref<const Eigen::MatrixXd>& span,
                        double p, const ProjectionOptions& options, const Eigen::VectorXd* warm_start) {
  require_valid_exponent(p);
  if (static_cast<std::size_t>(span.rows()) != f0.size()) {
    throw std::invalid_argument("project_best: span rows do not match grid size");
  }
  const Eigen::Index k = span.cols();
  if (warm_start && warm_start->size() != k) {
    throw std::invalid_argument("project_best: warm start has wrong length");
  }

  const double f0_norm = lp_norm(f0, p);
  const double opt_tol = options.opt_tol.value_or(1e-9 * f0_norm);
  const double atol = options.residual_atol.value_or(1e-10 * f0_norm);

  if (k == 0) {
    return finish(f0, span, p, Eigen::VectorXd(0), 0, opt_tol, atol);
  }

  const double weight = f0.grid().weight();
  const double condition = gram_condition(span, weight);
  if (!(condition <= options.condition_limit)) {
    throw NumericallyDependentSpan(
        "span is numerically dependent (Gram condition " + std::to_string(condition) + ")",
        condition);
  }

  if (f0_norm == 0.0) {
    return finish(f0, span, p, Eigen::VectorXd::Zero(k), 0, opt_tol, atol);
  }

  const Eigen::VectorXd y = f0.values() / f0_norm;
  if (p == 2.0 && !options.force_iterative) {
    Eigen::VectorXd c = least_squares(span, y) * f0_norm;
    return finish(f0, span, p, std::move(c), 1, opt_tol, atol);
  }

  // Newton on the normalized problem: tolerances scale with 1/||f0||.
  const double opt_tol_n = opt_tol;  // F is scale invariant
  const double atol_n = atol / f0_norm;
  Eigen::VectorXd c = warm_start ? Eigen::VectorXd(*warm_start / f0_norm) : least_squares(span, y);
  Evaluation cur = evaluate(y, span, c, weight, p);

  const double y_max = y.lpNorm<Eigen::Infinity>();
  int it = 0;
  for (; it < options.max_inner_iter; ++it) {
    const double rnorm = std::pow(cur.objective, 1.0 / p);
    if (rnorm <= atol_n || cur.optimality <= opt_tol_n) break;

    Eigen::VectorXd root(y.size());  // square root of the Newton weights w |r|^(p-2)
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double a = std::max(std::abs(cur.residual[i]), options.weight_floor);
      root[i] = std::sqrt(weight * std::pow(a, p - 2.0));
    }
    // The Newton step solves min || W^(1/2) (span s - r / (p - 1)) ||_2.
    const Eigen::MatrixXd scaled = root.asDiagonal() * span;
    const Eigen::VectorXd rhs = root.cwiseProduct(cur.residual) / (p - 1.0);
    Eigen::VectorXd step = scaled.colPivHouseholderQr().solve(rhs);
    double slope = cur.gradient.dot(step);
    if (!step.allFinite() || !(slope < 0.0)) {
      // Fall back to steepest descent scaled by the Hessian diagonal.
      const Eigen::VectorXd diag = (p * (p - 1.0) * scaled.colwise().squaredNorm().transpose()).cwiseMax(1e-300);
      step = -cur.gradient.cwiseQuotient(diag);
      slope = cur.gradient.dot(step);
    }

    // Relative rounding level of the objective: r = y - span c loses digits by cancellation.
    const double r_max = cur.residual.lpNorm<Eigen::Infinity>();
    const double flat_tol =
        std::max(1e-13, 100.0 * p * std::numeric_limits<double>::epsilon() * y_max / std::max(r_max, 1e-300));
    double alpha = 1.0;
    bool accepted = false;
    Evaluation next;
    for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
      Eigen::VectorXd trial = c + alpha * step;
      next = evaluate(y, span, trial, weight, p);
      const bool armijo = next.objective <= cur.objective + 1e-4 * alpha * slope;
      // Near the optimum the objective is flat to rounding; accept steps that
      // do not increase it beyond rounding and reduce the optimality gap.
      const bool flat = next.objective <= cur.objective * (1.0 + flat_tol) &&
                        next.optimality < cur.optimality;
      if (armijo || flat) {
        c = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    cur = std::move(next);
  }

  Projection out = finish(f0, span, p, c * f0_norm, it, opt_tol, atol);
  if (!out.converged && options.strict) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "project_best: optimality %.3e above tolerance %.3e after %d iterations (residual %.3e)",
                  out.optimality, opt_tol, it, out.residual_norm);
    throw NoConvergence(msg, std::move(out));
  }
  return out;
}

Projection project_best(const SampledFunction& f0, const Dictionary& dict,
                        const std::vector<std::size_t>& indices, double p,
                        const ProjectionOptions& options, const Eigen::VectorXd* warm_start) {
  if (!(f0.grid() == dict.grid())) {
    throw std::invalid_argument("project_best: target and dictionary live on different grids");
  }
  const Eigen::MatrixXd span = dict.columns(indices);
  return project_best(f0, span, p, options, warm_start);
}

}  // namespace wcga
