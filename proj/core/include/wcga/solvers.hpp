#pragma once

#include "wcga/dictionaries.hpp"
#include "wcga/errors.hpp"
#include "wcga/lpspace.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace wcga {

struct ProjectionOptions {
  /// First-order tolerance on max_j |F_residual(phi_j)|. Defaults to 1e-9 ||f0||.
  std::optional<double> opt_tol;
  /// Residual norm below which the optimality test is skipped. Defaults to 1e-10 ||f0||.
  std::optional<double> residual_atol;
  int max_inner_iter = 200;
  /// Lower clamp on |residual| inside the Newton weights |r|^(p-2).
  double weight_floor = 1e-12;
  /// Largest admissible Gram condition number of the span.
  double condition_limit = 1e12;
  /// Use the Newton path even for p = 2.
  bool force_iterative = false;
  /// Throw NoConvergence instead of returning converged = false.
  bool strict = false;
};

/// Best L_p approximation of f0 from the span of a finite family.
struct Projection {
  Eigen::VectorXd coefficients;
  SampledFunction residual;
  double residual_norm = 0.0;
  int iterations_used = 0;
  bool converged = false;
  /// max_j |F_residual(phi_j)|, or 0 when the residual is below residual_atol.
  double optimality = 0.0;
};

class NoConvergence : public NumericalError {
 public:
  NoConvergence(const std::string& what, Projection best)
      : NumericalError(what), best_(std::move(best)) {}
  const Projection& best() const noexcept { return best_; }

 private:
  Projection best_;
};

/// Minimizes c -> ||f0 - sum_j c_j span_j||_p over the columns of `span`.
///
/// p = 2 is solved by a Householder QR least-squares solve. Otherwise a
/// damped Newton iteration on the p-th power objective runs until the
/// norming functional of the residual annihilates every span element to
/// within opt_tol, or max_inner_iter is reached. `warm_start`, when given,
/// must have one entry per column.
///
/// Throws NumericallyDependentSpan when the Gram condition number exceeds
/// condition_limit.
Projection project_best(const SampledFunction& f0, const Eigen::Ref<const Eigen::MatrixXd>& span,
                        double p, const ProjectionOptions& options = {},
                        const Eigen::VectorXd* warm_start = nullptr);

Projection project_best(const SampledFunction& f0, const Dictionary& dict,
                        const std::vector<std::size_t>& indices, double p,
                        const ProjectionOptions& options = {},
                        const Eigen::VectorXd* warm_start = nullptr);

/// max_j |F_residual(span_j)|; 0 for a zero residual or empty span.
double projection_optimality(const SampledFunction& residual,
                             const Eigen::Ref<const Eigen::MatrixXd>& span, double p);

/// Condition number of the quadrature Gram matrix of the columns.
double gram_condition(const Eigen::Ref<const Eigen::MatrixXd>& span, double weight);

}  // namespace wcga
