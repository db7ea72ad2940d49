#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <vector>

namespace wcga {

/// Uniform periodic tensor grid on [0,1)^d with equal quadrature weights.
///
/// Nodes are {j/n : 0 <= j < n} per axis, flattened with the first axis
/// varying slowest. The rectangle rule on this grid integrates
/// trigonometric polynomials of degree < n exactly.
class Grid {
 public:
  Grid(int dim, int points_per_axis);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  double weight() const noexcept { return weight_; }

  /// Coordinate of flat node `index` along `axis`.
  double coordinate(std::size_t index, int axis) const;
  /// Integer position of flat node `index` along `axis`, in [0, n).
  int position(std::size_t index, int axis) const;
  std::vector<double> node(std::size_t index) const;

  bool operator==(const Grid& other) const noexcept {
    return dim_ == other.dim_ && n_ == other.n_;
  }

 private:
  int dim_;
  int n_;
  std::size_t size_;
  double weight_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dim, int points_per_axis);

/// A real function sampled at the nodes of a Grid.
class SampledFunction {
 public:
  /// Empty placeholder with no grid; only assignment and size() are valid.
  SampledFunction() = default;
  SampledFunction(GridPtr grid, Eigen::VectorXd values);

  static SampledFunction zeros(GridPtr grid);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

  bool same_grid(const SampledFunction& other) const noexcept {
    return grid_ == other.grid_ || *grid_ == *other.grid_;
  }

  SampledFunction& operator+=(const SampledFunction& rhs);
  SampledFunction& operator-=(const SampledFunction& rhs);
  SampledFunction& operator*=(double scale);

  friend SampledFunction operator+(SampledFunction lhs, const SampledFunction& rhs) { return lhs += rhs; }
  friend SampledFunction operator-(SampledFunction lhs, const SampledFunction& rhs) { return lhs -= rhs; }
  friend SampledFunction operator*(SampledFunction f, double s) { return f *= s; }
  friend SampledFunction operator*(double s, SampledFunction f) { return f *= s; }

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

/// Smoothness data of L_p: rho(u) <= gamma * u^q with q = min(p, 2).
struct SmoothnessParams {
  double p;
  double q;
  double gamma;
  double q_conj;  // q / (q - 1)
};

SmoothnessParams smoothness_params(double p);

/// Throws std::invalid_argument unless 1 < p < inf.
void require_valid_exponent(double p);

/// (sum_nodes w |f|^p)^(1/p). Overflow-safe for large values.
double lp_norm(const SampledFunction& f, double p);
double lp_norm(const Eigen::Ref<const Eigen::VectorXd>& values, double weight, double p);

/// Quadrature L2 inner product sum_nodes w f g.
double inner_product(const SampledFunction& f, const SampledFunction& g);

/// The norming functional of a nonzero f in L_p, stored as its density
/// ||f||^(1-p) w |f|^(p-1) sign(f) so that applying it is one dot product.
class NormingFunctional {
 public:
  NormingFunctional(const SampledFunction& f, double p);
  NormingFunctional(const Eigen::Ref<const Eigen::VectorXd>& values, double weight, double p);

  double operator()(const SampledFunction& g) const;
  double apply(const Eigen::Ref<const Eigen::VectorXd>& g) const { return density_.dot(g); }
  /// Values F(column_j) for every column of `columns`.
  Eigen::VectorXd apply_columns(const Eigen::Ref<const Eigen::MatrixXd>& columns) const {
    return columns.transpose() * density_;
  }

  const Eigen::VectorXd& density() const noexcept { return density_; }
  double norm_of_source() const noexcept { return source_norm_; }

 private:
  Eigen::VectorXd density_;
  double source_norm_ = 0.0;
};

/// F_f(g) for the unique norming functional of f in L_p.
/// Throws std::invalid_argument when f is zero.
double peak_functional(const SampledFunction& f, const SampledFunction& g, double p);

}  // namespace wcga
