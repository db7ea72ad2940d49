#include "wcga/lpspace.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wcga {

Grid::Grid(int dim, int points_per_axis) : dim_(dim), n_(points_per_axis) {
  if (dim < 1) throw std::invalid_argument("Grid: dim must be positive");
  if (points_per_axis < 1) throw std::invalid_argument("Grid: points_per_axis must be positive");
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(points_per_axis);
  weight_ = 1.0 / static_cast<double>(size_);
}

int Grid::position(std::size_t index, int axis) const {
  // first axis varies slowest
  std::size_t stride = 1;
  for (int a = dim_ - 1; a > axis; --a) stride *= static_cast<std::size_t>(n_);
  return static_cast<int>((index / stride) % static_cast<std::size_t>(n_));
}

double Grid::coordinate(std::size_t index, int axis) const {
  return static_cast<double>(position(index, axis)) / static_cast<double>(n_);
}

std::vector<double> Grid::node(std::size_t index) const {
  std::vector<double> x(static_cast<std::size_t>(dim_));
  for (int a = 0; a < dim_; ++a) x[static_cast<std::size_t>(a)] = coordinate(index, a);
  return x;
}

GridPtr make_grid(int dim, int points_per_axis) {
  return std::make_shared<const Grid>(dim, points_per_axis);
}

SampledFunction::SampledFunction(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("SampledFunction: null grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size()) {
    throw std::invalid_argument("SampledFunction: expected " + std::to_string(grid_->size()) +
                                " values, got " + std::to_string(values_.size()));
  }
  if (!values_.allFinite()) throw std::invalid_argument("SampledFunction: non-finite value");
}

SampledFunction SampledFunction::zeros(GridPtr grid) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  return SampledFunction(std::move(grid), Eigen::VectorXd::Zero(n));
}

SampledFunction& SampledFunction::operator+=(const SampledFunction& rhs) {
  if (!same_grid(rhs)) throw std::invalid_argument("SampledFunction: grid mismatch");
  values_ += rhs.values_;
  return *this;
}

SampledFunction& SampledFunction::operator-=(const SampledFunction& rhs) {
  if (!same_grid(rhs)) throw std::invalid_argument("SampledFunction: grid mismatch");
  values_ -= rhs.values_;
  return *this;
}

SampledFunction& SampledFunction::operator*=(double scale) {
  values_ *= scale;
  return *this;
}

void require_valid_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("exponent p must lie in (1, inf), got " + std::to_string(p));
  }
}

SmoothnessParams smoothness_params(double p) {
  require_valid_exponent(p);
  SmoothnessParams s{};
  s.p = p;
  s.q = std::min(p, 2.0);
  s.gamma = p >= 2.0 ? (p - 1.0) / 2.0 : 1.0 / p;
  s.q_conj = s.q / (s.q - 1.0);
  return s;
}

double lp_norm(const Eigen::Ref<const Eigen::VectorXd>& values, double weight, double p) {
  require_valid_exponent(p);
  const double peak = values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  if (p == 2.0) return peak * std::sqrt(weight * (values / peak).squaredNorm());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) sum += std::pow(std::abs(values[i]) / peak, p);
  return peak * std::pow(weight * sum, 1.0 / p);
}

double lp_norm(const SampledFunction& f, double p) {
  return lp_norm(f.values(), f.grid().weight(), p);
}

double inner_product(const SampledFunction& f, const SampledFunction& g) {
  if (!f.same_grid(g)) throw std::invalid_argument("inner_product: grid mismatch");
  return f.grid().weight() * f.values().dot(g.values());
}

NormingFunctional::NormingFunctional(const Eigen::Ref<const Eigen::VectorXd>& values, double weight,
                                     double p) {
  source_norm_ = lp_norm(values, weight, p);
  if (source_norm_ == 0.0) {
    throw std::invalid_argument("norming functional is undefined for the zero element");
  }
  // ||f||^(1-p) |f|^(p-1) sign f = |f/||f|||^(p-1) sign f / ||f||^0, computed on
  // the normalized values to stay in range.
  density_.resize(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double u = values[i] / source_norm_;
    const double mag = p == 2.0 ? std::abs(u) : std::pow(std::abs(u), p - 1.0);
    density_[i] = weight * (u < 0.0 ? -mag : (u > 0.0 ? mag : 0.0));
  }
}

NormingFunctional::NormingFunctional(const SampledFunction& f, double p)
    : NormingFunctional(f.values(), f.grid().weight(), p) {}

double NormingFunctional::operator()(const SampledFunction& g) const {
  if (static_cast<Eigen::Index>(g.size()) != density_.size()) {
    throw std::invalid_argument("norming functional: grid mismatch");
  }
  return density_.dot(g.values());
}

double peak_functional(const SampledFunction& f, const SampledFunction& g, double p) {
  if (!f.same_grid(g)) throw std::invalid_argument("peak_functional: grid mismatch");
  return NormingFunctional(f, p)(g);
}

}  // namespace wcga
