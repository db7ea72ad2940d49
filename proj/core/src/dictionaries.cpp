#include "wcga/dictionaries.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace wcga {

namespace {

constexpr double kNormTolerance = 1e-9;

// One univariate factor sampled on the n nodes of an axis.
struct AxisFactor {
  Eigen::VectorXd values;
  std::string label;
};

// Tensor products of per-axis factor families, first axis most significant.
void tensorize(const Grid& grid, const std::vector<AxisFactor>& factors, Eigen::MatrixXd& out,
               std::vector<std::string>& labels) {
  const int d = grid.dim();
  const std::size_t per_axis = factors.size();
  std::size_t count = 1;
  for (int a = 0; a < d; ++a) count *= per_axis;

  out.resize(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(count));
  labels.clear();
  labels.reserve(count);
  std::vector<std::size_t> digit(static_cast<std::size_t>(d), 0);
  for (std::size_t e = 0; e < count; ++e) {
    std::size_t rest = e;
    for (int a = d - 1; a >= 0; --a) {
      digit[static_cast<std::size_t>(a)] = rest % per_axis;
      rest /= per_axis;
    }
    std::string label;
    for (int a = 0; a < d; ++a) {
      if (a > 0) label += "*";
      label += factors[digit[static_cast<std::size_t>(a)]].label;
    }
    labels.push_back(std::move(label));
    for (std::size_t node = 0; node < grid.size(); ++node) {
      double v = 1.0;
      for (int a = 0; a < d; ++a) {
        v *= factors[digit[static_cast<std::size_t>(a)]].values[grid.position(node, a)];
      }
      out(static_cast<Eigen::Index>(node), static_cast<Eigen::Index>(e)) = v;
    }
  }
}

void normalize_columns(Eigen::MatrixXd& cols, double weight, double p) {
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    const double norm = lp_norm(cols.col(j), weight, p);
    if (norm == 0.0) {
      throw std::invalid_argument("dictionary column " + std::to_string(j) + " is zero");
    }
    cols.col(j) /= norm;
  }
}

bool columns_l2_orthogonal(const Eigen::MatrixXd& cols, double weight) {
  const Eigen::MatrixXd g = weight * (cols.transpose() * cols);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < g.cols(); ++j) {
      if (std::abs(g(i, j)) > 1e-12 * std::sqrt(g(i, i) * g(j, j))) return false;
    }
  }
  return true;
}

}  // namespace

Dictionary::Dictionary(GridPtr grid, Eigen::MatrixXd columns, std::vector<std::string> labels,
                       double p, bool orthogonal_type)
    : grid_(std::move(grid)),
      columns_(std::move(columns)),
      labels_(std::move(labels)),
      p_(p),
      orthogonal_type_(orthogonal_type) {
  require_valid_exponent(p_);
  if (!grid_) throw std::invalid_argument("Dictionary: null grid");
  if (static_cast<std::size_t>(columns_.rows()) != grid_->size()) {
    throw std::invalid_argument("Dictionary: column length does not match grid");
  }
  if (labels_.size() != size()) throw std::invalid_argument("Dictionary: one label per element");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) throw std::invalid_argument("Dictionary: duplicate label " + l);
  }
  for (Eigen::Index j = 0; j < columns_.cols(); ++j) {
    const double norm = lp_norm(columns_.col(j), grid_->weight(), p_);
    if (std::abs(norm - 1.0) > kNormTolerance) {
      throw std::invalid_argument("Dictionary: element " + labels_[static_cast<std::size_t>(j)] +
                                  " is not unit norm");
    }
  }
}

SampledFunction Dictionary::element(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("Dictionary::element");
  return SampledFunction(grid_, columns_.col(static_cast<Eigen::Index>(i)));
}

Eigen::MatrixXd Dictionary::columns(const std::vector<std::size_t>& indices) const {
  Eigen::MatrixXd out(columns_.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size()) throw std::out_of_range("Dictionary::columns");
    out.col(static_cast<Eigen::Index>(k)) = columns_.col(static_cast<Eigen::Index>(indices[k]));
  }
  return out;
}

SparseElement::SparseElement(std::vector<std::size_t> sup, std::vector<double> coef) {
  if (sup.size() != coef.size()) {
    throw std::invalid_argument("SparseElement: support and coefficients differ in length");
  }
  std::unordered_set<std::size_t> seen;
  for (std::size_t k = 0; k < sup.size(); ++k) {
    if (!seen.insert(sup[k]).second) throw std::invalid_argument("SparseElement: repeated index");
    if (coef[k] != 0.0) {
      support.push_back(sup[k]);
      coefficients.push_back(coef[k]);
    }
  }
}

double SparseElement::l1_norm() const {
  double s = 0.0;
  for (double c : coefficients) s += std::abs(c);
  return s;
}

SampledFunction SparseElement::synthesize(const Dictionary& dict) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dict.grid().size()));
  for (std::size_t k = 0; k < support.size(); ++k) v += coefficients[k] * dict.column(support[k]);
  return SampledFunction(dict.grid_ptr(), std::move(v));
}

Dictionary build_trig(int d, int max_freq, double p, GridPtr grid) {
  require_valid_exponent(p);
  if (!grid) throw std::invalid_argument("build_trig: null grid");
  if (d != grid->dim()) throw std::invalid_argument("build_trig: d does not match grid dimension");
  if (max_freq < 0) throw std::invalid_argument("build_trig: max_freq must be nonnegative");
  const int n = grid->points_per_axis();
  if (2 * max_freq >= n) {
    throw std::invalid_argument("build_trig: max_freq " + std::to_string(max_freq) +
                                " at or above Nyquist for " + std::to_string(n) + " points");
  }

  std::vector<AxisFactor> factors;
  factors.push_back({Eigen::VectorXd::Ones(n), "1"});
  for (int k = 1; k <= max_freq; ++k) {
    AxisFactor c{Eigen::VectorXd(n), "cos" + std::to_string(k)};
    AxisFactor s{Eigen::VectorXd(n), "sin" + std::to_string(k)};
    for (int j = 0; j < n; ++j) {
      const double arg = 2.0 * std::numbers::pi * k * static_cast<double>(j) / n;
      c.values[j] = std::cos(arg);
      s.values[j] = std::sin(arg);
    }
    factors.push_back(std::move(c));
    factors.push_back(std::move(s));
  }

  Eigen::MatrixXd cols;
  std::vector<std::string> labels;
  tensorize(*grid, factors, cols, labels);
  normalize_columns(cols, grid->weight(), p);
  Dictionary dict(grid, std::move(cols), std::move(labels), p, true);
  dict.set_descriptor({.type = "trig", .dim = d, .points_per_axis = n, .p = p, .max_freq = max_freq});
  return dict;
}

Dictionary build_haar(int levels, double p, GridPtr grid) {
  require_valid_exponent(p);
  if (!grid) throw std::invalid_argument("build_haar: null grid");
  if (levels < 0 || levels > 30) throw std::invalid_argument("build_haar: levels out of range");
  const int n = grid->points_per_axis();
  const int cells = 1 << levels;
  if (n % cells != 0) {
    throw std::invalid_argument("build_haar: 2^J = " + std::to_string(cells) +
                                " does not divide " + std::to_string(n) + " points per axis");
  }

  std::vector<AxisFactor> factors;
  factors.push_back({Eigen::VectorXd::Ones(n), "[0,1]"});
  for (int j = 0; j < levels; ++j) {
    const int intervals = 1 << j;
    const int width = n / intervals;
    for (int k = 0; k < intervals; ++k) {
      AxisFactor h{Eigen::VectorXd::Zero(n), ""};
      for (int i = 0; i < width; ++i) h.values[k * width + i] = i < width / 2 ? 1.0 : -1.0;
      h.label = j == 0 ? "(0,1]"
                       : "[" + std::to_string(k) + "/" + std::to_string(intervals) + "," +
                             std::to_string(k + 1) + "/" + std::to_string(intervals) + ")";
      factors.push_back(std::move(h));
    }
  }

  Eigen::MatrixXd cols;
  std::vector<std::string> labels;
  tensorize(*grid, factors, cols, labels);
  normalize_columns(cols, grid->weight(), p);
  Dictionary dict(grid, std::move(cols), std::move(labels), p, true);
  dict.set_descriptor(
      {.type = "haar", .dim = grid->dim(), .points_per_axis = n, .p = p, .levels = levels});
  return dict;
}

Dictionary build_matrix(const Eigen::MatrixXd& columns, double p, GridPtr grid) {
  require_valid_exponent(p);
  if (!grid) throw std::invalid_argument("build_matrix: null grid");
  if (static_cast<std::size_t>(columns.rows()) != grid->size()) {
    throw std::invalid_argument("build_matrix: column length " + std::to_string(columns.rows()) +
                                " does not match " + std::to_string(grid->size()) + " grid nodes");
  }
  Eigen::MatrixXd cols = columns;
  normalize_columns(cols, grid->weight(), p);
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(cols.cols()));
  for (Eigen::Index j = 0; j < cols.cols(); ++j) labels.push_back("col" + std::to_string(j));
  const bool orthogonal = columns_l2_orthogonal(cols, grid->weight());
  return Dictionary(std::move(grid), std::move(cols), std::move(labels), p, orthogonal);
}

Dictionary build_matrix(const std::vector<Eigen::VectorXd>& columns, double p, GridPtr grid) {
  if (!grid) throw std::invalid_argument("build_matrix: null grid");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(grid->size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (static_cast<std::size_t>(columns[j].size()) != grid->size()) {
      throw std::invalid_argument("build_matrix: column " + std::to_string(j) +
                                  " length does not match grid");
    }
    m.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  return build_matrix(m, p, std::move(grid));
}

Dictionary build_gaussian(int columns, double p, GridPtr grid, std::uint64_t seed) {
  if (!grid) throw std::invalid_argument("build_gaussian: null grid");
  if (columns < 1) throw std::invalid_argument("build_gaussian: columns must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(grid->size()), columns);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
  }
  const int n = grid->points_per_axis();
  const int dim = grid->dim();
  Dictionary dict = build_matrix(m, p, std::move(grid));
  dict.set_descriptor({.type = "gaussian",
                       .dim = dim,
                       .points_per_axis = n,
                       .p = p,
                       .columns = columns,
                       .seed = seed});
  return dict;
}

Dictionary build_from_descriptor(const DictionaryDescriptor& desc) {
  auto grid = make_grid(desc.dim, desc.points_per_axis);
  if (desc.type == "trig") return build_trig(desc.dim, desc.max_freq, desc.p, grid);
  if (desc.type == "haar") return build_haar(desc.levels, desc.p, grid);
  if (desc.type == "gaussian") return build_gaussian(desc.columns, desc.p, grid, desc.seed);
  throw std::invalid_argument("unknown dictionary type '" + desc.type + "'");
}

Eigen::MatrixXd gram(const Dictionary& dict) {
  const Eigen::MatrixXd& m = dict.matrix();
  Eigen::MatrixXd g = dict.grid().weight() * (m.transpose() * m);
  return 0.5 * (g + g.transpose());
}

Eigen::MatrixXd gram(const Dictionary& dict, const std::vector<std::size_t>& indices) {
  const Eigen::MatrixXd m = dict.columns(indices);
  Eigen::MatrixXd g = dict.grid().weight() * (m.transpose() * m);
  return 0.5 * (g + g.transpose());
}

}  // namespace wcga
