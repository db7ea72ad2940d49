#pragma once

#include "wcga/lpspace.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wcga {

/// Parameters that rebuild a dictionary deterministically. Serialized to
/// JSON instead of raw samples.
struct DictionaryDescriptor {
  std::string type;  // "trig", "haar" or "gaussian"
  int dim = 1;
  int points_per_axis = 256;
  double p = 2.0;
  int max_freq = 0;     // trig
  int levels = 0;       // haar
  int columns = 0;      // gaussian
  std::uint64_t seed = 0;  // gaussian

  bool operator==(const DictionaryDescriptor&) const = default;
};

/// Ordered finite family of unit L_p-norm elements on a common grid.
///
/// Element order is fixed at construction and defines tie-breaking in the
/// greedy selection step. Immutable after construction.
class Dictionary {
 public:
  Dictionary(GridPtr grid, Eigen::MatrixXd columns, std::vector<std::string> labels, double p,
             bool orthogonal_type = false);

  std::size_t size() const noexcept { return static_cast<std::size_t>(columns_.cols()); }
  double p() const noexcept { return p_; }
  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }

  /// Samples of every element, one column per element.
  const Eigen::MatrixXd& matrix() const noexcept { return columns_; }
  auto column(std::size_t i) const { return columns_.col(static_cast<Eigen::Index>(i)); }
  SampledFunction element(std::size_t i) const;
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Selected columns, in the order given.
  Eigen::MatrixXd columns(const std::vector<std::size_t>& indices) const;

  /// True when elements are mutually L2-orthogonal, so TGA coefficients are
  /// <f, psi> / ||psi||_2^2.
  bool orthogonal_type() const noexcept { return orthogonal_type_; }

  const std::optional<DictionaryDescriptor>& descriptor() const noexcept { return descriptor_; }
  void set_descriptor(DictionaryDescriptor d) { descriptor_ = std::move(d); }

 private:
  GridPtr grid_;
  Eigen::MatrixXd columns_;
  std::vector<std::string> labels_;
  double p_;
  bool orthogonal_type_;
  std::optional<DictionaryDescriptor> descriptor_;
};

/// f = sum_{i in support} x_i g_i. Zero coefficients are dropped.
struct SparseElement {
  std::vector<std::size_t> support;
  std::vector<double> coefficients;

  SparseElement() = default;
  SparseElement(std::vector<std::size_t> support, std::vector<double> coefficients);

  std::size_t sparsity() const noexcept { return support.size(); }
  double l1_norm() const;
  SampledFunction synthesize(const Dictionary& dict) const;
};

/// Real trigonometric system {1, cos 2 pi k x, sin 2 pi k x}, k = 1..max_freq,
/// tensorized over `d` axes and normalized in L_p. Per axis the order is
/// 1, cos1, sin1, cos2, sin2, ...; tensor products are ordered
/// lexicographically with the first axis most significant. Element count is
/// (2 max_freq + 1)^d. Requires max_freq < points_per_axis / 2.
Dictionary build_trig(int d, int max_freq, double p, GridPtr grid);

/// Haar system on levels 0..J-1, normalized in L_p.
///
/// Univariate: the constant (label "[0,1]") followed by the Haar function of
/// every dyadic interval of length 2^-j, j = 0..J-1, ordered by level and then
/// position. The level-0 Haar function carries the label "(0,1]". This gives
/// exactly 2^J elements, an orthogonal basis of the step functions on 2^J
/// equal cells. For grid.dim() > 1 the elements are tensor products, (2^J)^d
/// in total. Requires 2^J to divide points_per_axis.
Dictionary build_haar(int levels, double p, GridPtr grid);

/// Wraps each column as an element and normalizes it in L_p.
Dictionary build_matrix(const std::vector<Eigen::VectorXd>& columns, double p, GridPtr grid);
Dictionary build_matrix(const Eigen::MatrixXd& columns, double p, GridPtr grid);

/// `columns` i.i.d. standard Gaussian columns drawn from mt19937_64(seed),
/// normalized in L_p.
Dictionary build_gaussian(int columns, double p, GridPtr grid, std::uint64_t seed);

/// Rebuild from a descriptor. The result carries the descriptor.
Dictionary build_from_descriptor(const DictionaryDescriptor& desc);

/// Quadrature Gram matrix <g_i, g_j>, symmetrized.
Eigen::MatrixXd gram(const Dictionary& dict);
/// Gram matrix of the listed elements, in the order given.
Eigen::MatrixXd gram(const Dictionary& dict, const std::vector<std::size_t>& indices);

}  // namespace wcga
