#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "edagcn/data.hpp"

namespace edagcn {

/// Dense row-major array with an explicit shape. Used for every trainable
/// parameter so optimizers, checks and checkpoints can treat them uniformly.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims)
      : shape(std::move(dims)),
        data(std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{}), 0.0) {}

  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// N x I x P activations, kept as I slices of N x P (one per graph).
struct GraphTensor {
  std::vector<RowMatrix> slices;

  GraphTensor() = default;
  GraphTensor(std::size_t n_graphs, std::size_t n_nodes, std::size_t width)
      : slices(n_graphs, RowMatrix::Zero(static_cast<Eigen::Index>(n_nodes),
                                         static_cast<Eigen::Index>(width))) {}

  std::size_t n_graphs() const noexcept { return slices.size(); }
  std::size_t n_nodes() const { return slices.empty() ? 0 : static_cast<std::size_t>(slices[0].rows()); }
  std::size_t width() const { return slices.empty() ? 0 : static_cast<std::size_t>(slices[0].cols()); }

  /// The same N x P matrix on every slice.
  static GraphTensor replicate(const RowMatrix& m, std::size_t n_graphs) {
    GraphTensor t;
    t.slices.assign(n_graphs, m);
    return t;
  }

  friend bool operator==(const GraphTensor& a, const GraphTensor& b) {
    if (a.slices.size() != b.slices.size()) return false;
    for (std::size_t i = 0; i < a.slices.size(); ++i)
      if (a.slices[i].rows() != b.slices[i].rows() || a.slices[i].cols() != b.slices[i].cols() ||
          a.slices[i] != b.slices[i])
        return false;
    return true;
  }
};

}  // namespace edagcn
