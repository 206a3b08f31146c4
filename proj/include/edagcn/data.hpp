#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "edagcn/graph.hpp"

namespace edagcn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N x F node features; row n belongs to node n. Entries are finite.
struct FeatureMatrix {
  RowMatrix values;

  std::size_t n_nodes() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_features() const { return static_cast<std::size_t>(values.cols()); }

  static FeatureMatrix identity(std::size_t n);
};

/// Node labels with one-hot encoding and disjoint train/val/test node sets.
struct LabelData {
  std::vector<std::optional<int>> labels;  // per node, absent when unlabeled
  RowMatrix one_hot;                       // N x K_cls, zero rows for unlabeled nodes
  std::vector<NodeId> train_mask;
  std::vector<NodeId> val_mask;
  std::vector<NodeId> test_mask;

  std::size_t n_nodes() const { return labels.size(); }
  std::size_t n_classes() const { return static_cast<std::size_t>(one_hot.cols()); }

  /// Builds one-hot rows and checks that masks are disjoint, in range and labeled.
  static LabelData build(std::vector<std::optional<int>> labels, std::vector<NodeId> train,
                         std::vector<NodeId> val, std::vector<NodeId> test,
                         std::optional<std::size_t> n_classes = std::nullopt);
};

}  // namespace edagcn
