#include "edagcn/data.hpp"

#include <algorithm>
#include <string>

#include "edagcn/error.hpp"

namespace edagcn {

FeatureMatrix FeatureMatrix::identity(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return {RowMatrix::Identity(m, m)};
}

LabelData LabelData::build(std::vector<std::optional<int>> labels, std::vector<NodeId> train,
                           std::vector<NodeId> val, std::vector<NodeId> test,
                           std::optional<std::size_t> n_classes) {
  const std::size_t n = labels.size();
  int max_class = -1;
  for (const auto& y : labels) {
    if (!y) continue;
    if (*y < 0) throw ValidationError("negative class index " + std::to_string(*y));
    max_class = std::max(max_class, *y);
  }
  const std::size_t k = n_classes.value_or(static_cast<std::size_t>(max_class + 1));
  if (max_class >= 0 && static_cast<std::size_t>(max_class) >= k)
    throw ValidationError("class index " + std::to_string(max_class) + " exceeds class count");

  LabelData out;
  out.one_hot = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i]) out.one_hot(static_cast<Eigen::Index>(i), *labels[i]) = 1.0;

  std::vector<int> owner(n, -1);
  auto claim = [&](std::vector<NodeId>& mask, int id, const char* name) {
    std::sort(mask.begin(), mask.end());
    mask.erase(std::unique(mask.begin(), mask.end()), mask.end());
    for (NodeId v : mask) {
      if (v >= n) throw BoundsError(std::string(name) + " node " + std::to_string(v) + " out of range");
      if (owner[v] != -1)
        throw ValidationError("node " + std::to_string(v) + " assigned to more than one split");
      if (!labels[v]) throw ValidationError(std::string(name) + " node " + std::to_string(v) + " has no label");
      owner[v] = id;
    }
  };
  claim(train, 0, "train");
  claim(val, 1, "val");
  claim(test, 2, "test");
  out.labels = std::move(labels);
  out.train_mask = std::move(train);
  out.val_mask = std::move(val);
  out.test_mask = std::move(test);
  return out;
}

}  // namespace edagcn
