#pragma once

#include <span>
#include <vector>

#include "edagcn/data.hpp"

namespace edagcn {

struct Evaluation {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;  // one entry per class 0..K-1
};

/// Argmax of each row; ties go to the lowest class index.
std::vector<int> predict(const RowMatrix& y_hat);

/// Accuracy and F1 over `mask`. Macro F1 averages the classes that occur in
/// the masked truth or predictions.
Evaluation evaluate_predictions(const std::vector<int>& predicted, const LabelData& labels,
                                std::span<const NodeId> mask);

Evaluation evaluate(const RowMatrix& y_hat, const LabelData& labels, std::span<const NodeId> mask);

/// Macro F1 from parallel truth/prediction vectors over classes 0..n_classes-1.
double macro_f1(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes,
                std::vector<double>* per_class = nullptr);

}  // namespace edagcn
