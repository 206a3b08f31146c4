#include "edagcn/metrics.hpp"

#include <string>

#include "edagcn/error.hpp"

namespace edagcn {

std::vector<int> predict(const RowMatrix& y_hat) {
  std::vector<int> out(static_cast<std::size_t>(y_hat.rows()));
  for (Eigen::Index r = 0; r < y_hat.rows(); ++r) {
    int best = 0;
    for (Eigen::Index c = 1; c < y_hat.cols(); ++c)
      if (y_hat(r, c) > y_hat(r, best)) best = static_cast<int>(c);
    out[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

double macro_f1(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes,
                std::vector<double>* per_class) {
  if (truth.size() != predicted.size()) throw ShapeError("truth and prediction lengths differ");
  std::vector<std::size_t> tp(n_classes), fp(n_classes), fn(n_classes);
  std::vector<char> seen(n_classes);
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const auto t = static_cast<std::size_t>(truth[j]), p = static_cast<std::size_t>(predicted[j]);
    if (t >= n_classes || p >= n_classes) throw BoundsError("class index out of range");
    seen[t] = seen[p] = 1;
    if (t == p) {
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  std::vector<double> f1(n_classes, 0.0);
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const double precision = tp[c] + fp[c] ? static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]) : 0.0;
    const double recall = tp[c] + fn[c] ? static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]) : 0.0;
    f1[c] = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    if (seen[c]) {
      sum += f1[c];
      ++present;
    }
  }
  if (per_class) *per_class = f1;
  return present ? sum / static_cast<double>(present) : 0.0;
}

Evaluation evaluate_predictions(const std::vector<int>& predicted, const LabelData& labels,
                                std::span<const NodeId> mask) {
  if (mask.empty()) throw ValidationError("cannot evaluate on an empty mask");
  std::vector<int> truth, pred;
  truth.reserve(mask.size());
  pred.reserve(mask.size());
  std::size_t correct = 0;
  for (NodeId n : mask) {
    if (n >= labels.n_nodes() || !labels.labels[n])
      throw ValidationError("node " + std::to_string(n) + " in mask has no label");
    truth.push_back(*labels.labels[n]);
    pred.push_back(predicted.at(n));
    correct += truth.back() == pred.back();
  }
  Evaluation out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(mask.size());
  out.macro_f1 = macro_f1(truth, pred, labels.n_classes(), &out.per_class_f1);
  return out;
}

Evaluation evaluate(const RowMatrix& y_hat, const LabelData& labels, std::span<const NodeId> mask) {
  return evaluate_predictions(predict(y_hat), labels, mask);
}

}  // namespace edagcn
