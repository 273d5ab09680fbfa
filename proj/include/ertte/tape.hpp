#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace ertte::nn {

using Mat = Eigen::MatrixXd;

// A named, trainable matrix. Gradients accumulate into `grad` during
// Tape::backward and are consumed by the optimizer.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  Parameter(std::string n, long rows, long cols)
      : name(std::move(n)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)) {}
};

using NodeRef = int;

// Reverse-mode tape over dense matrices. One tape per forward pass; with
// recording off only values are computed (inference path uses the exact same
// op implementations).
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  [[nodiscard]] bool recording() const { return recording_; }
  [[nodiscard]] const Mat& value(NodeRef r) const { return nodes_[static_cast<std::size_t>(r)].value; }
  [[nodiscard]] double scalar(NodeRef r) const { return value(r)(0, 0); }

  NodeRef input(Mat v);
  NodeRef param(Parameter& p);
  // Embedding gather: row i of the result is table.value.row(indices[i]).
  NodeRef rows(Parameter& table, std::vector<int> indices);

  NodeRef matmul(NodeRef a, NodeRef b);
  NodeRef transpose(NodeRef a);
  NodeRef add(NodeRef a, NodeRef b);
  NodeRef sub(NodeRef a, NodeRef b);
  NodeRef cmul(NodeRef a, NodeRef b);
  NodeRef scale(NodeRef a, double s);
  // Broadcast a 1xC row over every row of a.
  NodeRef add_row(NodeRef a, NodeRef row);
  NodeRef mul_row(NodeRef a, NodeRef row);
  NodeRef relu(NodeRef a);
  NodeRef exp(NodeRef a);
  NodeRef abs(NodeRef a);
  // Per-row softmax (numerically stabilized).
  NodeRef row_softmax(NodeRef a);
  // Per-row x / ||x||_2.
  NodeRef row_normalize_l2(NodeRef a);
  // Per-row (x - mean) / sqrt(var + eps); affine scale/shift are separate ops.
  NodeRef layer_norm_rows(NodeRef a, double eps);
  NodeRef concat_cols(const std::vector<NodeRef>& parts);
  NodeRef concat_rows(const std::vector<NodeRef>& parts);
  NodeRef slice_cols(NodeRef a, long first, long count);
  NodeRef mean_rows(NodeRef a);  // 1xC
  NodeRef mean_all(NodeRef a);   // 1x1
  NodeRef sum_all(NodeRef a);    // 1x1
  NodeRef pick(NodeRef a, long r, long c);  // 1x1
  // Elementwise Huber: x^2/2 for |x| <= delta, else delta*(|x| - delta/2).
  NodeRef huber(NodeRef a, double delta);
  // InfoNCE loss over an NxN similarity matrix with temperature tau.
  NodeRef info_nce(NodeRef similarities, double tau);

  // Accumulates parameter gradients for a 1x1 loss node.
  void backward(NodeRef loss);

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Tape&)> back;
  };

  NodeRef push(Mat value, std::function<void(Tape&)> back);
  Mat& grad(NodeRef r) { return nodes_[static_cast<std::size_t>(r)].grad; }

  std::vector<Node> nodes_;
  bool recording_;
};

}  // namespace ertte::nn
