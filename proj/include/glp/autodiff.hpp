#pragma once

#include <functional>
#include <vector>

#include "glp/tensor.hpp"

namespace glp {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape over rank-2 tensors.  Ops append nodes in topological
// order; backward() walks the tape in reverse.  One tape per forward pass;
// tapes are cheap and single-threaded by design (parallelism lives one
// level up, across independent graphs/sentences).
class Tape {
 public:
  Var input(Tensor t, bool requires_grad = false);

  const Tensor& val(Var x) const { return nodes_[check(x)].value; }
  const Tensor& grad(Var x) const;
  bool has_grad(Var x) const { return nodes_[check(x)].grad_ready; }
  bool requires_grad(Var x) const { return nodes_[check(x)].requires_grad; }
  void backward(Var loss, double seed = 1.0);
  size_t size() const { return nodes_.size(); }

  // elementwise / shape ops
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var add_rowvec(Var a, Var b);  // b is (1, cols)
  Var scale(Var a, double c);
  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var slice_cols(Var a, int start, int len);
  Var gather_rows(Var a, std::vector<int> index);

  // matrix ops
  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);  // a @ b^T

  // nonlinearities
  Var leaky_relu(Var a, double negative_slope);
  Var relu(Var a);
  Var elu(Var a);
  Var tanh_(Var a);
  Var sigmoid(Var a);

  // attention building blocks
  // h (n, heads*d) . a (1, heads*d) per head -> (n, heads)
  Var rowwise_dot_perhead(Var h, Var a, int heads);
  // per-(segment, head) softmax of scores (E, heads)
  Var segment_softmax(Var scores, std::vector<int> segments, int num_segments);
  // out[s, h*d+k] = sum over edges e with segment s of alpha[e,h]*msgs[e,h*d+k]
  Var segment_mix(Var alpha, Var msgs, std::vector<int> segments, int num_segments);
  Var mean_heads(Var a, int heads);
  Var layer_norm(Var a, Var gamma, Var beta, double eps = 1e-5);
  // row softmax over unmasked key columns; masked columns get exactly 0
  Var softmax_rows_masked(Var a, std::vector<uint8_t> key_mask);

  // losses
  // sum of -log softmax(cell=label) over rows with label >= 0
  Var ce_masked_sum(Var logits, std::vector<int> labels, int* labeled_count = nullptr);
  // mean over labeled rows; 0 (with zero gradient) when all labels masked
  Var ce_masked_mean(Var logits, const std::vector<int>& labels, bool* all_masked = nullptr);
  Var sum_all(Var a);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_ready = false;
    std::function<void()> back;  // set only for interior nodes that need grads
  };

  int check(Var x) const {
    if (x.id < 0 || x.id >= static_cast<int>(nodes_.size())) fail_internal("invalid Var");
    return x.id;
  }
  Var push(Tensor value, bool requires_grad, std::function<void()> back);
  Tensor& grad_buf(int id);
  Node& node(Var x) { return nodes_[static_cast<size_t>(check(x))]; }

  std::vector<Node> nodes_;
};

}  // namespace glp
