#pragma once

#include <vector>

#include "glp/util.hpp"

namespace glp {

// Dense rank-2 tensor of 64-bit floats, row-major.  Scalars are (1,1),
// vectors (1,n).
struct Tensor {
  int rows = 0, cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}
  Tensor(int r, int c, std::vector<double> data) : rows(r), cols(c), v(std::move(data)) {
    if (v.size() != static_cast<size_t>(r) * static_cast<size_t>(c))
      fail_internal("Tensor: data size does not match shape");
  }

  static Tensor scalar(double x) { return Tensor(1, 1, {x}); }

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  size_t numel() const { return v.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  double item() const {
    if (numel() != 1) fail_internal("Tensor::item on non-scalar");
    return v[0];
  }
};

// Glorot-uniform init, deterministic in the rng stream.
Tensor glorot(int rows, int cols, Rng& rng);

// out = a @ b / a @ b^T / a^T @ b.  Row-parallel when threads > 1; each
// output row is accumulated by a single thread in a fixed order, so
// results are bit-identical for any thread count.
void matmul_into(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_nt_into(const Tensor& a, const Tensor& b, Tensor& out);
void matmul_tn_into(const Tensor& a, const Tensor& b, Tensor& out);

}  // namespace glp
