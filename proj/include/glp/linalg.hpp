#pragma once

#include <vector>

namespace glp {

// Minimal dense column-major-free matrix for the embedding SVD.
struct DMatrix {
  int rows = 0, cols = 0;
  std::vector<double> v;  // row-major

  DMatrix() = default;
  DMatrix(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

struct SvdResult {
  // A (m x n) ~= U * diag(sigma) * V^T, factors for min(m, n) components,
  // singular values descending.  Deterministic sign convention: the
  // largest-magnitude entry of each left singular vector is positive.
  DMatrix u;                  // m x k
  DMatrix vt;                 // k x n
  std::vector<double> sigma;  // k
};

// One-sided Jacobi SVD: cyclic column orthogonalization with a fixed sweep
// budget and convergence tolerance; fully deterministic.
SvdResult jacobi_svd(const DMatrix& a, double tol = 1e-10, int max_sweeps = 60);

}  // namespace glp
