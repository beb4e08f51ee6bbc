#include "glp/tensor.hpp"

#include <cmath>

#include "glp/parallel.hpp"

namespace glp {

Tensor glorot(int rows, int cols, Rng& rng) {
  Tensor t(rows, cols);
  double s = std::sqrt(6.0 / (rows + cols));
  for (auto& x : t.v) x = uniform(rng, -s, s);
  return t;
}

void matmul_into(const Tensor& a, const Tensor& b, Tensor& out) {
  if (a.cols != b.rows) fail_internal("matmul: inner dimensions differ");
  out = Tensor(a.rows, b.cols);
  int n = a.rows, k = a.cols, m = b.cols;
  par::for_each(n, [&](int i) {
    double* orow = &out.v[static_cast<size_t>(i) * m];
    const double* arow = &a.v[static_cast<size_t>(i) * k];
    for (int p = 0; p < k; ++p) {
      double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = &b.v[static_cast<size_t>(p) * m];
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  });
}

void matmul_nt_into(const Tensor& a, const Tensor& b, Tensor& out) {
  if (a.cols != b.cols) fail_internal("matmul_nt: inner dimensions differ");
  out = Tensor(a.rows, b.rows);
  int n = a.rows, k = a.cols, m = b.rows;
  par::for_each(n, [&](int i) {
    const double* arow = &a.v[static_cast<size_t>(i) * k];
    double* orow = &out.v[static_cast<size_t>(i) * m];
    for (int j = 0; j < m; ++j) {
      const double* brow = &b.v[static_cast<size_t>(j) * k];
      double s = 0;
      for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
      orow[j] = s;
    }
  });
}

void matmul_tn_into(const Tensor& a, const Tensor& b, Tensor& out) {
  if (a.rows != b.rows) fail_internal("matmul_tn: inner dimensions differ");
  out = Tensor(a.cols, b.cols);
  int n = a.cols, k = a.rows, m = b.cols;
  par::for_each(n, [&](int i) {
    double* orow = &out.v[static_cast<size_t>(i) * m];
    for (int p = 0; p < k; ++p) {
      double av = a.v[static_cast<size_t>(p) * n + i];
      if (av == 0.0) continue;
      const double* brow = &b.v[static_cast<size_t>(p) * m];
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  });
}

}  // namespace glp
