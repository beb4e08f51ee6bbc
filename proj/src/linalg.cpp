#include "glp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace glp {

SvdResult jacobi_svd(const DMatrix& a, double tol, int max_sweeps) {
  // Work on B with cols <= rows; if A is wide, factor A^T and swap U/V.
  bool transposed = a.cols > a.rows;
  DMatrix b = a;
  if (transposed) {
    b = DMatrix(a.cols, a.rows);
    for (int r = 0; r < a.rows; ++r)
      for (int c = 0; c < a.cols; ++c) b.at(c, r) = a.at(r, c);
  }
  int m = b.rows, n = b.cols;

  // column-major copy of B for cheap column ops
  std::vector<std::vector<double>> col(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(m)));
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < m; ++r) col[static_cast<size_t>(c)][static_cast<size_t>(r)] = b.at(r, c);

  // V accumulates the rotations
  std::vector<std::vector<double>> vcols(static_cast<size_t>(n),
                                         std::vector<double>(static_cast<size_t>(n), 0.0));
  for (int c = 0; c < n; ++c) vcols[static_cast<size_t>(c)][static_cast<size_t>(c)] = 1.0;

  auto dot = [m](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0;
    for (int r = 0; r < m; ++r)
      s += x[static_cast<size_t>(r)] * y[static_cast<size_t>(r)];
    return s;
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool converged = true;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        auto& cp = col[static_cast<size_t>(p)];
        auto& cq = col[static_cast<size_t>(q)];
        double app = dot(cp, cp);
        double aqq = dot(cq, cq);
        double apq = dot(cp, cq);
        if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
        converged = false;
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double cth = 1.0 / std::sqrt(1.0 + t * t);
        double sth = cth * t;
        for (int r = 0; r < m; ++r) {
          double xp = cp[static_cast<size_t>(r)], xq = cq[static_cast<size_t>(r)];
          cp[static_cast<size_t>(r)] = cth * xp - sth * xq;
          cq[static_cast<size_t>(r)] = sth * xp + cth * xq;
        }
        auto& vp = vcols[static_cast<size_t>(p)];
        auto& vq = vcols[static_cast<size_t>(q)];
        for (int r = 0; r < n; ++r) {
          double xp = vp[static_cast<size_t>(r)], xq = vq[static_cast<size_t>(r)];
          vp[static_cast<size_t>(r)] = cth * xp - sth * xq;
          vq[static_cast<size_t>(r)] = sth * xp + cth * xq;
        }
      }
    }
    if (converged) break;
  }

  // singular values = column norms; order descending (stable on ties)
  std::vector<double> sigma(static_cast<size_t>(n));
  for (int c = 0; c < n; ++c) sigma[static_cast<size_t>(c)] = std::sqrt(dot(col[static_cast<size_t>(c)], col[static_cast<size_t>(c)]));
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return sigma[static_cast<size_t>(x)] > sigma[static_cast<size_t>(y)]; });

  int k = std::min(m, n);
  SvdResult res;
  res.sigma.resize(static_cast<size_t>(k));
  res.u = DMatrix(m, k);
  res.vt = DMatrix(k, n);
  for (int out_c = 0; out_c < k; ++out_c) {
    int c = order[static_cast<size_t>(out_c)];
    double s = sigma[static_cast<size_t>(c)];
    res.sigma[static_cast<size_t>(out_c)] = s;
    std::vector<double> ucol(static_cast<size_t>(m), 0.0);
    if (s > 0) {
      for (int r = 0; r < m; ++r) ucol[static_cast<size_t>(r)] = col[static_cast<size_t>(c)][static_cast<size_t>(r)] / s;
    }
    // sign convention on the left vector (ties: lowest index)
    int arg = 0;
    double best = -1;
    for (int r = 0; r < m; ++r) {
      double mag = std::abs(ucol[static_cast<size_t>(r)]);
      if (mag > best + 1e-18) {
        best = mag;
        arg = r;
      }
    }
    double flip = ucol[static_cast<size_t>(arg)] < 0 ? -1.0 : 1.0;
    for (int r = 0; r < m; ++r) res.u.at(r, out_c) = flip * ucol[static_cast<size_t>(r)];
    for (int r = 0; r < n; ++r)
      res.vt.at(out_c, r) = flip * vcols[static_cast<size_t>(c)][static_cast<size_t>(r)];
  }

  if (transposed) {
    // A = (B)^T = V Sigma U^T: swap factors
    DMatrix u2(a.rows, k), vt2(k, a.cols);
    for (int r = 0; r < a.rows; ++r)
      for (int c = 0; c < k; ++c) u2.at(r, c) = res.vt.at(c, r);
    for (int c = 0; c < a.cols; ++c)
      for (int r = 0; r < k; ++r) vt2.at(r, c) = res.u.at(c, r);
    res.u = std::move(u2);
    res.vt = std::move(vt2);
    // redo the sign convention so it applies to the left factor of A
    for (int comp = 0; comp < k; ++comp) {
      int arg = 0;
      double best = -1;
      for (int r = 0; r < a.rows; ++r) {
        double mag = std::abs(res.u.at(r, comp));
        if (mag > best + 1e-18) {
          best = mag;
          arg = r;
        }
      }
      if (res.u.at(arg, comp) < 0) {
        for (int r = 0; r < a.rows; ++r) res.u.at(r, comp) = -res.u.at(r, comp);
        for (int c = 0; c < a.cols; ++c) res.vt.at(comp, c) = -res.vt.at(comp, c);
      }
    }
  }
  return res;
}

}  // namespace glp
