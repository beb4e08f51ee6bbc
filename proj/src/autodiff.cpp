#include "glp/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace glp {

Var Tape::input(Tensor t, bool requires_grad) {
  return push(std::move(t), requires_grad, nullptr);
}

Var Tape::push(Tensor value, bool requires_grad, std::function<void()> back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.back = requires_grad ? std::move(back) : nullptr;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_buf(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (!n.grad_ready) {
    n.grad = Tensor(n.value.rows, n.value.cols);
    n.grad_ready = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(Var x) const {
  const Node& n = nodes_[static_cast<size_t>(check(x))];
  if (!n.grad_ready) fail_internal("grad read before backward touched this node");
  return n.grad;
}

void Tape::backward(Var loss, double seed) {
  Node& top = node(loss);
  if (top.value.numel() != 1) fail_internal("backward: loss must be scalar");
  grad_buf(loss.id).v[0] = seed;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.requires_grad || !n.grad_ready || !n.back) continue;
    n.back();
  }
}

// ---- helpers ----

namespace {
bool either(const Tape& t, Var a, Var b) { return t.requires_grad(a) || t.requires_grad(b); }
}  // namespace

Var Tape::add(Var a, Var b) {
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  if (!ta.same_shape(tb)) fail_internal("add: shape mismatch");
  Tensor out = ta;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += tb.v[i];
  bool rg = either(*this, a, b);
  Var o;
  o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, bi = b.id, oi = o.id;
    node(o).back = [this, ai, bi, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      if (nodes_[static_cast<size_t>(ai)].requires_grad) {
        Tensor& ga = grad_buf(ai);
        for (size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i];
      }
      if (nodes_[static_cast<size_t>(bi)].requires_grad) {
        Tensor& gb = grad_buf(bi);
        for (size_t i = 0; i < g.v.size(); ++i) gb.v[i] += g.v[i];
      }
    };
  }
  return o;
}

Var Tape::sub(Var a, Var b) {
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  if (!ta.same_shape(tb)) fail_internal("sub: shape mismatch");
  Tensor out = ta;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] -= tb.v[i];
  bool rg = either(*this, a, b);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, bi = b.id, oi = o.id;
    node(o).back = [this, ai, bi, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      if (nodes_[static_cast<size_t>(ai)].requires_grad) {
        Tensor& ga = grad_buf(ai);
        for (size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i];
      }
      if (nodes_[static_cast<size_t>(bi)].requires_grad) {
        Tensor& gb = grad_buf(bi);
        for (size_t i = 0; i < g.v.size(); ++i) gb.v[i] -= g.v[i];
      }
    };
  }
  return o;
}

Var Tape::mul(Var a, Var b) {
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  if (!ta.same_shape(tb)) fail_internal("mul: shape mismatch");
  Tensor out = ta;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= tb.v[i];
  bool rg = either(*this, a, b);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, bi = b.id, oi = o.id;
    node(o).back = [this, ai, bi, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& va = nodes_[static_cast<size_t>(ai)].value;
      const Tensor& vb = nodes_[static_cast<size_t>(bi)].value;
      if (nodes_[static_cast<size_t>(ai)].requires_grad) {
        Tensor& ga = grad_buf(ai);
        for (size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i] * vb.v[i];
      }
      if (nodes_[static_cast<size_t>(bi)].requires_grad) {
        Tensor& gb = grad_buf(bi);
        for (size_t i = 0; i < g.v.size(); ++i) gb.v[i] += g.v[i] * va.v[i];
      }
    };
  }
  return o;
}

Var Tape::add_rowvec(Var a, Var b) {
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  if (tb.rows != 1 || tb.cols != ta.cols) fail_internal("add_rowvec: shape mismatch");
  Tensor out = ta;
  for (int r = 0; r < ta.rows; ++r)
    for (int c = 0; c < ta.cols; ++c) out.at(r, c) += tb.at(0, c);
  bool rg = either(*this, a, b);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, bi = b.id, oi = o.id;
    node(o).back = [this, ai, bi, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      if (nodes_[static_cast<size_t>(ai)].requires_grad) {
        Tensor& ga = grad_buf(ai);
        for (size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i];
      }
      if (nodes_[static_cast<size_t>(bi)].requires_grad) {
        Tensor& gb = grad_buf(bi);
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < g.cols; ++c) gb.at(0, c) += g.at(r, c);
      }
    };
  }
  return o;
}

Var Tape::scale(Var a, double c) {
  Tensor out = val(a);
  for (auto& x : out.v) x *= c;
  bool rg = requires_grad(a);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, oi = o.id;
    node(o).back = [this, ai, oi, c]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      Tensor& ga = grad_buf(ai);
      for (size_t i = 0; i < g.v.size(); ++i) ga.v[i] += c * g.v[i];
    };
  }
  return o;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) fail_internal("concat_cols: empty");
  int rows = val(parts[0]).rows;
  int cols = 0;
  bool rg = false;
  for (Var p : parts) {
    if (val(p).rows != rows) fail_internal("concat_cols: row mismatch");
    cols += val(p).cols;
    rg = rg || requires_grad(p);
  }
  Tensor out(rows, cols);
  int off = 0;
  for (Var p : parts) {
    const Tensor& t = val(p);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < t.cols; ++c) out.at(r, off + c) = t.at(r, c);
    off += t.cols;
  }
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    std::vector<int> ids;
    for (Var p : parts) ids.push_back(p.id);
    int oi = o.id;
    node(o).back = [this, ids, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      int off2 = 0;
      for (int pid : ids) {
        Node& pn = nodes_[static_cast<size_t>(pid)];
        int pc = pn.value.cols;
        if (pn.requires_grad) {
          Tensor& gp = grad_buf(pid);
          for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < pc; ++c) gp.at(r, c) += g.at(r, off2 + c);
        }
        off2 += pc;
      }
    };
  }
  return o;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) fail_internal("concat_rows: empty");
  int cols = val(parts[0]).cols;
  int rows = 0;
  bool rg = false;
  for (Var p : parts) {
    if (val(p).cols != cols) fail_internal("concat_rows: col mismatch");
    rows += val(p).rows;
    rg = rg || requires_grad(p);
  }
  Tensor out(rows, cols);
  int off = 0;
  for (Var p : parts) {
    const Tensor& t = val(p);
    for (int r = 0; r < t.rows; ++r)
      for (int c = 0; c < cols; ++c) out.at(off + r, c) = t.at(r, c);
    off += t.rows;
  }
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    std::vector<int> ids;
    for (Var p : parts) ids.push_back(p.id);
    int oi = o.id;
    node(o).back = [this, ids, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      int off2 = 0;
      for (int pid : ids) {
        Node& pn = nodes_[static_cast<size_t>(pid)];
        int pr = pn.value.rows;
        if (pn.requires_grad) {
          Tensor& gp = grad_buf(pid);
          for (int r = 0; r < pr; ++r)
            for (int c = 0; c < g.cols; ++c) gp.at(r, c) += g.at(off2 + r, c);
        }
        off2 += pr;
      }
    };
  }
  return o;
}

Var Tape::slice_cols(Var a, int start, int len) {
  const Tensor& t = val(a);
  if (start < 0 || start + len > t.cols) fail_internal("slice_cols: out of range");
  Tensor out(t.rows, len);
  for (int r = 0; r < t.rows; ++r)
    for (int c = 0; c < len; ++c) out.at(r, c) = t.at(r, start + c);
  bool rg = requires_grad(a);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, oi = o.id;
    node(o).back = [this, ai, oi, start, len]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      Tensor& ga = grad_buf(ai);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < len; ++c) ga.at(r, start + c) += g.at(r, c);
    };
  }
  return o;
}

Var Tape::gather_rows(Var a, std::vector<int> index) {
  const Tensor& t = val(a);
  Tensor out(static_cast<int>(index.size()), t.cols);
  for (size_t k = 0; k < index.size(); ++k) {
    int r = index[k];
    if (r < 0 || r >= t.rows) fail_internal("gather_rows: index out of range");
    for (int c = 0; c < t.cols; ++c) out.at(static_cast<int>(k), c) = t.at(r, c);
  }
  bool rg = requires_grad(a);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, oi = o.id;
    node(o).back = [this, ai, oi, index = std::move(index)]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      Tensor& ga = grad_buf(ai);
      for (size_t k = 0; k < index.size(); ++k)
        for (int c = 0; c < g.cols; ++c)
          ga.at(index[k], c) += g.at(static_cast<int>(k), c);
    };
  }
  return o;
}

Var Tape::matmul(Var a, Var b) {
  Tensor out;
  matmul_into(val(a), val(b), out);
  bool rg = either(*this, a, b);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, bi = b.id, oi = o.id;
    node(o).back = [this, ai, bi, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& va = nodes_[static_cast<size_t>(ai)].value;
      const Tensor& vb = nodes_[static_cast<size_t>(bi)].value;
      if (nodes_[static_cast<size_t>(ai)].requires_grad) {
        Tensor da;
        matmul_nt_into(g, vb, da);  // dA = G @ B^T
        Tensor& ga = grad_buf(ai);
        for (size_t i = 0; i < ga.v.size(); ++i) ga.v[i] += da.v[i];
      }
      if (nodes_[static_cast<size_t>(bi)].requires_grad) {
        Tensor db;
        matmul_tn_into(va, g, db);  // dB = A^T @ G
        Tensor& gb = grad_buf(bi);
        for (size_t i = 0; i < gb.v.size(); ++i) gb.v[i] += db.v[i];
      }
    };
  }
  return o;
}

Var Tape::matmul_nt(Var a, Var b) {
  Tensor out;
  matmul_nt_into(val(a), val(b), out);
  bool rg = either(*this, a, b);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, bi = b.id, oi = o.id;
    node(o).back = [this, ai, bi, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;  // (n, m)
      const Tensor& va = nodes_[static_cast<size_t>(ai)].value;  // (n, k)
      const Tensor& vb = nodes_[static_cast<size_t>(bi)].value;  // (m, k)
      if (nodes_[static_cast<size_t>(ai)].requires_grad) {
        Tensor da;
        matmul_into(g, vb, da);  // dA = G @ B
        Tensor& ga = grad_buf(ai);
        for (size_t i = 0; i < ga.v.size(); ++i) ga.v[i] += da.v[i];
      }
      if (nodes_[static_cast<size_t>(bi)].requires_grad) {
        Tensor db;
        matmul_tn_into(g, va, db);  // dB = G^T @ A
        Tensor& gb = grad_buf(bi);
        for (size_t i = 0; i < gb.v.size(); ++i) gb.v[i] += db.v[i];
      }
    };
  }
  return o;
}

Var Tape::leaky_relu(Var a, double negative_slope) {
  const Tensor& t = val(a);
  Tensor out = t;
  for (auto& x : out.v) x = x > 0 ? x : negative_slope * x;
  bool rg = requires_grad(a);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, oi = o.id;
    node(o).back = [this, ai, oi, negative_slope]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& x = nodes_[static_cast<size_t>(ai)].value;
      Tensor& ga = grad_buf(ai);
      for (size_t i = 0; i < g.v.size(); ++i)
        ga.v[i] += g.v[i] * (x.v[i] > 0 ? 1.0 : negative_slope);
    };
  }
  return o;
}

Var Tape::relu(Var a) { return leaky_relu(a, 0.0); }

Var Tape::elu(Var a) {
  const Tensor& t = val(a);
  Tensor out = t;
  for (auto& x : out.v) x = x > 0 ? x : std::expm1(x);
  bool rg = requires_grad(a);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, oi = o.id;
    node(o).back = [this, ai, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& x = nodes_[static_cast<size_t>(ai)].value;
      const Tensor& y = nodes_[static_cast<size_t>(oi)].value;
      Tensor& ga = grad_buf(ai);
      for (size_t i = 0; i < g.v.size(); ++i)
        ga.v[i] += g.v[i] * (x.v[i] > 0 ? 1.0 : y.v[i] + 1.0);
    };
  }
  return o;
}

Var Tape::tanh_(Var a) {
  Tensor out = val(a);
  for (auto& x : out.v) x = std::tanh(x);
  bool rg = requires_grad(a);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, oi = o.id;
    node(o).back = [this, ai, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& y = nodes_[static_cast<size_t>(oi)].value;
      Tensor& ga = grad_buf(ai);
      for (size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i] * (1.0 - y.v[i] * y.v[i]);
    };
  }
  return o;
}

Var Tape::sigmoid(Var a) {
  Tensor out = val(a);
  for (auto& x : out.v) x = 1.0 / (1.0 + std::exp(-x));
  bool rg = requires_grad(a);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, oi = o.id;
    node(o).back = [this, ai, oi]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& y = nodes_[static_cast<size_t>(oi)].value;
      Tensor& ga = grad_buf(ai);
      for (size_t i = 0; i < g.v.size(); ++i) ga.v[i] += g.v[i] * y.v[i] * (1.0 - y.v[i]);
    };
  }
  return o;
}

Var Tape::rowwise_dot_perhead(Var h, Var a, int heads) {
  const Tensor& th = val(h);
  const Tensor& ta = val(a);
  if (ta.rows != 1 || ta.cols != th.cols || th.cols % heads != 0)
    fail_internal("rowwise_dot_perhead: shape mismatch");
  int d = th.cols / heads;
  Tensor out(th.rows, heads);
  for (int r = 0; r < th.rows; ++r)
    for (int hd = 0; hd < heads; ++hd) {
      double s = 0;
      for (int k = 0; k < d; ++k) s += th.at(r, hd * d + k) * ta.at(0, hd * d + k);
      out.at(r, hd) = s;
    }
  bool rg = either(*this, h, a);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int hi = h.id, ai = a.id, oi = o.id;
    node(o).back = [this, hi, ai, oi, heads, d]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& vh = nodes_[static_cast<size_t>(hi)].value;
      const Tensor& va = nodes_[static_cast<size_t>(ai)].value;
      if (nodes_[static_cast<size_t>(hi)].requires_grad) {
        Tensor& gh = grad_buf(hi);
        for (int r = 0; r < vh.rows; ++r)
          for (int hd = 0; hd < heads; ++hd)
            for (int k = 0; k < d; ++k)
              gh.at(r, hd * d + k) += g.at(r, hd) * va.at(0, hd * d + k);
      }
      if (nodes_[static_cast<size_t>(ai)].requires_grad) {
        Tensor& ga = grad_buf(ai);
        for (int r = 0; r < vh.rows; ++r)
          for (int hd = 0; hd < heads; ++hd)
            for (int k = 0; k < d; ++k)
              ga.at(0, hd * d + k) += g.at(r, hd) * vh.at(r, hd * d + k);
      }
    };
  }
  return o;
}

Var Tape::segment_softmax(Var scores, std::vector<int> segments, int num_segments) {
  const Tensor& t = val(scores);
  if (static_cast<int>(segments.size()) != t.rows)
    fail_internal("segment_softmax: segment count mismatch");
  int heads = t.cols;
  Tensor out(t.rows, heads);
  // rows with the same segment are contiguous by construction, but handle
  // the general case with per-segment passes
  std::vector<double> mx(static_cast<size_t>(num_segments) * heads,
                         -std::numeric_limits<double>::infinity());
  for (int e = 0; e < t.rows; ++e)
    for (int h = 0; h < heads; ++h) {
      double& m = mx[static_cast<size_t>(segments[static_cast<size_t>(e)]) * heads + h];
      m = std::max(m, t.at(e, h));
    }
  std::vector<double> denom(static_cast<size_t>(num_segments) * heads, 0.0);
  for (int e = 0; e < t.rows; ++e)
    for (int h = 0; h < heads; ++h) {
      size_t key = static_cast<size_t>(segments[static_cast<size_t>(e)]) * heads + h;
      out.at(e, h) = std::exp(t.at(e, h) - mx[key]);
      denom[key] += out.at(e, h);
    }
  for (int e = 0; e < t.rows; ++e)
    for (int h = 0; h < heads; ++h) {
      size_t key = static_cast<size_t>(segments[static_cast<size_t>(e)]) * heads + h;
      out.at(e, h) /= denom[key];
    }
  bool rg = requires_grad(scores);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int si = scores.id, oi = o.id;
    node(o).back = [this, si, oi, segments = std::move(segments), num_segments, heads]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& alpha = nodes_[static_cast<size_t>(oi)].value;
      Tensor& gs = grad_buf(si);
      std::vector<double> common(static_cast<size_t>(num_segments) * heads, 0.0);
      for (int e = 0; e < g.rows; ++e)
        for (int h = 0; h < heads; ++h)
          common[static_cast<size_t>(segments[static_cast<size_t>(e)]) * heads + h] +=
              g.at(e, h) * alpha.at(e, h);
      for (int e = 0; e < g.rows; ++e)
        for (int h = 0; h < heads; ++h) {
          size_t key = static_cast<size_t>(segments[static_cast<size_t>(e)]) * heads + h;
          gs.at(e, h) += alpha.at(e, h) * (g.at(e, h) - common[key]);
        }
    };
  }
  return o;
}

Var Tape::segment_mix(Var alpha, Var msgs, std::vector<int> segments, int num_segments) {
  const Tensor& ta = val(alpha);  // (E, heads)
  const Tensor& tm = val(msgs);   // (E, heads*d)
  if (ta.rows != tm.rows || tm.cols % ta.cols != 0)
    fail_internal("segment_mix: shape mismatch");
  int heads = ta.cols;
  int d = tm.cols / heads;
  Tensor out(num_segments, tm.cols);
  for (int e = 0; e < ta.rows; ++e) {
    int s = segments[static_cast<size_t>(e)];
    for (int h = 0; h < heads; ++h) {
      double a = ta.at(e, h);
      for (int k = 0; k < d; ++k) out.at(s, h * d + k) += a * tm.at(e, h * d + k);
    }
  }
  bool rg = either(*this, alpha, msgs);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = alpha.id, mi = msgs.id, oi = o.id;
    node(o).back = [this, ai, mi, oi, segments = std::move(segments), heads, d]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& va = nodes_[static_cast<size_t>(ai)].value;
      const Tensor& vm = nodes_[static_cast<size_t>(mi)].value;
      bool need_a = nodes_[static_cast<size_t>(ai)].requires_grad;
      bool need_m = nodes_[static_cast<size_t>(mi)].requires_grad;
      Tensor* ga = need_a ? &grad_buf(ai) : nullptr;
      Tensor* gm = need_m ? &grad_buf(mi) : nullptr;
      for (int e = 0; e < va.rows; ++e) {
        int s = segments[static_cast<size_t>(e)];
        for (int h = 0; h < heads; ++h) {
          double a = va.at(e, h);
          double acc = 0;
          for (int k = 0; k < d; ++k) {
            double go = g.at(s, h * d + k);
            if (need_m) gm->at(e, h * d + k) += a * go;
            acc += go * vm.at(e, h * d + k);
          }
          if (need_a) ga->at(e, h) += acc;
        }
      }
    };
  }
  return o;
}

Var Tape::mean_heads(Var a, int heads) {
  const Tensor& t = val(a);
  if (t.cols % heads != 0) fail_internal("mean_heads: cols not divisible by heads");
  int d = t.cols / heads;
  Tensor out(t.rows, d);
  double inv = 1.0 / heads;
  for (int r = 0; r < t.rows; ++r)
    for (int h = 0; h < heads; ++h)
      for (int k = 0; k < d; ++k) out.at(r, k) += t.at(r, h * d + k) * inv;
  bool rg = requires_grad(a);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, oi = o.id;
    node(o).back = [this, ai, oi, heads, d, inv]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      Tensor& ga = grad_buf(ai);
      for (int r = 0; r < g.rows; ++r)
        for (int h = 0; h < heads; ++h)
          for (int k = 0; k < d; ++k) ga.at(r, h * d + k) += g.at(r, k) * inv;
    };
  }
  return o;
}

Var Tape::layer_norm(Var a, Var gamma, Var beta, double eps) {
  const Tensor& x = val(a);
  const Tensor& g = val(gamma);
  const Tensor& b = val(beta);
  if (g.rows != 1 || g.cols != x.cols || b.rows != 1 || b.cols != x.cols)
    fail_internal("layer_norm: parameter shape mismatch");
  int n = x.rows, d = x.cols;
  Tensor out(n, d);
  Tensor xhat(n, d);
  std::vector<double> inv_std(static_cast<size_t>(n));
  for (int r = 0; r < n; ++r) {
    double mean = 0;
    for (int c = 0; c < d; ++c) mean += x.at(r, c);
    mean /= d;
    double var = 0;
    for (int c = 0; c < d; ++c) {
      double dx = x.at(r, c) - mean;
      var += dx * dx;
    }
    var /= d;
    double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(r)] = is;
    for (int c = 0; c < d; ++c) {
      double xh = (x.at(r, c) - mean) * is;
      xhat.at(r, c) = xh;
      out.at(r, c) = xh * g.at(0, c) + b.at(0, c);
    }
  }
  bool rg = requires_grad(a) || requires_grad(gamma) || requires_grad(beta);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, gi = gamma.id, bi = beta.id, oi = o.id;
    node(o).back = [this, ai, gi, bi, oi, xhat = std::move(xhat), inv_std = std::move(inv_std),
                    n, d]() {
      const Tensor& go = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& vg = nodes_[static_cast<size_t>(gi)].value;
      if (nodes_[static_cast<size_t>(gi)].requires_grad) {
        Tensor& gg = grad_buf(gi);
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < d; ++c) gg.at(0, c) += go.at(r, c) * xhat.at(r, c);
      }
      if (nodes_[static_cast<size_t>(bi)].requires_grad) {
        Tensor& gb = grad_buf(bi);
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < d; ++c) gb.at(0, c) += go.at(r, c);
      }
      if (nodes_[static_cast<size_t>(ai)].requires_grad) {
        Tensor& ga = grad_buf(ai);
        for (int r = 0; r < n; ++r) {
          double sum_dxhat = 0, sum_dxhat_xhat = 0;
          for (int c = 0; c < d; ++c) {
            double dxh = go.at(r, c) * vg.at(0, c);
            sum_dxhat += dxh;
            sum_dxhat_xhat += dxh * xhat.at(r, c);
          }
          double is = inv_std[static_cast<size_t>(r)];
          for (int c = 0; c < d; ++c) {
            double dxh = go.at(r, c) * vg.at(0, c);
            ga.at(r, c) += is * (dxh - sum_dxhat / d - xhat.at(r, c) * sum_dxhat_xhat / d);
          }
        }
      }
    };
  }
  return o;
}

Var Tape::softmax_rows_masked(Var a, std::vector<uint8_t> key_mask) {
  const Tensor& x = val(a);
  if (static_cast<int>(key_mask.size()) != x.cols)
    fail_internal("softmax_rows_masked: mask size mismatch");
  Tensor out(x.rows, x.cols);
  for (int r = 0; r < x.rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < x.cols; ++c)
      if (key_mask[static_cast<size_t>(c)]) mx = std::max(mx, x.at(r, c));
    if (mx == -std::numeric_limits<double>::infinity()) continue;  // fully masked row: zeros
    double denom = 0;
    for (int c = 0; c < x.cols; ++c) {
      if (!key_mask[static_cast<size_t>(c)]) continue;
      out.at(r, c) = std::exp(x.at(r, c) - mx);
      denom += out.at(r, c);
    }
    for (int c = 0; c < x.cols; ++c)
      if (key_mask[static_cast<size_t>(c)]) out.at(r, c) /= denom;
  }
  bool rg = requires_grad(a);
  Var o = push(std::move(out), rg, nullptr);
  if (rg) {
    int ai = a.id, oi = o.id;
    node(o).back = [this, ai, oi, key_mask = std::move(key_mask)]() {
      const Tensor& g = nodes_[static_cast<size_t>(oi)].grad;
      const Tensor& alpha = nodes_[static_cast<size_t>(oi)].value;
      Tensor& ga = grad_buf(ai);
      for (int r = 0; r < g.rows; ++r) {
        double common = 0;
        for (int c = 0; c < g.cols; ++c)
          if (key_mask[static_cast<size_t>(c)]) common += g.at(r, c) * alpha.at(r, c);
        for (int c = 0; c < g.cols; ++c)
          if (key_mask[static_cast<size_t>(c)])
            ga.at(r, c) += alpha.at(r, c) * (g.at(r, c) - common);
      }
    };
  }
  return o;
}

Var Tape::ce_masked_sum(Var logits, std::vector<int> labels, int* labeled_count) {
  const Tensor& x = val(logits);
  if (static_cast<int>(labels.size()) != x.rows) fail_internal("ce_masked_sum: label count");
  double loss = 0;
  int count = 0;
  for (int r = 0; r < x.rows; ++r) {
    int y = labels[static_cast<size_t>(r)];
    if (y < 0) continue;
    if (y >= x.cols) fail_internal("ce_masked_sum: label out of range");
    double mx = x.at(r, 0);
    for (int c = 1; c < x.cols; ++c) mx = std::max(mx, x.at(r, c));
    double lse = 0;
    for (int c = 0; c < x.cols; ++c) lse += std::exp(x.at(r, c) - mx);
    lse = mx + std::log(lse);
    loss += lse - x.at(r, y);
    ++count;
  }
  if (labeled_count) *labeled_count = count;
  bool rg = requires_grad(logits);
  Var o = push(Tensor::scalar(loss), rg, nullptr);
  if (rg) {
    int li = logits.id, oi = o.id;
    node(o).back = [this, li, oi, labels = std::move(labels)]() {
      double seed = nodes_[static_cast<size_t>(oi)].grad.v[0];
      const Tensor& x = nodes_[static_cast<size_t>(li)].value;
      Tensor& gl = grad_buf(li);
      for (int r = 0; r < x.rows; ++r) {
        int y = labels[static_cast<size_t>(r)];
        if (y < 0) continue;  // masked rows get exactly zero gradient
        double mx = x.at(r, 0);
        for (int c = 1; c < x.cols; ++c) mx = std::max(mx, x.at(r, c));
        double denom = 0;
        for (int c = 0; c < x.cols; ++c) denom += std::exp(x.at(r, c) - mx);
        for (int c = 0; c < x.cols; ++c) {
          double p = std::exp(x.at(r, c) - mx) / denom;
          gl.at(r, c) += seed * (p - (c == y ? 1.0 : 0.0));
        }
      }
    };
  }
  return o;
}

Var Tape::ce_masked_mean(Var logits, const std::vector<int>& labels, bool* all_masked) {
  int count = 0;
  Var s = ce_masked_sum(logits, labels, &count);
  if (all_masked) *all_masked = count == 0;
  if (count == 0) return input(Tensor::scalar(0.0), false);  // flagged via all_masked
  return scale(s, 1.0 / count);
}

Var Tape::sum_all(Var a) {
  const Tensor& t = val(a);
  double s = 0;
  for (double x : t.v) s += x;
  bool rg = requires_grad(a);
  Var o = push(Tensor::scalar(s), rg, nullptr);
  if (rg) {
    int ai = a.id, oi = o.id;
    node(o).back = [this, ai, oi]() {
      double seed = nodes_[static_cast<size_t>(oi)].grad.v[0];
      Tensor& ga = grad_buf(ai);
      for (auto& x : ga.v) x += seed;
    };
  }
  return o;
}

}  // namespace glp
