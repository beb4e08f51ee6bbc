#include "glp/nn.hpp"

#include <algorithm>
#include <cmath>

namespace glp {

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  if (tensors.count(name)) fail_internal("duplicate parameter " + name);
  names.push_back(name);
  return tensors.emplace(name, std::move(t)).first->second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) fail_internal("unknown parameter " + name);
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) fail_internal("unknown parameter " + name);
  return it->second;
}

Var BoundParams::operator()(const std::string& name) const {
  auto it = vars.find(name);
  if (it == vars.end()) fail_internal("parameter not bound: " + name);
  return it->second;
}

BoundParams bind_params(Tape& tape, const ParamStore& params, bool trainable) {
  BoundParams b;
  b.tape = &tape;
  for (const auto& name : params.names) b.vars[name] = tape.input(params.at(name), trainable);
  return b;
}

GradMap zero_grads_like(const ParamStore& params) {
  GradMap g;
  for (const auto& name : params.names) {
    const Tensor& t = params.at(name);
    g.emplace(name, Tensor(t.rows, t.cols));
  }
  return g;
}

void collect_grads(const Tape& tape, const BoundParams& bound, GradMap& into) {
  for (const auto& [name, var] : bound.vars) {
    auto it = into.find(name);
    if (it == into.end()) continue;
    if (!tape.requires_grad(var) || !tape.has_grad(var)) continue;
    const Tensor& g = tape.grad(var);
    for (size_t i = 0; i < it->second.v.size(); ++i) it->second.v[i] += g.v[i];
  }
}

void accumulate(GradMap& into, const GradMap& part) {
  for (auto& [name, t] : into) {
    auto it = part.find(name);
    if (it == part.end()) continue;
    for (size_t i = 0; i < t.v.size(); ++i) t.v[i] += it->second.v[i];
  }
}

void scale_grads(GradMap& grads, double factor) {
  for (auto& [name, t] : grads) {
    (void)name;
    for (auto& x : t.v) x *= factor;
  }
}

double clip_global_norm(GradMap& grads, double max_norm) {
  double sq = 0;
  for (const auto& [name, t] : grads) {
    (void)name;
    for (double x : t.v) sq += x * x;
  }
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    double s = max_norm / norm;
    scale_grads(grads, s);
  }
  return norm;
}

// ---- GAT ----

void init_gat_params(ParamStore& store, const std::string& prefix, const GatHyper& h, Rng& rng) {
  store.add(prefix + ".w", glorot(h.in_dim, h.heads * h.out_per_head, rng));
  store.add(prefix + ".a_src", glorot(1, h.heads * h.out_per_head, rng));
  store.add(prefix + ".a_dst", glorot(1, h.heads * h.out_per_head, rng));
}

GatOut gat_forward(Tape& tape, Var x, int num_nodes,
                   const std::vector<std::pair<int, int>>& edges, const BoundParams& p,
                   const std::string& prefix, const GatHyper& h) {
  // directed edges both ways plus self loops, sorted by (dst, src)
  std::vector<std::pair<int, int>> dir;  // (src, dst)
  dir.reserve(edges.size() * 2 + static_cast<size_t>(num_nodes));
  for (const auto& [a, b] : edges) {
    dir.emplace_back(a, b);
    dir.emplace_back(b, a);
  }
  for (int i = 0; i < num_nodes; ++i) dir.emplace_back(i, i);
  std::sort(dir.begin(), dir.end(),
            [](const auto& l, const auto& r) { return std::tie(l.second, l.first) < std::tie(r.second, r.first); });

  std::vector<int> srcs, dsts;
  srcs.reserve(dir.size());
  dsts.reserve(dir.size());
  for (const auto& [s, d] : dir) {
    srcs.push_back(s);
    dsts.push_back(d);
  }

  Var hmat = tape.matmul(x, p(prefix + ".w"));  // (n, heads*out)
  Var score_src = tape.rowwise_dot_perhead(hmat, p(prefix + ".a_src"), h.heads);  // (n, heads)
  Var score_dst = tape.rowwise_dot_perhead(hmat, p(prefix + ".a_dst"), h.heads);
  // e(src->dst) = leakyrelu(a_src . h_src + a_dst . h_dst); attention is
  // computed over incoming edges of each dst node
  Var e = tape.add(tape.gather_rows(score_src, srcs), tape.gather_rows(score_dst, dsts));
  e = tape.leaky_relu(e, h.negative_slope);
  Var alpha = tape.segment_softmax(e, dsts, num_nodes);
  Var msgs = tape.gather_rows(hmat, srcs);
  Var out = tape.segment_mix(alpha, msgs, dsts, num_nodes);
  if (h.mean_merge) out = tape.mean_heads(out, h.heads);
  return GatOut{out, alpha};
}

// ---- transformer ----

void init_transformer_params(ParamStore& store, const std::string& prefix,
                             const TransformerHyper& h, Rng& rng) {
  if (h.dim % h.heads != 0) fail_usage("transformer: dim not divisible by heads");
  for (int l = 0; l < h.layers; ++l) {
    std::string lp = prefix + ".l" + std::to_string(l);
    store.add(lp + ".ln1.g", Tensor(1, h.dim, std::vector<double>(static_cast<size_t>(h.dim), 1.0)));
    store.add(lp + ".ln1.b", Tensor(1, h.dim));
    store.add(lp + ".wq", glorot(h.dim, h.dim, rng));
    store.add(lp + ".bq", Tensor(1, h.dim));
    store.add(lp + ".wk", glorot(h.dim, h.dim, rng));
    store.add(lp + ".bk", Tensor(1, h.dim));
    store.add(lp + ".wv", glorot(h.dim, h.dim, rng));
    store.add(lp + ".bv", Tensor(1, h.dim));
    store.add(lp + ".wo", glorot(h.dim, h.dim, rng));
    store.add(lp + ".bo", Tensor(1, h.dim));
    store.add(lp + ".ln2.g", Tensor(1, h.dim, std::vector<double>(static_cast<size_t>(h.dim), 1.0)));
    store.add(lp + ".ln2.b", Tensor(1, h.dim));
    store.add(lp + ".w1", glorot(h.dim, h.ff, rng));
    store.add(lp + ".b1", Tensor(1, h.ff));
    store.add(lp + ".w2", glorot(h.ff, h.dim, rng));
    store.add(lp + ".b2", Tensor(1, h.dim));
  }
  store.add(prefix + ".lnf.g", Tensor(1, h.dim, std::vector<double>(static_cast<size_t>(h.dim), 1.0)));
  store.add(prefix + ".lnf.b", Tensor(1, h.dim));
}

Var transformer_forward(Tape& tape, Var x, const std::vector<uint8_t>& mask,
                        const BoundParams& p, const std::string& prefix,
                        const TransformerHyper& h, std::vector<Tensor>* attention_out) {
  if (h.dim % h.heads != 0) fail_usage("transformer: dim not divisible by heads");
  int dh = h.dim / h.heads;
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int l = 0; l < h.layers; ++l) {
    std::string lp = prefix + ".l" + std::to_string(l);
    Var xn = tape.layer_norm(x, p(lp + ".ln1.g"), p(lp + ".ln1.b"));
    Var q = tape.add_rowvec(tape.matmul(xn, p(lp + ".wq")), p(lp + ".bq"));
    Var k = tape.add_rowvec(tape.matmul(xn, p(lp + ".wk")), p(lp + ".bk"));
    Var v = tape.add_rowvec(tape.matmul(xn, p(lp + ".wv")), p(lp + ".bv"));
    std::vector<Var> ctx;
    ctx.reserve(static_cast<size_t>(h.heads));
    for (int hd = 0; hd < h.heads; ++hd) {
      Var qh = tape.slice_cols(q, hd * dh, dh);
      Var kh = tape.slice_cols(k, hd * dh, dh);
      Var vh = tape.slice_cols(v, hd * dh, dh);
      Var scores = tape.scale(tape.matmul_nt(qh, kh), inv_sqrt);
      Var att = tape.softmax_rows_masked(scores, mask);
      if (attention_out) attention_out->push_back(tape.val(att));
      ctx.push_back(tape.matmul(att, vh));
    }
    Var merged = tape.concat_cols(ctx);
    x = tape.add(x, tape.add_rowvec(tape.matmul(merged, p(lp + ".wo")), p(lp + ".bo")));
    Var xn2 = tape.layer_norm(x, p(lp + ".ln2.g"), p(lp + ".ln2.b"));
    Var ff = tape.relu(tape.add_rowvec(tape.matmul(xn2, p(lp + ".w1")), p(lp + ".b1")));
    x = tape.add(x, tape.add_rowvec(tape.matmul(ff, p(lp + ".w2")), p(lp + ".b2")));
  }
  return tape.layer_norm(x, p(prefix + ".lnf.g"), p(prefix + ".lnf.b"));
}

// ---- LSTM ----

void init_lstm_params(ParamStore& store, const std::string& prefix, int in_dim, int hidden,
                      Rng& rng) {
  store.add(prefix + ".wx", glorot(in_dim, 4 * hidden, rng));
  store.add(prefix + ".wh", glorot(hidden, 4 * hidden, rng));
  Tensor b(1, 4 * hidden);
  // forget gate bias starts at 1
  for (int i = hidden; i < 2 * hidden; ++i) b.at(0, i) = 1.0;
  store.add(prefix + ".b", std::move(b));
}

Var lstm_forward(Tape& tape, Var x, const BoundParams& p, const std::string& prefix, int hidden,
                 bool reverse) {
  int t_len = tape.val(x).rows;
  Var wx = p(prefix + ".wx");
  Var wh = p(prefix + ".wh");
  Var b = p(prefix + ".b");
  Var hprev = tape.input(Tensor(1, hidden), false);
  Var cprev = tape.input(Tensor(1, hidden), false);
  std::vector<Var> outputs(static_cast<size_t>(t_len));
  for (int step = 0; step < t_len; ++step) {
    int t = reverse ? t_len - 1 - step : step;
    Var xt = tape.gather_rows(x, {t});
    Var z = tape.add_rowvec(tape.add(tape.matmul(xt, wx), tape.matmul(hprev, wh)), b);
    Var ig = tape.sigmoid(tape.slice_cols(z, 0, hidden));
    Var fg = tape.sigmoid(tape.slice_cols(z, hidden, hidden));
    Var gg = tape.tanh_(tape.slice_cols(z, 2 * hidden, hidden));
    Var og = tape.sigmoid(tape.slice_cols(z, 3 * hidden, hidden));
    Var c = tape.add(tape.mul(fg, cprev), tape.mul(ig, gg));
    Var hh = tape.mul(og, tape.tanh_(c));
    outputs[static_cast<size_t>(t)] = hh;
    hprev = hh;
    cprev = c;
  }
  return tape.concat_rows(outputs);
}

// ---- linear ----

void init_linear_params(ParamStore& store, const std::string& prefix, int in_dim, int out_dim,
                        Rng& rng) {
  store.add(prefix + ".w", glorot(in_dim, out_dim, rng));
  store.add(prefix + ".b", Tensor(1, out_dim));
}

Var linear_forward(Tape& tape, Var x, const BoundParams& p, const std::string& prefix) {
  return tape.add_rowvec(tape.matmul(x, p(prefix + ".w")), p(prefix + ".b"));
}

// ---- optimizer ----

void optimizer_step(const OptimizerConfig& cfg, ParamStore& params, const GradMap& grads,
                    OptimizerState& state, double lr) {
  if (state.m.empty()) {
    for (const auto& name : params.names) {
      const Tensor& t = params.at(name);
      state.m.emplace(name, Tensor(t.rows, t.cols));
      state.v.emplace(name, Tensor(t.rows, t.cols));
    }
  }
  state.step++;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (const auto& name : params.names) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Tensor& g = git->second;
    Tensor& p = params.at(name);
    Tensor& m = state.m.at(name);
    Tensor& v = state.v.at(name);
    for (size_t i = 0; i < p.v.size(); ++i) {
      double gi = g.v[i];
      if (!std::isfinite(gi)) fail_internal("non-finite gradient in " + name);
      m.v[i] = cfg.beta1 * m.v[i] + (1.0 - cfg.beta1) * gi;
      v.v[i] = cfg.beta2 * v.v[i] + (1.0 - cfg.beta2) * gi * gi;
      double mhat = m.v[i] / bc1;
      double vhat = v.v[i] / bc2;
      double update = mhat / (std::sqrt(vhat) + cfg.eps);
      if (cfg.kind == OptimizerConfig::Kind::AdamW && cfg.weight_decay > 0)
        update += cfg.weight_decay * p.v[i];
      p.v[i] -= lr * update;
    }
  }
}

// ---- gradient check ----

GradCheckResult grad_check(const LossFn& f, const std::vector<Tensor>& params, double eps) {
  // analytic gradients
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const auto& t : params) vars.push_back(tape.input(t, true));
    Var loss = f(tape, vars);
    tape.backward(loss);
    for (Var v : vars) {
      if (tape.has_grad(v))
        analytic.push_back(tape.grad(v));
      else
        analytic.push_back(Tensor(tape.val(v).rows, tape.val(v).cols));
    }
  }
  auto eval_loss = [&](const std::vector<Tensor>& pts) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : pts) vars.push_back(tape.input(t, false));
    return tape.val(f(tape, vars)).item();
  };

  double gmax = 0;
  for (const auto& g : analytic)
    for (double x : g.v) gmax = std::max(gmax, std::abs(x));

  GradCheckResult res;
  std::vector<Tensor> work = params;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    for (size_t i = 0; i < params[pi].v.size(); ++i) {
      double orig = work[pi].v[i];
      work[pi].v[i] = orig + eps;
      double fp = eval_loss(work);
      work[pi].v[i] = orig - eps;
      double fm = eval_loss(work);
      work[pi].v[i] = orig;
      double num = (fp - fm) / (2.0 * eps);
      double ana = analytic[pi].v[i];
      double abs_err = std::abs(num - ana);
      double denom = std::max({gmax, std::abs(num), 1e-8});
      res.max_abs_err = std::max(res.max_abs_err, abs_err);
      res.max_rel_err = std::max(res.max_rel_err, abs_err / denom);
    }
  }
  return res;
}

}  // namespace glp
