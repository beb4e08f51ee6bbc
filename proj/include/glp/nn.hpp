#pragma once

#include <map>
#include <string>
#include <vector>

#include "glp/autodiff.hpp"

namespace glp {

// Named model parameters in registration order (the checkpoint manifest
// order).
struct ParamStore {
  std::vector<std::string> names;
  std::map<std::string, Tensor> tensors;

  Tensor& add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const { return tensors.count(name) > 0; }
};

// Binds every parameter as a tape leaf; trainable controls requires_grad.
struct BoundParams {
  Tape* tape = nullptr;
  std::map<std::string, Var> vars;
  Var operator()(const std::string& name) const;
};
BoundParams bind_params(Tape& tape, const ParamStore& params, bool trainable);

// Per-verse gradients, aligned with ParamStore::names for ordered merging.
using GradMap = std::map<std::string, Tensor>;
GradMap zero_grads_like(const ParamStore& params);
void collect_grads(const Tape& tape, const BoundParams& bound, GradMap& into);
void accumulate(GradMap& into, const GradMap& part);
void scale_grads(GradMap& grads, double factor);
double clip_global_norm(GradMap& grads, double max_norm);

// ---- GAT layer ----

struct GatHyper {
  int in_dim = 0;
  int out_per_head = 0;
  int heads = 1;
  bool mean_merge = false;  // false: concat heads
  double negative_slope = 0.2;
};

void init_gat_params(ParamStore& store, const std::string& prefix, const GatHyper& h, Rng& rng);

struct GatOut {
  Var out;    // (n, heads*out) or (n, out) with mean merge
  Var alpha;  // (E_directed + n, heads) attention coefficients incl. self loops
};

// Self-loops are added internally; `edges` are the undirected graph edges.
GatOut gat_forward(Tape& tape, Var x, int num_nodes,
                   const std::vector<std::pair<int, int>>& edges, const BoundParams& p,
                   const std::string& prefix, const GatHyper& h);

// ---- transformer encoder (pre-norm, no positional encoding) ----

struct TransformerHyper {
  int layers = 4;
  int dim = 2048;
  int heads = 16;
  int ff = 2048;
};

void init_transformer_params(ParamStore& store, const std::string& prefix,
                             const TransformerHyper& h, Rng& rng);

// mask marks real tokens; padded positions receive zero attention weight.
Var transformer_forward(Tape& tape, Var x, const std::vector<uint8_t>& mask,
                        const BoundParams& p, const std::string& prefix,
                        const TransformerHyper& h,
                        std::vector<Tensor>* attention_out = nullptr);

// ---- recurrent sequence encoder (LSTM) ----

void init_lstm_params(ParamStore& store, const std::string& prefix, int in_dim, int hidden,
                      Rng& rng);
// x (T, in) -> (T, hidden); reverse processes the sequence right to left.
Var lstm_forward(Tape& tape, Var x, const BoundParams& p, const std::string& prefix, int hidden,
                 bool reverse);

// ---- linear / mlp ----

void init_linear_params(ParamStore& store, const std::string& prefix, int in_dim, int out_dim,
                        Rng& rng);
Var linear_forward(Tape& tape, Var x, const BoundParams& p, const std::string& prefix);

// ---- optimizer ----

struct OptimizerConfig {
  enum class Kind { Adam, AdamW };
  Kind kind = Kind::Adam;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double weight_decay = 0.0;  // decoupled, AdamW only
};

struct OptimizerState {
  int64_t step = 0;
  std::map<std::string, Tensor> m, v;
};

// Standard bias-corrected update; AdamW applies decoupled weight decay.
// Non-finite gradients raise an error naming the tensor.
void optimizer_step(const OptimizerConfig& cfg, ParamStore& params, const GradMap& grads,
                    OptimizerState& state, double lr);

// ---- gradient checking ----

using LossFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
};

// Central finite differences against the tape gradient.  Relative error is
// measured against the largest gradient magnitude, so near-zero entries do
// not blow up the ratio.
GradCheckResult grad_check(const LossFn& f, const std::vector<Tensor>& params, double eps = 1e-5);

}  // namespace glp
