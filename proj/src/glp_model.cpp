#include "glp/glp_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glp/parallel.hpp"

namespace glp {

nlohmann::json GlpConfig::to_json() const {
  return nlohmann::json{{"gnn_hidden", gnn_hidden},
                        {"gat_heads", gat_heads},
                        {"gat_negative_slope", gat_negative_slope},
                        {"mlp_layers", mlp_layers},
                        {"mlp_hidden", mlp_hidden},
                        {"lr_glpb", lr_glpb},
                        {"batch_glpb", batch_glpb},
                        {"tf_layers", tf_layers},
                        {"tf_dim", tf_dim},
                        {"tf_heads", tf_heads},
                        {"tf_ff", tf_ff},
                        {"lr_glpsl", lr_glpsl},
                        {"batch_glpsl", batch_glpsl},
                        {"gamma", gamma},
                        {"patience", patience},
                        {"max_epochs", max_epochs},
                        {"early_stopping", early_stopping},
                        {"clip_norm", clip_norm},
                        {"lang_emb_dim", lang_emb_dim},
                        {"pos_emb_dim", pos_emb_dim},
                        {"comm_emb_dim", comm_emb_dim},
                        {"p_max", p_max},
                        {"c_max", c_max},
                        {"seed", seed}};
}

GlpConfig GlpConfig::from_json(const nlohmann::json& j) {
  GlpConfig c;
  c.gnn_hidden = j.value("gnn_hidden", c.gnn_hidden);
  c.gat_heads = j.value("gat_heads", c.gat_heads);
  c.gat_negative_slope = j.value("gat_negative_slope", c.gat_negative_slope);
  c.mlp_layers = j.value("mlp_layers", c.mlp_layers);
  c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
  c.lr_glpb = j.value("lr_glpb", c.lr_glpb);
  c.batch_glpb = j.value("batch_glpb", c.batch_glpb);
  c.tf_layers = j.value("tf_layers", c.tf_layers);
  c.tf_dim = j.value("tf_dim", c.tf_dim);
  c.tf_heads = j.value("tf_heads", c.tf_heads);
  c.tf_ff = j.value("tf_ff", c.tf_ff);
  c.lr_glpsl = j.value("lr_glpsl", c.lr_glpsl);
  c.batch_glpsl = j.value("batch_glpsl", c.batch_glpsl);
  c.gamma = j.value("gamma", c.gamma);
  c.patience = j.value("patience", c.patience);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.early_stopping = j.value("early_stopping", c.early_stopping);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.lang_emb_dim = j.value("lang_emb_dim", c.lang_emb_dim);
  c.pos_emb_dim = j.value("pos_emb_dim", c.pos_emb_dim);
  c.comm_emb_dim = j.value("comm_emb_dim", c.comm_emb_dim);
  c.p_max = j.value("p_max", c.p_max);
  c.c_max = j.value("c_max", c.c_max);
  c.seed = j.value("seed", c.seed);
  return c;
}

const TagDistribution* TagDistributionTable::lookup(const std::string& lang,
                                                    const std::string& type) const {
  auto it = table.find({lang, type});
  return it == table.end() ? nullptr : &it->second;
}

void write_curve_csv(const TrainLog& log, const std::string& path) {
  std::ostringstream out;
  out.precision(12);
  out << "step,loss,dev_metric\n";
  for (const auto& p : log.curve) out << p.epoch << ',' << p.train_loss << ',' << p.dev_metric << '\n';
  write_file(path, out.str());
}

void write_selection_csv(const SelectionReport& report, const std::string& path) {
  std::ostringstream out;
  out.precision(12);
  out << "lang,selected,total,rate\n";
  for (const auto& r : report.rows)
    out << r.lang << ',' << r.selected << ',' << r.total << ',' << r.rate << '\n';
  write_file(path, out.str());
}

int GlpModel::input_width() const {
  return 5 + word_dim + 1 + config.lang_emb_dim + config.pos_emb_dim + 2 * config.comm_emb_dim;
}

nlohmann::json GlpModel::hyper_json() const {
  return nlohmann::json{{"kind", kind == Kind::Base ? "glp-b" : "glp-sl"},
                        {"config", config.to_json()},
                        {"word_dim", word_dim},
                        {"languages", languages}};
}

void save_glp_model(const GlpModel& model, const std::string& path) {
  save_checkpoint(model.params, model.hyper_json(), path);
}

GlpModel load_glp_model(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  GlpModel m;
  std::string kind = ck.hyper.value("kind", "glp-b");
  m.kind = kind == "glp-sl" ? GlpModel::Kind::SelfLearning : GlpModel::Kind::Base;
  m.config = GlpConfig::from_json(ck.hyper.value("config", nlohmann::json::object()));
  m.word_dim = ck.hyper.value("word_dim", 0);
  m.languages = ck.hyper.value("languages", std::vector<std::string>{});
  m.params = std::move(ck.params);
  return m;
}

int argmax_tag(const double* logits17) {
  int best = 0;
  for (int i = 1; i < kNumTags; ++i)
    if (logits17[i] > logits17[best]) best = i;  // strict: ties keep the lower index
  return best;
}

std::vector<double> softmax17(const double* logits17) {
  double mx = logits17[0];
  for (int i = 1; i < kNumTags; ++i) mx = std::max(mx, logits17[i]);
  std::vector<double> p(kNumTags);
  double denom = 0;
  for (int i = 0; i < kNumTags; ++i) {
    p[static_cast<size_t>(i)] = std::exp(logits17[i] - mx);
    denom += p[static_cast<size_t>(i)];
  }
  for (auto& x : p) x /= denom;
  return p;
}

// ---- model construction ----

namespace {

void check_config(const GlpConfig& c) {
  if (c.gnn_hidden % c.gat_heads != 0)
    fail_usage("glp: gnn_hidden must be divisible by gat_heads");
  if (c.tf_dim % c.tf_heads != 0) fail_usage("glp: tf_dim must be divisible by tf_heads");
  if (c.gamma <= 0.0 || c.gamma > 1.0) fail_usage("glp: gamma must be in (0, 1]");
  if (c.batch_glpb < 1 || c.batch_glpsl < 1) fail_usage("glp: batch size must be >= 1");
  if (c.mlp_layers < 1) fail_usage("glp: mlp_layers must be >= 1");
}

GatHyper gat1_hyper(const GlpModel& m) {
  return GatHyper{m.input_width(), m.config.gnn_hidden / m.config.gat_heads, m.config.gat_heads,
                  false, m.config.gat_negative_slope};
}

GatHyper gat2_hyper(const GlpModel& m) {
  return GatHyper{m.config.gnn_hidden, m.config.gnn_hidden, m.config.gat_heads, true,
                  m.config.gat_negative_slope};
}

void init_feature_embeddings(GlpModel& m, Rng& rng) {
  const GlpConfig& c = m.config;
  m.params.add("emb.lang", glorot(static_cast<int>(m.languages.size()), c.lang_emb_dim, rng));
  m.params.add("emb.pos", glorot(c.p_max, c.pos_emb_dim, rng));
  m.params.add("emb.commg", glorot(c.c_max, c.comm_emb_dim, rng));
  m.params.add("emb.commlp", glorot(c.c_max, c.comm_emb_dim, rng));
}

void init_mlp_head(GlpModel& m, Rng& rng) {
  const GlpConfig& c = m.config;
  for (int l = 0; l < c.mlp_layers; ++l) {
    int in = l == 0 ? c.gnn_hidden : c.mlp_hidden;
    int out = l == c.mlp_layers - 1 ? kNumTags : c.mlp_hidden;
    init_linear_params(m.params, "mlp." + std::to_string(l), in, out, rng);
  }
}

TransformerHyper tf_hyper(const GlpConfig& c) {
  return TransformerHyper{c.tf_layers, c.tf_dim, c.tf_heads, c.tf_ff};
}

struct EncoderOut {
  Var h1;  // (n, H) after layer 1, ELU
  Var h2;  // (n, H) after layer 2, mean-merged
};

EncoderOut encoder_forward(Tape& tape, const Mag& g, const NodeFeatureTable& t,
                           const BoundParams& p, const GlpModel& m) {
  int n = g.num_nodes();
  if (t.word_dim != m.word_dim)
    fail_data("feature width mismatch with checkpoint: word_dim " + std::to_string(t.word_dim) +
              " vs " + std::to_string(m.word_dim));
  // constant slice: centralities, word vector, OOV flag
  Tensor cpart(n, 5 + m.word_dim + 1);
  for (int v = 0; v < n; ++v) {
    const auto& c = t.centrality[static_cast<size_t>(v)];
    cpart.at(v, 0) = c.degree;
    cpart.at(v, 1) = c.closeness;
    cpart.at(v, 2) = c.betweenness;
    cpart.at(v, 3) = c.load;
    cpart.at(v, 4) = c.harmonic;
    for (int d = 0; d < m.word_dim; ++d)
      cpart.at(v, 5 + d) = t.word_vec[static_cast<size_t>(v) * m.word_dim + d];
    cpart.at(v, 5 + m.word_dim) = static_cast<double>(t.oov[static_cast<size_t>(v)]);
  }
  Var xc = tape.input(std::move(cpart), false);
  Var xl = tape.gather_rows(p("emb.lang"), t.lang_index);
  Var xp = tape.gather_rows(p("emb.pos"), t.position_index);
  Var xg = tape.gather_rows(p("emb.commg"), t.community_greedy);
  Var xlp = tape.gather_rows(p("emb.commlp"), t.community_lp);
  Var x = tape.concat_cols({xc, xl, xp, xg, xlp});

  GatOut g1 = gat_forward(tape, x, n, g.edges, p, "gat1", gat1_hyper(m));
  Var h1 = tape.elu(g1.out);
  GatOut g2 = gat_forward(tape, h1, n, g.edges, p, "gat2", gat2_hyper(m));
  return EncoderOut{h1, g2.out};
}

Var mlp_forward(Tape& tape, Var h, const BoundParams& p, const GlpConfig& c) {
  Var x = h;
  for (int l = 0; l < c.mlp_layers; ++l) {
    x = linear_forward(tape, x, p, "mlp." + std::to_string(l));
    if (l + 1 < c.mlp_layers) x = tape.relu(x);
  }
  return x;
}

std::vector<int> glpb_loss_labels(const Mag& g) {
  std::vector<int> labels(static_cast<size_t>(g.num_nodes()), -1);
  for (int v = 0; v < g.num_nodes(); ++v) {
    int li = g.lang_of(v);
    // cross-entropy on source nodes only; dev labels drive early stopping
    if (g.roles[static_cast<size_t>(li)] == Role::Source)
      labels[static_cast<size_t>(v)] = g.labels[static_cast<size_t>(v)];
  }
  return labels;
}

struct EvalCounts {
  long correct = 0;
  long total = 0;
  double accuracy() const { return total > 0 ? static_cast<double>(correct) / total : 0.0; }
};

// one training step over a batch of verse graphs; returns (sum nll, count)
struct BatchResult {
  double loss_sum = 0;
  long count = 0;
};

struct EarlyStopper {
  int patience;
  bool enabled;
  double best = -1.0;
  int best_epoch = -1;
  int bad = 0;

  // returns true when training should stop
  bool update(int epoch, double metric) {
    if (metric > best + 1e-12) {
      best = metric;
      best_epoch = epoch;
      bad = 0;
      return false;
    }
    if (!enabled) return false;
    return ++bad >= patience;
  }
};

}  // namespace

// ---- GLP-B training ----

GlpModel train_glpb(const std::vector<Mag>& mags, const std::vector<NodeFeatureTable>& features,
                    const GlpConfig& config, TrainLog* log) {
  check_config(config);
  if (mags.empty() || mags.size() != features.size())
    fail_usage("train_glpb: mags and features must align");

  GlpModel model;
  model.kind = GlpModel::Kind::Base;
  model.config = config;
  model.word_dim = features[0].word_dim;
  model.languages = features[0].languages;
  if (model.languages.empty()) fail_usage("train_glpb: feature tables carry no language list");

  long labeled = 0;
  bool have_dev = false;
  for (const auto& g : mags) {
    for (size_t li = 0; li < g.langs.size(); ++li) {
      if (g.roles[li] == Role::Source) labeled += g.token_counts[li];
      if (g.roles[li] == Role::Dev) have_dev = true;
    }
  }
  if (labeled == 0) fail_data("train_glpb: no labeled source nodes in any graph");
  if (config.early_stopping && !have_dev)
    fail_data("train_glpb: early stopping enabled but no dev-language nodes exist");

  Rng init_rng = make_rng(mix_seed(config.seed, "glpb-init"));
  init_feature_embeddings(model, init_rng);
  init_gat_params(model.params, "gat1", gat1_hyper(model), init_rng);
  init_gat_params(model.params, "gat2", gat2_hyper(model), init_rng);
  init_mlp_head(model, init_rng);

  OptimizerConfig opt;  // Adam for the graph model; AdamW is the tagger's
  OptimizerState opt_state;

  int n_verses = static_cast<int>(mags.size());
  std::vector<int> order(static_cast<size_t>(n_verses));
  for (int i = 0; i < n_verses; ++i) order[static_cast<size_t>(i)] = i;

  TrainLog local_log;
  EarlyStopper stopper{config.patience, config.early_stopping};
  std::map<std::string, Tensor> best_params = model.params.tensors;

  auto eval_dev = [&]() {
    std::vector<EvalCounts> per_mag(mags.size());
    par::for_each(n_verses, [&](int k) {
      const Mag& g = mags[static_cast<size_t>(k)];
      bool any = false;
      for (auto r : g.roles) any = any || r == Role::Dev;
      if (!any) return;
      Tape tape;
      BoundParams p = bind_params(tape, model.params, false);
      EncoderOut enc = encoder_forward(tape, g, features[static_cast<size_t>(k)], p, model);
      Var logits = mlp_forward(tape, enc.h2, p, model.config);
      const Tensor& lv = tape.val(logits);
      EvalCounts& ec = per_mag[static_cast<size_t>(k)];
      for (int v = 0; v < g.num_nodes(); ++v) {
        if (g.roles[static_cast<size_t>(g.lang_of(v))] != Role::Dev) continue;
        ec.total++;
        if (argmax_tag(&lv.v[static_cast<size_t>(v) * kNumTags]) ==
            g.labels[static_cast<size_t>(v)])
          ec.correct++;
      }
    });
    EvalCounts total;
    for (const auto& ec : per_mag) {
      total.correct += ec.correct;
      total.total += ec.total;
    }
    return total.accuracy();
  };

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng shuffle_rng = make_rng(mix_seed(config.seed, mix_seed(static_cast<uint64_t>(epoch), "glpb-shuffle")));
    shuffle(order, shuffle_rng);
    double epoch_loss = 0;
    long epoch_count = 0;
    for (int start = 0; start < n_verses; start += config.batch_glpb) {
      int end = std::min(n_verses, start + config.batch_glpb);
      int bsize = end - start;
      std::vector<GradMap> grads(static_cast<size_t>(bsize));
      std::vector<BatchResult> results(static_cast<size_t>(bsize));
      par::for_each(bsize, [&](int bi) {
        int k = order[static_cast<size_t>(start + bi)];
        const Mag& g = mags[static_cast<size_t>(k)];
        auto labels = glpb_loss_labels(g);
        bool any = false;
        for (int l : labels) any = any || l >= 0;
        if (!any) return;
        Tape tape;
        BoundParams p = bind_params(tape, model.params, true);
        EncoderOut enc = encoder_forward(tape, g, features[static_cast<size_t>(k)], p, model);
        Var logits = mlp_forward(tape, enc.h2, p, model.config);
        int count = 0;
        Var loss = tape.ce_masked_sum(logits, labels, &count);
        tape.backward(loss);
        grads[static_cast<size_t>(bi)] = zero_grads_like(model.params);
        collect_grads(tape, p, grads[static_cast<size_t>(bi)]);
        results[static_cast<size_t>(bi)] = BatchResult{tape.val(loss).item(), count};
      });
      GradMap batch_grads = zero_grads_like(model.params);
      double batch_loss = 0;
      long batch_count = 0;
      for (int bi = 0; bi < bsize; ++bi) {  // merge in batch order
        if (results[static_cast<size_t>(bi)].count == 0) continue;
        accumulate(batch_grads, grads[static_cast<size_t>(bi)]);
        batch_loss += results[static_cast<size_t>(bi)].loss_sum;
        batch_count += results[static_cast<size_t>(bi)].count;
      }
      if (batch_count == 0) continue;
      scale_grads(batch_grads, 1.0 / static_cast<double>(batch_count));
      clip_global_norm(batch_grads, config.clip_norm);
      optimizer_step(opt, model.params, batch_grads, opt_state, config.lr_glpb);
      epoch_loss += batch_loss;
      epoch_count += batch_count;
    }
    double mean_loss = epoch_count > 0 ? epoch_loss / static_cast<double>(epoch_count) : 0.0;
    double dev = eval_dev();
    local_log.curve.push_back({epoch, mean_loss, dev});
    bool was_best = dev > stopper.best + 1e-12;
    bool stop = stopper.update(epoch, dev);
    if (was_best) best_params = model.params.tensors;
    local_log.stopped_epoch = epoch;
    if (stop) break;
  }
  model.params.tensors = best_params;  // restore best checkpoint
  local_log.best_epoch = stopper.best_epoch;
  local_log.best_metric = stopper.best;
  if (log) *log = local_log;
  return model;
}

// ---- inference ----

PredictionSet predict_with_confidence(const GlpModel& model, const std::vector<Mag>& mags,
                                      const std::vector<NodeFeatureTable>& features,
                                      const std::set<std::string>& langs) {
  if (model.kind != GlpModel::Kind::Base)
    fail_usage("predict_with_confidence expects the base model");
  std::vector<std::vector<std::pair<NodeKey, Prediction>>> parts(mags.size());
  par::for_each(static_cast<int>(mags.size()), [&](int k) {
    const Mag& g = mags[static_cast<size_t>(k)];
    bool any = langs.empty();
    for (const auto& l : g.langs) any = any || langs.count(l) > 0;
    if (!any) return;
    Tape tape;
    BoundParams p = bind_params(tape, model.params, false);
    EncoderOut enc = encoder_forward(tape, g, features[static_cast<size_t>(k)], p, model);
    Var logits = mlp_forward(tape, enc.h2, p, model.config);
    const Tensor& lv = tape.val(logits);
    for (int v = 0; v < g.num_nodes(); ++v) {
      const std::string& lang = g.langs[static_cast<size_t>(g.lang_of(v))];
      if (!langs.empty() && !langs.count(lang)) continue;
      auto probs = softmax17(&lv.v[static_cast<size_t>(v) * kNumTags]);
      int best = argmax_tag(&lv.v[static_cast<size_t>(v) * kNumTags]);
      parts[static_cast<size_t>(k)].push_back(
          {NodeKey{g.verse, lang, g.pos_of(v)},
           Prediction{tag_from_index(best), probs[static_cast<size_t>(best)]}});
    }
  });
  PredictionSet out;
  for (const auto& part : parts)
    for (const auto& [key, pred] : part) out.by_node.emplace(key, pred);
  return out;
}

PseudoLabels select_pseudo_labels(const PredictionSet& preds, double gamma,
                                  const std::set<std::string>& target_langs,
                                  SelectionReport* report) {
  PseudoLabels out;
  std::map<std::string, std::pair<long, long>> stats;  // lang -> (selected, total)
  for (const auto& [key, pred] : preds.by_node) {
    if (!target_langs.empty() && !target_langs.count(key.lang)) continue;
    auto& s = stats[key.lang];
    s.second++;
    if (pred.confidence >= gamma) {  // >= so gamma = 1.0 can accept perfect confidence
      s.first++;
      out.selected.emplace(key, pred);
    }
  }
  if (report) {
    report->rows.clear();
    for (const auto& [lang, s] : stats)
      report->rows.push_back({lang, s.first, s.second,
                              s.second > 0 ? static_cast<double>(s.first) / s.second : 0.0});
    report->empty_warning = out.selected.empty();
  }
  return out;
}

TagDistributionTable build_tag_distributions(const MultiParallelCorpus& corpus,
                                             const PredictionSet& glpb_predictions) {
  std::map<std::pair<std::string, std::string>, std::array<long, kNumTags>> counts;
  for (const auto& e : corpus.editions) {
    if (e.role != Role::Source) continue;
    for (const auto& [verse, tags] : e.tags) {
      auto itv = e.verses.find(verse);
      if (itv == e.verses.end()) continue;
      for (size_t i = 0; i < tags.size(); ++i) {
        if (tags[i] == Upos::Null) continue;
        counts[{e.lang, itv->second[i]}][static_cast<size_t>(tag_index(tags[i]))]++;
      }
    }
  }
  for (const auto& [key, pred] : glpb_predictions.by_node) {
    const auto* e = corpus.find(key.lang);
    if (!e || e->role == Role::Source) continue;  // predictions only stand in for non-source
    auto itv = e->verses.find(key.verse);
    if (itv == e->verses.end() || key.pos >= static_cast<int>(itv->second.size())) continue;
    counts[{key.lang, itv->second[static_cast<size_t>(key.pos)]}]
          [static_cast<size_t>(tag_index(pred.tag))]++;
  }
  TagDistributionTable out;
  for (const auto& [key, arr] : counts) {
    long total = 0;
    for (long c : arr) total += c;
    if (total == 0) continue;
    TagDistribution d;
    d.count = total;
    for (int i = 0; i < kNumTags; ++i)
      d.p[static_cast<size_t>(i)] = static_cast<double>(arr[static_cast<size_t>(i)]) / total;
    out.table.emplace(key, d);
  }
  return out;
}

// ---- GLP-SL ----

namespace {

// 17 tag frequencies + unseen flag appended to [h1 | h2]
constexpr int kTagDistWidth = kNumTags + 1;

struct SlVerseData {
  Tensor tokens;            // (n, 2H + 18)
  std::vector<int> loss_labels;
  std::vector<int> dev_labels;
};

SlVerseData build_sl_verse(const Mag& g, const NodeFeatureTable& t, const GlpModel& glpb,
                           const PseudoLabels& pseudo, const TagDistributionTable& tagdist,
                           double gamma) {
  int n = g.num_nodes();
  int h = glpb.config.gnn_hidden;
  SlVerseData out;
  Tape tape;
  BoundParams p = bind_params(tape, glpb.params, false);  // frozen encoder
  EncoderOut enc = encoder_forward(tape, g, t, p, glpb);
  const Tensor& h1 = tape.val(enc.h1);
  const Tensor& h2 = tape.val(enc.h2);
  out.tokens = Tensor(n, 2 * h + kTagDistWidth);
  out.loss_labels.assign(static_cast<size_t>(n), -1);
  out.dev_labels.assign(static_cast<size_t>(n), -1);
  for (int v = 0; v < n; ++v) {
    for (int c = 0; c < h; ++c) {
      out.tokens.at(v, c) = h1.at(v, c);
      out.tokens.at(v, h + c) = h2.at(v, c);
    }
    int li = g.lang_of(v);
    const std::string& lang = g.langs[static_cast<size_t>(li)];
    const TagDistribution* d = tagdist.lookup(lang, g.tokens[static_cast<size_t>(v)]);
    if (d) {
      for (int i = 0; i < kNumTags; ++i) out.tokens.at(v, 2 * h + i) = d->p[static_cast<size_t>(i)];
    } else {
      out.tokens.at(v, 2 * h + kNumTags) = 1.0;  // unseen flag
    }
    Role role = g.roles[static_cast<size_t>(li)];
    if (role == Role::Source) {
      out.loss_labels[static_cast<size_t>(v)] = g.labels[static_cast<size_t>(v)];
    } else if (role == Role::Dev) {
      out.dev_labels[static_cast<size_t>(v)] = g.labels[static_cast<size_t>(v)];
    } else {
      auto it = pseudo.selected.find(NodeKey{g.verse, lang, g.pos_of(v)});
      if (it != pseudo.selected.end()) {
        if (it->second.confidence < gamma)
          fail_internal("pseudo label below confidence threshold entered training");
        out.loss_labels[static_cast<size_t>(v)] = tag_index(it->second.tag);
      }
    }
  }
  return out;
}

Var sl_head_forward(Tape& tape, Var tokens, const std::vector<uint8_t>& mask,
                    const BoundParams& p, const GlpConfig& c) {
  Var x = linear_forward(tape, tokens, p, "proj");
  x = transformer_forward(tape, x, mask, p, "tf", tf_hyper(c));
  return linear_forward(tape, x, p, "head");
}

ParamStore sl_trainable_init(const GlpModel& glpb, const GlpConfig& config) {
  ParamStore store;
  Rng rng = make_rng(mix_seed(config.seed, "glpsl-init"));
  init_linear_params(store, "proj", 2 * glpb.config.gnn_hidden + kTagDistWidth, config.tf_dim,
                     rng);
  init_transformer_params(store, "tf", tf_hyper(config), rng);
  init_linear_params(store, "head", config.tf_dim, kNumTags, rng);
  return store;
}

}  // namespace

GlpModel train_glpsl(const std::vector<Mag>& mags, const std::vector<NodeFeatureTable>& features,
                     const GlpModel& glpb, const PseudoLabels& pseudo,
                     const TagDistributionTable& tagdist, const GlpConfig& config,
                     TrainLog* log) {
  check_config(config);
  if (glpb.kind != GlpModel::Kind::Base) fail_usage("train_glpsl: encoder model must be GLP-B");
  if (mags.size() != features.size()) fail_usage("train_glpsl: mags and features must align");

  // frozen encoder: token representations are precomputed once
  int n_verses = static_cast<int>(mags.size());
  std::vector<SlVerseData> data(static_cast<size_t>(n_verses));
  par::for_each(n_verses, [&](int k) {
    data[static_cast<size_t>(k)] = build_sl_verse(mags[static_cast<size_t>(k)],
                                                  features[static_cast<size_t>(k)], glpb, pseudo,
                                                  tagdist, config.gamma);
  });

  long labeled = 0;
  bool have_dev = false;
  for (const auto& d : data) {
    for (int l : d.loss_labels) labeled += l >= 0 ? 1 : 0;
    for (int l : d.dev_labels) have_dev = have_dev || l >= 0;
  }
  if (labeled == 0) fail_data("train_glpsl: no labeled nodes (sources + pseudo) to train on");
  if (config.early_stopping && !have_dev)
    fail_data("train_glpsl: early stopping enabled but no dev-language nodes exist");

  ParamStore trainable = sl_trainable_init(glpb, config);

  OptimizerConfig opt;
  OptimizerState opt_state;
  std::vector<int> order(static_cast<size_t>(n_verses));
  for (int i = 0; i < n_verses; ++i) order[static_cast<size_t>(i)] = i;

  TrainLog local_log;
  EarlyStopper stopper{config.patience, config.early_stopping};
  std::map<std::string, Tensor> best_params = trainable.tensors;

  auto eval_dev = [&]() {
    std::vector<EvalCounts> per_verse(static_cast<size_t>(n_verses));
    par::for_each(n_verses, [&](int k) {
      const SlVerseData& d = data[static_cast<size_t>(k)];
      bool any = false;
      for (int l : d.dev_labels) any = any || l >= 0;
      if (!any) return;
      Tape tape;
      BoundParams p = bind_params(tape, trainable, false);
      Var tokens = tape.input(d.tokens, false);
      std::vector<uint8_t> mask(static_cast<size_t>(d.tokens.rows), 1);
      Var logits = sl_head_forward(tape, tokens, mask, p, config);
      const Tensor& lv = tape.val(logits);
      EvalCounts& ec = per_verse[static_cast<size_t>(k)];
      for (int v = 0; v < d.tokens.rows; ++v) {
        if (d.dev_labels[static_cast<size_t>(v)] < 0) continue;
        ec.total++;
        if (argmax_tag(&lv.v[static_cast<size_t>(v) * kNumTags]) ==
            d.dev_labels[static_cast<size_t>(v)])
          ec.correct++;
      }
    });
    EvalCounts total;
    for (const auto& ec : per_verse) {
      total.correct += ec.correct;
      total.total += ec.total;
    }
    return total.accuracy();
  };

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng shuffle_rng = make_rng(mix_seed(config.seed, mix_seed(static_cast<uint64_t>(epoch), "glpsl-shuffle")));
    shuffle(order, shuffle_rng);
    double epoch_loss = 0;
    long epoch_count = 0;
    for (int start = 0; start < n_verses; start += config.batch_glpsl) {
      int end = std::min(n_verses, start + config.batch_glpsl);
      int bsize = end - start;
      std::vector<GradMap> grads(static_cast<size_t>(bsize));
      std::vector<BatchResult> results(static_cast<size_t>(bsize));
      par::for_each(bsize, [&](int bi) {
        int k = order[static_cast<size_t>(start + bi)];
        const SlVerseData& d = data[static_cast<size_t>(k)];
        bool any = false;
        for (int l : d.loss_labels) any = any || l >= 0;
        if (!any) return;
        Tape tape;
        BoundParams p = bind_params(tape, trainable, true);
        Var tokens = tape.input(d.tokens, false);
        std::vector<uint8_t> mask(static_cast<size_t>(d.tokens.rows), 1);
        Var logits = sl_head_forward(tape, tokens, mask, p, config);
        int count = 0;
        Var loss = tape.ce_masked_sum(logits, d.loss_labels, &count);
        tape.backward(loss);
        grads[static_cast<size_t>(bi)] = zero_grads_like(trainable);
        collect_grads(tape, p, grads[static_cast<size_t>(bi)]);
        results[static_cast<size_t>(bi)] = BatchResult{tape.val(loss).item(), count};
      });
      GradMap batch_grads = zero_grads_like(trainable);
      double batch_loss = 0;
      long batch_count = 0;
      for (int bi = 0; bi < bsize; ++bi) {
        if (results[static_cast<size_t>(bi)].count == 0) continue;
        accumulate(batch_grads, grads[static_cast<size_t>(bi)]);
        batch_loss += results[static_cast<size_t>(bi)].loss_sum;
        batch_count += results[static_cast<size_t>(bi)].count;
      }
      if (batch_count == 0) continue;
      scale_grads(batch_grads, 1.0 / static_cast<double>(batch_count));
      clip_global_norm(batch_grads, config.clip_norm);
      optimizer_step(opt, trainable, batch_grads, opt_state, config.lr_glpsl);
      epoch_loss += batch_loss;
      epoch_count += batch_count;
    }
    double mean_loss = epoch_count > 0 ? epoch_loss / static_cast<double>(epoch_count) : 0.0;
    double dev = eval_dev();
    local_log.curve.push_back({epoch, mean_loss, dev});
    bool was_best = dev > stopper.best + 1e-12;
    bool stop = stopper.update(epoch, dev);
    if (was_best) best_params = trainable.tensors;
    local_log.stopped_epoch = epoch;
    if (stop) break;
  }
  trainable.tensors = best_params;
  local_log.best_epoch = stopper.best_epoch;
  local_log.best_metric = stopper.best;
  if (log) *log = local_log;

  // final model: frozen encoder parameters + trained classifier
  GlpModel model;
  model.kind = GlpModel::Kind::SelfLearning;
  model.config = config;
  model.word_dim = glpb.word_dim;
  model.languages = glpb.languages;
  for (const auto& name : glpb.params.names) model.params.add(name, glpb.params.at(name));
  for (const auto& name : trainable.names) model.params.add(name, trainable.at(name));
  return model;
}

ProjectedDataset project_corpus(const GlpModel& model, const std::vector<Mag>& mags,
                                const std::vector<NodeFeatureTable>& features,
                                const TagDistributionTable* tagdist,
                                const std::string& target_lang) {
  bool sl = model.kind == GlpModel::Kind::SelfLearning;
  if (sl && !tagdist) fail_usage("project_corpus: SL model needs the tag distribution table");
  ProjectedDataset ds;
  ds.lang = target_lang;
  ds.provenance = sl ? "glp-sl" : "glp-b";
  std::vector<std::optional<TaggedSentence>> parts(mags.size());
  par::for_each(static_cast<int>(mags.size()), [&](int k) {
    const Mag& g = mags[static_cast<size_t>(k)];
    int li = -1;
    for (size_t i = 0; i < g.langs.size(); ++i)
      if (g.langs[i] == target_lang) li = static_cast<int>(i);
    if (li < 0) return;  // verse absent in the target language
    Tape tape;
    BoundParams p = bind_params(tape, model.params, false);
    Var logits;
    if (!sl) {
      EncoderOut enc = encoder_forward(tape, g, features[static_cast<size_t>(k)], p, model);
      logits = mlp_forward(tape, enc.h2, p, model.config);
    } else {
      EncoderOut enc = encoder_forward(tape, g, features[static_cast<size_t>(k)], p, model);
      int n = g.num_nodes();
      int h = model.config.gnn_hidden;
      const Tensor& h1 = tape.val(enc.h1);
      const Tensor& h2 = tape.val(enc.h2);
      Tensor tokens(n, 2 * h + kTagDistWidth);
      for (int v = 0; v < n; ++v) {
        for (int c = 0; c < h; ++c) {
          tokens.at(v, c) = h1.at(v, c);
          tokens.at(v, h + c) = h2.at(v, c);
        }
        const TagDistribution* d =
            tagdist->lookup(g.langs[static_cast<size_t>(g.lang_of(v))], g.tokens[static_cast<size_t>(v)]);
        if (d) {
          for (int i = 0; i < kNumTags; ++i)
            tokens.at(v, 2 * h + i) = d->p[static_cast<size_t>(i)];
        } else {
          tokens.at(v, 2 * h + kNumTags) = 1.0;
        }
      }
      Var tv = tape.input(std::move(tokens), false);
      std::vector<uint8_t> mask(static_cast<size_t>(n), 1);
      logits = sl_head_forward(tape, tv, mask, p, model.config);
    }
    const Tensor& lv = tape.val(logits);
    TaggedSentence sent;
    sent.verse = g.verse;
    int count = g.token_counts[static_cast<size_t>(li)];
    for (int pos = 0; pos < count; ++pos) {
      int v = g.node_id(li, pos);
      int best = argmax_tag(&lv.v[static_cast<size_t>(v) * kNumTags]);
      auto probs = softmax17(&lv.v[static_cast<size_t>(v) * kNumTags]);
      sent.tokens.push_back(g.tokens[static_cast<size_t>(v)]);
      sent.tags.push_back(tag_from_index(best));
      sent.confidence.push_back(probs[static_cast<size_t>(best)]);
    }
    parts[static_cast<size_t>(k)] = std::move(sent);
  });
  for (auto& part : parts)
    if (part) ds.sentences.push_back(std::move(*part));
  return ds;
}

ProjectedDataset majority_vote_project(const MultiParallelCorpus& corpus,
                                       const AlignmentSet& alignments,
                                       const std::string& target_lang) {
  const auto& target = corpus.at(target_lang);
  // global tag frequencies over all source tag files break vote ties
  std::array<long, kNumTags> global{};
  for (const auto& e : corpus.editions) {
    if (e.role != Role::Source) continue;
    for (const auto& [v, tags] : e.tags) {
      (void)v;
      for (Upos t : tags)
        if (t != Upos::Null) global[static_cast<size_t>(tag_index(t))]++;
    }
  }

  ProjectedDataset ds;
  ds.lang = target_lang;
  ds.provenance = "baseline";
  for (const auto& [verse, tokens] : target.verses) {
    if (tokens.empty()) continue;
    std::vector<std::array<long, kNumTags>> votes(tokens.size());
    for (auto& v : votes) v.fill(0);
    for (const auto& e : corpus.editions) {
      if (e.role != Role::Source) continue;
      auto itt = e.tags.find(verse);
      if (itt == e.tags.end()) continue;
      LangPair pair(target_lang, e.lang);
      auto itp = alignments.links.find(pair);
      if (itp == alignments.links.end()) continue;
      auto itv = itp->second.find(verse);
      if (itv == itp->second.end()) continue;
      bool target_is_a = pair.a == target_lang;
      for (const auto& [i, j] : itv->second) {
        int t_idx = target_is_a ? i : j;
        int s_idx = target_is_a ? j : i;
        if (t_idx < 0 || t_idx >= static_cast<int>(tokens.size()) || s_idx < 0 ||
            s_idx >= static_cast<int>(itt->second.size()))
          continue;
        Upos tag = itt->second[static_cast<size_t>(s_idx)];
        if (tag == Upos::Null) continue;
        votes[static_cast<size_t>(t_idx)][static_cast<size_t>(tag_index(tag))]++;
      }
    }
    TaggedSentence sent;
    sent.verse = verse;
    for (size_t i = 0; i < tokens.size(); ++i) {
      sent.tokens.push_back(tokens[i]);
      long total = 0;
      for (long c : votes[i]) total += c;
      if (total == 0) {
        sent.tags.push_back(Upos::Null);  // unaligned tokens stay NULL
        sent.confidence.push_back(0.0);
        continue;
      }
      int best = 0;
      for (int t = 1; t < kNumTags; ++t) {
        long cb = votes[i][static_cast<size_t>(best)], ct = votes[i][static_cast<size_t>(t)];
        if (ct > cb ||
            (ct == cb && global[static_cast<size_t>(t)] > global[static_cast<size_t>(best)]))
          best = t;  // remaining ties keep the lower (lexicographically first) tag
      }
      sent.tags.push_back(tag_from_index(best));
      sent.confidence.push_back(static_cast<double>(votes[i][static_cast<size_t>(best)]) / total);
    }
    ds.sentences.push_back(std::move(sent));
  }
  return ds;
}

}  // namespace glp
