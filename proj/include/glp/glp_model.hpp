#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "glp/checkpoint.hpp"
#include "glp/features.hpp"
#include "glp/nn.hpp"

namespace glp {

// Graph label propagation over per-verse alignment graphs: a two-layer
// GAT encoder shared by both models, an MLP classifier for the base
// model, and a transformer classifier trained with self-learning for the
// second stage.

struct GlpConfig {
  // encoder
  int gnn_hidden = 256;         // width of both encoder outputs (64 for desk tests)
  int gat_heads = 4;
  double gat_negative_slope = 0.2;
  // base classifier
  int mlp_layers = 2;
  int mlp_hidden = 2048;
  double lr_glpb = 1e-3;
  int batch_glpb = 8;
  // self-learning classifier
  int tf_layers = 4;
  int tf_dim = 2048;
  int tf_heads = 16;
  int tf_ff = 2048;
  double lr_glpsl = 1e-5;
  int batch_glpsl = 32;
  double gamma = 0.95;          // 0.98 when external contextual vectors are used
  // training control
  int patience = 8;
  int max_epochs = 200;
  bool early_stopping = true;
  double clip_norm = 5.0;
  // categorical feature embeddings
  int lang_emb_dim = 16;
  int pos_emb_dim = 16;
  int comm_emb_dim = 8;
  int p_max = 256;
  int c_max = 16;
  uint64_t seed = 1;

  nlohmann::json to_json() const;
  static GlpConfig from_json(const nlohmann::json& j);
};

struct NodeKey {
  VerseId verse;
  std::string lang;
  int pos = 0;
  bool operator<(const NodeKey& o) const {
    return std::tie(verse, lang, pos) < std::tie(o.verse, o.lang, o.pos);
  }
  bool operator==(const NodeKey& o) const {
    return verse == o.verse && lang == o.lang && pos == o.pos;
  }
};

struct Prediction {
  Upos tag = Upos::X;
  double confidence = 0.0;
};

struct PredictionSet {
  std::map<NodeKey, Prediction> by_node;
};

struct TagDistribution {
  std::array<double, kNumTags> p{};
  long count = 0;
};

// (lang, word type) -> normalized tag frequencies.  Unseen types are the
// zero vector with an explicit unseen flag downstream.
struct TagDistributionTable {
  std::map<std::pair<std::string, std::string>, TagDistribution> table;
  const TagDistribution* lookup(const std::string& lang, const std::string& type) const;
};

struct PseudoLabels {
  std::map<NodeKey, Prediction> selected;  // confidence >= gamma, target languages
};

struct SelectionReport {
  struct Row {
    std::string lang;
    long selected = 0;
    long total = 0;
    double rate = 0.0;
  };
  std::vector<Row> rows;
  bool empty_warning = false;
};

struct TrainCurvePoint {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_metric = 0.0;
};

struct TrainLog {
  std::vector<TrainCurvePoint> curve;
  int best_epoch = -1;
  double best_metric = 0.0;
  int stopped_epoch = -1;
};

void write_curve_csv(const TrainLog& log, const std::string& path);
void write_selection_csv(const SelectionReport& report, const std::string& path);

struct GlpModel {
  enum class Kind { Base, SelfLearning };
  Kind kind = Kind::Base;
  GlpConfig config;
  int word_dim = 0;
  std::vector<std::string> languages;  // global language order bound at training
  ParamStore params;

  int input_width() const;  // 5 + word_dim + 1 + lang/pos/comm embeddings
  nlohmann::json hyper_json() const;
};

void save_glp_model(const GlpModel& model, const std::string& path);
GlpModel load_glp_model(const std::string& path);

// ---- training / inference ----

GlpModel train_glpb(const std::vector<Mag>& mags, const std::vector<NodeFeatureTable>& features,
                    const GlpConfig& config, TrainLog* log = nullptr);

// Softmax confidence over the 17 real tags for every node of the
// requested languages (all languages when the filter is empty).
PredictionSet predict_with_confidence(const GlpModel& model, const std::vector<Mag>& mags,
                                      const std::vector<NodeFeatureTable>& features,
                                      const std::set<std::string>& langs = {});

PseudoLabels select_pseudo_labels(const PredictionSet& preds, double gamma,
                                  const std::set<std::string>& target_langs,
                                  SelectionReport* report = nullptr);

// Source languages contribute their training tags; dev and target
// languages contribute base-model predictions over the corpus.
TagDistributionTable build_tag_distributions(const MultiParallelCorpus& corpus,
                                             const PredictionSet& glpb_predictions);

GlpModel train_glpsl(const std::vector<Mag>& mags, const std::vector<NodeFeatureTable>& features,
                     const GlpModel& glpb, const PseudoLabels& pseudo,
                     const TagDistributionTable& tagdist, const GlpConfig& config,
                     TrainLog* log = nullptr);

ProjectedDataset project_corpus(const GlpModel& model, const std::vector<Mag>& mags,
                                const std::vector<NodeFeatureTable>& features,
                                const TagDistributionTable* tagdist,  // required for SL models
                                const std::string& target_lang);

ProjectedDataset majority_vote_project(const MultiParallelCorpus& corpus,
                                       const AlignmentSet& alignments,
                                       const std::string& target_lang);

// Internal helpers exposed for tests.
int argmax_tag(const double* logits17);  // ties -> lowest tag index
std::vector<double> softmax17(const double* logits17);

}  // namespace glp
