#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "glp/corpus.hpp"
#include "glp/embeddings.hpp"
#include "glp/glp_model.hpp"
#include "glp/nn.hpp"

namespace glp {

// Monolingual sequence tagger trained on projected (noisy, partially NULL)
// data: frozen input embeddings, bidirectional LSTM, linear output over 18
// cells (17 tags + NULL).  NULL-labeled tokens are masked from the loss;
// at inference the NULL cell is forced to -inf so it is never predicted.

struct TaggerConfig {
  int hidden = 128;  // per direction
  int epochs = 15;   // fixed, no early stopping
  int batch = 32;
  double lr = 1e-3;
  double weight_decay = 0.01;  // AdamW
  double clip_norm = 5.0;
  uint64_t seed = 1;

  nlohmann::json to_json() const;
  static TaggerConfig from_json(const nlohmann::json& j);
};

struct TaggerModel {
  TaggerConfig config;
  std::string lang;
  int emb_dim = 0;
  ParamStore params;
};

void save_tagger(const TaggerModel& model, const std::string& path);
TaggerModel load_tagger(const std::string& path);

TaggerModel train_tagger(const ProjectedDataset& dataset, const EmbeddingSet& embeddings,
                         const TaggerConfig& config, TrainLog* log = nullptr);

// Tags arbitrary sentences of the model's language.  Every token receives
// one of the 17 real tags.
std::vector<TaggedSentence> tag_sentences(
    const TaggerModel& model, const EmbeddingSet& embeddings,
    const std::vector<std::pair<VerseId, std::vector<std::string>>>& sentences);

// Loss of one sentence against (possibly NULL-masked) labels; exposed for
// gradient checking.
Var tagger_loss(Tape& tape, const BoundParams& p, const TaggerConfig& config, Var emb_matrix,
                const std::vector<int>& labels18, int* labeled_count);

}  // namespace glp
