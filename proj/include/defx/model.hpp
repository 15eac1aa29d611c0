#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "defx/autodiff.hpp"
#include "defx/rng.hpp"
#include "defx/tensor.hpp"

namespace defx {

struct Hyperparams {
  int word_dim = 300;
  int pos_dim = 50;
  int h_dim = 200;  // BiLSTM output width, both directions together
  int g_dim = 200;  // GCN output width
  int gcn_layers = 2;
  int latent_labels = 3;  // U, size of the latent label space

  // Trade-off weights of the four task losses.
  double alpha = 1.0;  // sequence labeling
  double beta = 10.0;  // sentence classification
  double gamma = 1.0;  // dependency path prediction
  double eta = 1.0;    // semantic consistency
  // Weights of the three terms inside the semantic consistency loss.
  double sem_a = 1.0;  // direct local (dot product)
  double sem_b = 1.0;  // indirect local (discriminator)
  double sem_c = 1.0;  // global (latent labels)

  double learning_rate = 0.003;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 100;
  int patience = 10;  // early-stopping patience on dev macro F1
  std::uint64_t seed = 1;
  double dropout = 0.0;
  double grad_clip = 0.0;  // 0 disables clipping

  void validate() const;  // throws std::invalid_argument
  int lstm_dir_dim() const { return h_dim / 2; }
  int joint_dim() const { return h_dim + g_dim; }
};

struct LstmGate {
  Tensor w_x, w_h, b;
};

struct LstmDirection {
  LstmGate input, forget, output, cand;
};

struct GcnLayer {
  Tensor w, b;
};

// Two affine layers with a ReLU in between.
struct Ffn2 {
  Tensor w1, b1, w2, b2;
};

struct CrfParams {
  Tensor emission_w;   // {n_tags, h_dim + g_dim}
  Tensor emission_b;   // {n_tags}
  Tensor transitions;  // {n_tags + 1, n_tags}; last row = out of the start state
};

struct ConsistencyHeads {
  Ffn2 discriminator;  // input {2*h_dim}, scalar logit out
  Tensor latent_w;     // {U, h_dim}, shared by the sentence and pair inputs
  Tensor latent_b;     // {U}
};

struct ModelParams {
  Tensor word_emb;  // {n_words, word_dim}
  Tensor pos_emb;   // {n_pos, pos_dim}
  LstmDirection lstm_fw, lstm_bw;
  std::vector<GcnLayer> gcn;
  CrfParams crf;
  Ffn2 classifier;
  Ffn2 path_head;
  ConsistencyHeads consistency;

  // Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero,
  // embedding tables uniform in [-0.05, 0.05]. Draw order = visit order.
  static ModelParams init(const Hyperparams& hp, int n_words, int n_pos, int n_tags, Rng& rng);

  ModelParams zeros_like() const;

  template <typename F>
  void for_each(F&& fn) {
    visit(*this, fn);
  }
  template <typename F>
  void for_each(F&& fn) const {
    visit(*this, fn);
  }

  Tensor* find(std::string_view name);
  const Tensor* find(std::string_view name) const;
  std::int64_t param_count() const;
  bool all_finite() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& fn) {
    fn("word_emb", self.word_emb);
    fn("pos_emb", self.pos_emb);
    auto dir = [&](const std::string& prefix, auto& d) {
      auto gate = [&](const std::string& g, auto& gt) {
        fn(prefix + "." + g + ".w_x", gt.w_x);
        fn(prefix + "." + g + ".w_h", gt.w_h);
        fn(prefix + "." + g + ".b", gt.b);
      };
      gate("input", d.input);
      gate("forget", d.forget);
      gate("output", d.output);
      gate("cand", d.cand);
    };
    dir("lstm_fw", self.lstm_fw);
    dir("lstm_bw", self.lstm_bw);
    for (std::size_t i = 0; i < self.gcn.size(); ++i) {
      const std::string prefix = "gcn" + std::to_string(i + 1);
      fn(prefix + ".w", self.gcn[i].w);
      fn(prefix + ".b", self.gcn[i].b);
    }
    fn("crf.emission_w", self.crf.emission_w);
    fn("crf.emission_b", self.crf.emission_b);
    fn("crf.transitions", self.crf.transitions);
    auto ffn = [&](const std::string& prefix, auto& h) {
      fn(prefix + ".w1", h.w1);
      fn(prefix + ".b1", h.b1);
      fn(prefix + ".w2", h.w2);
      fn(prefix + ".b2", h.b2);
    };
    ffn("classifier", self.classifier);
    ffn("path", self.path_head);
    ffn("discriminator", self.consistency.discriminator);
    fn("latent.w", self.consistency.latent_w);
    fn("latent.b", self.consistency.latent_b);
  }
};

// Binds parameter tensors to leaf nodes of one graph. Repeated requests for
// the same tensor (or table row) return the same node, so gradients
// accumulate in one place and can be copied back out after backward().
class ParamBinding {
 public:
  ParamBinding(Tape& tape, const ModelParams& params) : tape_(&tape), params_(&params) {}

  Node* get(const std::string& name);
  Node* row(const std::string& table, int r);  // single embedding row as a vector leaf

  // Adds the leaf gradients (where backward reached them) into `grads`,
  // which must be shaped like the bound params.
  void add_grads_to(ModelParams& grads) const;

  const ModelParams& params() const { return *params_; }

 private:
  Tape* tape_;
  const ModelParams* params_;
  std::map<std::string, Node*> full_;
  std::map<std::pair<std::string, int>, Node*> rows_;
};

// input -> w1 x + b1 -> ReLU -> w2 (.) + b2, reading the four tensors
// "<prefix>.w1" etc. from the binding.
Node* ffn2_forward(Tape& tape, ParamBinding& binding, const std::string& prefix, Node* input);

// -log softmax(logits)[index], computed as logsumexp(logits) - logits[index].
Node* softmax_nll(Tape& tape, Node* logits, int index);

}  // namespace defx
