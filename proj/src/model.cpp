#include "defx/model.hpp"

#include <cmath>
#include <stdexcept>

namespace defx {

void Hyperparams::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(word_dim, "word_dim");
  positive(pos_dim, "pos_dim");
  positive(h_dim, "h_dim");
  positive(g_dim, "g_dim");
  positive(gcn_layers, "gcn_layers");
  positive(epochs, "epochs");
  if (h_dim % 2 != 0) throw std::invalid_argument("h_dim must be even (two LSTM directions)");
  if (latent_labels < 2) throw std::invalid_argument("latent_labels must be >= 2");
  for (double w : {alpha, beta, gamma, eta, sem_a, sem_b, sem_c}) {
    if (w < 0) throw std::invalid_argument("loss weights must be >= 0");
  }
  if (learning_rate <= 0) throw std::invalid_argument("learning_rate must be positive");
  if (dropout < 0 || dropout >= 1) throw std::invalid_argument("dropout must be in [0, 1)");
  if (grad_clip < 0) throw std::invalid_argument("grad_clip must be >= 0");
}

namespace {

void fill_uniform(Tensor& t, double bound, Rng& rng) {
  for (double& v : t.data) v = rng.uniform(-bound, bound);
}

Tensor weight(int out, int in, Rng& rng) {
  Tensor t = Tensor::zeros({out, in});
  fill_uniform(t, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  return t;
}

LstmGate make_gate(int hidden, int in, Rng& rng) {
  LstmGate g;
  g.w_x = weight(hidden, in, rng);
  g.w_h = weight(hidden, hidden, rng);
  g.b = Tensor::zeros({hidden});
  return g;
}

LstmDirection make_direction(int hidden, int in, Rng& rng) {
  LstmDirection d;
  d.input = make_gate(hidden, in, rng);
  d.forget = make_gate(hidden, in, rng);
  d.output = make_gate(hidden, in, rng);
  d.cand = make_gate(hidden, in, rng);
  return d;
}

Ffn2 make_ffn(int out, int hidden, int in, Rng& rng) {
  Ffn2 h;
  h.w1 = weight(hidden, in, rng);
  h.b1 = Tensor::zeros({hidden});
  h.w2 = weight(out, hidden, rng);
  h.b2 = Tensor::zeros({out});
  return h;
}

}  // namespace

ModelParams ModelParams::init(const Hyperparams& hp, int n_words, int n_pos, int n_tags, Rng& rng) {
  hp.validate();
  ModelParams p;
  p.word_emb = Tensor::zeros({n_words, hp.word_dim});
  fill_uniform(p.word_emb, 0.05, rng);
  p.pos_emb = Tensor::zeros({n_pos, hp.pos_dim});
  fill_uniform(p.pos_emb, 0.05, rng);

  const int in = hp.word_dim + hp.pos_dim;
  const int hd = hp.lstm_dir_dim();
  p.lstm_fw = make_direction(hd, in, rng);
  p.lstm_bw = make_direction(hd, in, rng);

  for (int t = 0; t < hp.gcn_layers; ++t) {
    GcnLayer layer;
    const int layer_in = t == 0 ? hp.h_dim : hp.g_dim;
    layer.w = weight(hp.g_dim, layer_in, rng);
    layer.b = Tensor::zeros({hp.g_dim});
    p.gcn.push_back(std::move(layer));
  }

  p.crf.emission_w = weight(n_tags, hp.joint_dim(), rng);
  p.crf.emission_b = Tensor::zeros({n_tags});
  p.crf.transitions = weight(n_tags + 1, n_tags, rng);

  p.classifier = make_ffn(2, hp.g_dim, hp.g_dim, rng);
  p.path_head = make_ffn(2, hp.g_dim, hp.g_dim, rng);
  p.consistency.discriminator = make_ffn(1, hp.h_dim, 2 * hp.h_dim, rng);
  p.consistency.latent_w = weight(hp.latent_labels, hp.h_dim, rng);
  p.consistency.latent_b = Tensor::zeros({hp.latent_labels});
  return p;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams copy = *this;
  copy.for_each([](const std::string&, Tensor& t) { std::fill(t.data.begin(), t.data.end(), 0.0); });
  return copy;
}

Tensor* ModelParams::find(std::string_view name) {
  Tensor* out = nullptr;
  for_each([&](const std::string& n, Tensor& t) {
    if (n == name) out = &t;
  });
  return out;
}

const Tensor* ModelParams::find(std::string_view name) const {
  const Tensor* out = nullptr;
  for_each([&](const std::string& n, const Tensor& t) {
    if (n == name) out = &t;
  });
  return out;
}

std::int64_t ModelParams::param_count() const {
  std::int64_t total = 0;
  for_each([&](const std::string&, const Tensor& t) { total += t.numel(); });
  return total;
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each([&](const std::string&, const Tensor& t) { ok = ok && t.all_finite(); });
  return ok;
}

Node* ParamBinding::get(const std::string& name) {
  auto it = full_.find(name);
  if (it != full_.end()) return it->second;
  const Tensor* t = params_->find(name);
  if (!t) throw std::invalid_argument("ParamBinding: unknown parameter '" + name + "'");
  Node* node = tape_->leaf(*t);
  full_[name] = node;
  return node;
}

Node* ParamBinding::row(const std::string& table, int r) {
  auto key = std::make_pair(table, r);
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;
  const Tensor* t = params_->find(table);
  if (!t) throw std::invalid_argument("ParamBinding: unknown parameter '" + table + "'");
  if (t->rank() != 2 || r < 0 || r >= t->rows())
    throw std::invalid_argument("ParamBinding: bad row " + std::to_string(r) + " of " + table);
  Tensor row_value = Tensor::zeros({t->cols()});
  for (int j = 0; j < t->cols(); ++j) row_value.at(j) = t->at(r, j);
  Node* node = tape_->leaf(std::move(row_value));
  rows_[key] = node;
  return node;
}

void ParamBinding::add_grads_to(ModelParams& grads) const {
  for (const auto& [name, node] : full_) {
    if (node->grad.data.empty()) continue;
    Tensor* g = grads.find(name);
    if (!g) throw std::logic_error("ParamBinding: grads missing tensor " + name);
    for (std::size_t i = 0; i < g->data.size(); ++i) g->data[i] += node->grad.data[i];
  }
  for (const auto& [key, node] : rows_) {
    if (node->grad.data.empty()) continue;
    Tensor* g = grads.find(key.first);
    if (!g) throw std::logic_error("ParamBinding: grads missing tensor " + key.first);
    for (int j = 0; j < g->cols(); ++j) g->at(key.second, j) += node->grad.at(j);
  }
}

Node* ffn2_forward(Tape& tape, ParamBinding& binding, const std::string& prefix, Node* input) {
  Node* hidden = tape.relu(
      tape.add(tape.matmul(binding.get(prefix + ".w1"), input), binding.get(prefix + ".b1")));
  return tape.add(tape.matmul(binding.get(prefix + ".w2"), hidden), binding.get(prefix + ".b2"));
}

Node* softmax_nll(Tape& tape, Node* logits, int index) {
  return tape.add(tape.log_sum_exp(logits), tape.negate(tape.row_select(logits, index)));
}

}  // namespace defx
