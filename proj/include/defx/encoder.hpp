#pragma once

#include <vector>

#include "defx/corpus.hpp"
#include "defx/model.hpp"

namespace defx {

struct EncoderOutputs {
  std::vector<Node*> embed_rows;  // e_i = [word ; pos]
  std::vector<Node*> lstm_rows;   // h_i = [forward ; backward]
  std::vector<Node*> gcn_rows;    // output of the last GCN layer
  std::vector<Node*> joint_rows;  // [h_i ; gcn_i]
  Node* lstm_matrix = nullptr;    // {N, h_dim}
  Node* gcn_matrix = nullptr;     // {N, g_dim}
};

struct EncodeOptions {
  double dropout = 0.0;  // applied to the embedding rows when > 0
  Rng* rng = nullptr;    // required when dropout > 0
};

// One leaf per looked-up embedding row (trainable); rows of the same word
// share the leaf.
std::vector<Node*> embed(Tape& tape, ParamBinding& binding, const Sentence& s, const Vocab& vocab);

// Standard LSTM cell in both directions; h_i concatenates the forward state
// at i with the backward state at i. Per-direction width is h_dim/2.
std::vector<Node*> bilstm(Tape& tape, ParamBinding& binding, const std::vector<Node*>& inputs,
                          const Hyperparams& hp);

// One graph-convolution layer over the dependency tree:
// out_i = ReLU(W * mean of {in_j : j in N(i)} + b) with N(i) = {i} + head + children.
std::vector<Node*> gcn_layer(Tape& tape, Node* weight, Node* bias, const std::vector<Node*>& rows,
                             const Sentence& s);

EncoderOutputs encode(Tape& tape, ParamBinding& binding, const Sentence& s, const Vocab& vocab,
                      const Hyperparams& hp, const EncodeOptions& opts = {});

}  // namespace defx
