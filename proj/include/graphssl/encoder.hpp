#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "graphssl/graph.hpp"
#include "graphssl/tape.hpp"

namespace graphssl {

struct EncoderConfig {
  int num_layers = 3;
  int hidden_dim = 32;
  int projector_dim = 160;
  // Readout is mean pooling over each graph's nodes.
};

// All trainable tensors, in a fixed order so optimizer state and checkpoints
// line up: per message-passing layer an MLP (w1,b1,w2,b2), then the two
// projection-head pairs.
struct ModelParams {
  EncoderConfig cfg;
  int feature_dim = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> names;
  std::vector<Tensor> tensors;

  std::size_t count() const { return tensors.size(); }
  const Tensor& tensor(const std::string& name) const;
};

// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
ModelParams init_params(const EncoderConfig& cfg, int feature_dim, std::uint64_t seed);

// Tape handles for every parameter, in ModelParams order.
std::vector<Var> param_vars(Tape& tape, const ModelParams& params, bool requires_grad = true);

// Message passing: per layer h <- MLP(h + sum of neighbor features), two
// linear maps with an inner relu; then mean pooling per graph.
// Returns batch_size x hidden_dim.
Var encode(Tape& tape, const std::vector<Var>& vars, const EncoderConfig& cfg,
           const GraphBatch& batch);

// Projection head: linear -> relu -> linear, batch_size x projector_dim.
Var project(Tape& tape, const std::vector<Var>& vars, const EncoderConfig& cfg, Var embeddings);

// Convenience forward pass without gradients.
Tensor encode_graphs(const ModelParams& params, const GraphBatch& batch);

void save_checkpoint(const ModelParams& params, const std::filesystem::path& file);
ModelParams load_checkpoint(const std::filesystem::path& file);

}  // namespace graphssl
