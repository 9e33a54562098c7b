#pragma once

#include <cstdint>
#include <vector>

#include "graphssl/encoder.hpp"
#include "graphssl/graph.hpp"
#include "graphssl/rng.hpp"

namespace graphssl {

struct ProbeConfig {
  int folds = 10;
  int repeats = 5;
  int epochs = 200;
  double learning_rate = 0.01;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
};

struct EvalReport {
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;  // population std over repeats
  std::vector<double> per_repeat;
};

// Frozen-encoder embeddings (pre-projection), one row per graph, no
// augmentation.
Tensor embed_all(const ModelParams& params, const Dataset& dataset);

// Stratified k-fold splits per repeat; fold f holds every class's f-th slice
// of a seeded per-class shuffle.
std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels, int num_classes,
                                               int folds, Rng& rng);

// Multinomial logistic regression (single linear layer, softmax cross
// entropy, l2 penalty on the weights, full-batch gradient descent) trained
// per fold on the frozen embeddings; accuracy on the held-out fold.
EvalReport linear_probe(const Tensor& embeddings, const std::vector<int>& labels,
                        int num_classes, const ProbeConfig& cfg);

}  // namespace graphssl
