#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "graphssl/augment.hpp"
#include "graphssl/encoder.hpp"
#include "graphssl/losses.hpp"

namespace graphssl {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 128;  // >= 2, variance/covariance need n >= 2
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::VicRegHsic;
  LossParams loss_params;
  AugmentPool pool{{AugmentSpec{AugmentKind::NodeDrop, 0.2},
                    AugmentSpec{AugmentKind::Subgraph, 0.2}}};
  EncoderConfig encoder;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // per-epoch mean batch loss
  double wall_time_s = 0.0;
};

// Bias-corrected first/second moment state, one slot per parameter tensor.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;
};

AdamState make_adam_state(const ModelParams& params);

void adam_step(ModelParams& params, const std::vector<Tensor>& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps);

// Self-supervised pre-training: per epoch, shuffle, draw a two-view pair per
// graph, encode+project both views, optimize the selected loss with Adam.
// Deterministic per (dataset, cfg); trailing batches smaller than 2 are
// dropped. Throws on non-finite loss with epoch/batch/component diagnostics.
TrainResult pretrain(const Dataset& dataset, const TrainConfig& cfg);

void write_loss_history_csv(const std::vector<double>& history,
                            const std::filesystem::path& file);

}  // namespace graphssl
