#include "graphssl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace graphssl {

AdamState make_adam_state(const ModelParams& params) {
  AdamState s;
  for (const Tensor& t : params.tensors) {
    s.m.emplace_back(t.rows(), t.cols());
    s.v.emplace_back(t.rows(), t.cols());
  }
  return s;
}

void adam_step(ModelParams& params, const std::vector<Tensor>& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (grads.size() != params.tensors.size())
    throw std::invalid_argument("adam_step: gradient count mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    Tensor& p = params.tensors[i];
    const Tensor& g = grads[i];
    if (!p.same_shape(g)) throw std::invalid_argument("adam_step: gradient shape mismatch");
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

namespace {

std::string loss_component_report(Tape& tape, LossKind kind, Var za, Var zb,
                                  const LossParams& params) {
  std::ostringstream os;
  if (kind == LossKind::VicReg || kind == LossKind::VicRegHsic || kind == LossKind::Hsic) {
    const CovarianceMode mode =
        kind == LossKind::VicReg ? CovarianceMode::VicReg : CovarianceMode::Hsic;
    os << "invariance=" << tape.value(invariance_term(tape, za, zb, params.p)).item()
       << " variance_a=" << tape.value(variance_term(tape, za, params.gamma, params.epsilon)).item()
       << " variance_b=" << tape.value(variance_term(tape, zb, params.gamma, params.epsilon)).item()
       << " covariance_a=" << tape.value(covariance_term(tape, za, mode)).item()
       << " covariance_b=" << tape.value(covariance_term(tape, zb, mode)).item();
  } else {
    os << "loss=" << loss_kind_name(kind);
  }
  return os.str();
}

}  // namespace

TrainResult pretrain(const Dataset& dataset, const TrainConfig& cfg) {
  if (dataset.graphs.empty()) throw std::invalid_argument("pretrain: empty dataset");
  if (cfg.epochs < 1) throw std::invalid_argument("pretrain: epochs must be >= 1");
  if (cfg.batch_size < 2) throw std::invalid_argument("pretrain: batch_size must be >= 2");
  if (cfg.pool.specs.empty()) throw std::invalid_argument("pretrain: empty augmentation pool");
  cfg.loss_params.check();

  const auto start = std::chrono::steady_clock::now();
  ModelParams params = init_params(cfg.encoder, dataset.feature_dim, cfg.seed);
  AdamState adam = make_adam_state(params);

  TrainResult result;
  result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

  std::vector<int> order(dataset.graphs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = Rng::from_keys(cfg.seed, {0x5u, static_cast<std::uint64_t>(epoch)});
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      if (end - begin < 2) break;  // variance/covariance undefined below n = 2
      const int batch_index = static_cast<int>(begin / cfg.batch_size);

      std::vector<Graph> views_a, views_b;
      views_a.reserve(end - begin);
      views_b.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        const int gi = order[k];
        Rng rng = Rng::from_keys(cfg.seed, {0xAu, static_cast<std::uint64_t>(epoch),
                                            static_cast<std::uint64_t>(batch_index),
                                            static_cast<std::uint64_t>(gi)});
        auto [va, vb] = sample_view_pair(dataset.graphs[static_cast<std::size_t>(gi)],
                                         cfg.pool, rng);
        views_a.push_back(std::move(va));
        views_b.push_back(std::move(vb));
      }

      const GraphBatch batch_a = batch_graphs(views_a);
      const GraphBatch batch_b = batch_graphs(views_b);

      Tape tape;
      std::vector<Var> vars = param_vars(tape, params, true);
      Var za = project(tape, vars, cfg.encoder, encode(tape, vars, cfg.encoder, batch_a));
      Var zb = project(tape, vars, cfg.encoder, encode(tape, vars, cfg.encoder, batch_b));
      Var loss = build_loss(tape, cfg.loss, za, zb, cfg.loss_params);
      const double loss_value = tape.value(loss).item();
      if (!std::isfinite(loss_value)) {
        throw std::runtime_error(
            "pretrain: non-finite loss at epoch " + std::to_string(epoch) + " batch " +
            std::to_string(batch_index) + " (" +
            loss_component_report(tape, cfg.loss, za, zb, cfg.loss_params) + ")");
      }
      tape.backward(loss);

      std::vector<Tensor> grads;
      grads.reserve(vars.size());
      for (Var v : vars) grads.push_back(tape.grad(v));
      adam_step(params, grads, adam, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps);

      loss_sum += loss_value;
      ++batches;
    }
    if (batches == 0)
      throw std::runtime_error("pretrain: no usable batch (dataset smaller than 2 graphs)");
    result.loss_history.push_back(loss_sum / batches);
  }

  result.params = std::move(params);
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_loss_history_csv(const std::vector<double>& history,
                            const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "epoch,mean_loss\n";
  char buf[64];
  for (std::size_t e = 0; e < history.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%.17g", history[e]);
    out << e << "," << buf << "\n";
  }
}

}  // namespace graphssl
