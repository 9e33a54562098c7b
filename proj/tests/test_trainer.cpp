#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "graphssl/trainer.hpp"
#include "testutil.hpp"

using namespace graphssl;
using namespace graphssl::testing;

namespace {

Dataset tiny_dataset(int count, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.name = "tiny";
  ds.feature_dim = 3;
  ds.num_classes = 2;
  for (int i = 0; i < count; ++i) ds.graphs.push_back(random_graph(rng, 3, 8, 3));
  return ds;
}

TrainConfig tiny_config(int epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 4;
  cfg.seed = 11;
  cfg.encoder.num_layers = 2;
  cfg.encoder.hidden_dim = 6;
  cfg.encoder.projector_dim = 8;
  return cfg;
}

}  // namespace

TEST_CASE("adam_step: zero gradient leaves parameters unchanged") {
  EncoderConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_dim = 2;
  cfg.projector_dim = 2;
  ModelParams params = init_params(cfg, 2, 5);
  const ModelParams before = params;
  AdamState state = make_adam_state(params);
  std::vector<Tensor> grads;
  for (const Tensor& t : params.tensors) grads.emplace_back(t.rows(), t.cols());
  adam_step(params, grads, state, 1e-3, 0.9, 0.999, 1e-8);
  for (std::size_t i = 0; i < params.count(); ++i)
    CHECK(params.tensors[i] == before.tensors[i]);
  CHECK(state.step == 1);
}

TEST_CASE("adam_step: first step moves by about lr in the gradient's sign") {
  EncoderConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_dim = 2;
  cfg.projector_dim = 2;
  ModelParams params = init_params(cfg, 2, 5);
  const ModelParams before = params;
  AdamState state = make_adam_state(params);
  std::vector<Tensor> grads;
  for (const Tensor& t : params.tensors) {
    Tensor g(t.rows(), t.cols());
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = (k % 2 == 0) ? 0.37 : -1.4;
    grads.push_back(std::move(g));
  }
  const double lr = 1e-3;
  adam_step(params, grads, state, lr, 0.9, 0.999, 1e-8);
  // Bias correction makes mhat/sqrt(vhat) ~= sign(g) on the first step.
  for (std::size_t i = 0; i < params.count(); ++i)
    for (std::size_t k = 0; k < params.tensors[i].size(); ++k) {
      const double delta = params.tensors[i][k] - before.tensors[i][k];
      const double expected = (k % 2 == 0) ? -lr : lr;
      CHECK(delta == doctest::Approx(expected).epsilon(1e-4));
    }
}

TEST_CASE("adam_step: constant gradient moves parameters monotonically") {
  EncoderConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_dim = 2;
  cfg.projector_dim = 2;
  ModelParams params = init_params(cfg, 2, 5);
  AdamState state = make_adam_state(params);
  std::vector<Tensor> grads;
  for (const Tensor& t : params.tensors) grads.emplace_back(t.rows(), t.cols(), 0.8);
  double last = params.tensors[0][0];
  for (int step = 0; step < 20; ++step) {
    adam_step(params, grads, state, 1e-2, 0.9, 0.999, 1e-8);
    CHECK(params.tensors[0][0] < last);
    last = params.tensors[0][0];
  }
}

TEST_CASE("pretrain is deterministic and records one loss per epoch") {
  const Dataset ds = tiny_dataset(10, 3);
  const TrainConfig cfg = tiny_config(3);
  const TrainResult a = pretrain(ds, cfg);
  const TrainResult b = pretrain(ds, cfg);
  REQUIRE(a.loss_history.size() == 3);
  CHECK(a.loss_history == b.loss_history);
  REQUIRE(a.params.count() == b.params.count());
  for (std::size_t i = 0; i < a.params.count(); ++i)
    CHECK(a.params.tensors[i] == b.params.tensors[i]);  // bit-identical
  for (double l : a.loss_history) CHECK(std::isfinite(l));
}

TEST_CASE("pretrain with one epoch emits a single history entry") {
  const TrainResult r = pretrain(tiny_dataset(6, 9), tiny_config(1));
  CHECK(r.loss_history.size() == 1);
}

TEST_CASE("every parameter changes after an epoch of training") {
  const Dataset ds = tiny_dataset(12, 5);
  TrainConfig cfg = tiny_config(1);
  cfg.loss = LossKind::VicRegHsic;
  const ModelParams init = init_params(cfg.encoder, ds.feature_dim, cfg.seed);
  const TrainResult r = pretrain(ds, cfg);
  for (std::size_t i = 0; i < r.params.count(); ++i)
    CHECK(r.params.tensors[i].max_abs_diff(init.tensors[i]) > 0.0);
}

TEST_CASE("trailing batch smaller than 2 is dropped") {
  // 5 graphs with batch size 4: the second batch has 1 graph and is dropped.
  const Dataset ds = tiny_dataset(5, 21);
  TrainConfig cfg = tiny_config(1);
  cfg.batch_size = 4;
  const TrainResult r = pretrain(ds, cfg);
  CHECK(r.loss_history.size() == 1);

  // The run matches training on strictly full batches only (same shuffle).
  TrainConfig cfg2 = cfg;
  const TrainResult again = pretrain(ds, cfg2);
  CHECK(r.loss_history == again.loss_history);
}

TEST_CASE("pretrain works with every loss selector") {
  const Dataset ds = tiny_dataset(8, 33);
  for (LossKind kind : {LossKind::VicReg, LossKind::VicRegHsic, LossKind::Hsic,
                        LossKind::BarlowTwins, LossKind::NtXent}) {
    TrainConfig cfg = tiny_config(2);
    cfg.loss = kind;
    const TrainResult r = pretrain(ds, cfg);
    CHECK(r.loss_history.size() == 2);
    for (double l : r.loss_history) CHECK(std::isfinite(l));
  }
}

TEST_CASE("pretrain validates its inputs") {
  const Dataset empty;
  CHECK_THROWS_AS(pretrain(empty, tiny_config(1)), std::invalid_argument);

  TrainConfig bad = tiny_config(1);
  bad.batch_size = 1;
  CHECK_THROWS_AS(pretrain(tiny_dataset(4, 1), bad), std::invalid_argument);

  TrainConfig nopool = tiny_config(1);
  nopool.pool.specs.clear();
  CHECK_THROWS_AS(pretrain(tiny_dataset(4, 1), nopool), std::invalid_argument);
}

TEST_CASE("loss history CSV has the documented schema") {
  TempDir tmp("losscsv");
  const auto file = tmp.path() / "loss.csv";
  write_loss_history_csv({1.5, 0.75}, file);
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,mean_loss");
  std::getline(in, line);
  CHECK(line == "0,1.5");
  std::getline(in, line);
  CHECK(line == "1,0.75");
}
