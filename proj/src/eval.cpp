#include "graphssl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "graphssl/rng.hpp"
#include "graphssl/tape.hpp"

namespace graphssl {

Tensor embed_all(const ModelParams& params, const Dataset& dataset) {
  if (dataset.graphs.empty()) throw std::invalid_argument("embed_all: empty dataset");
  if (dataset.feature_dim != params.feature_dim)
    throw std::invalid_argument("embed_all: feature_dim mismatch");
  const std::size_t hidden = static_cast<std::size_t>(params.cfg.hidden_dim);
  Tensor out(dataset.graphs.size(), hidden);
  // Chunked so a large corpus never builds one huge tape.
  const std::size_t chunk = 256;
  for (std::size_t begin = 0; begin < dataset.graphs.size(); begin += chunk) {
    const std::size_t end = std::min(dataset.graphs.size(), begin + chunk);
    std::vector<Graph> part(dataset.graphs.begin() + static_cast<std::ptrdiff_t>(begin),
                            dataset.graphs.begin() + static_cast<std::ptrdiff_t>(end));
    const Tensor emb = encode_graphs(params, batch_graphs(part));
    for (std::size_t i = 0; i < emb.rows(); ++i)
      for (std::size_t j = 0; j < hidden; ++j) out(begin + i, j) = emb(i, j);
  }
  return out;
}

std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels, int num_classes,
                                               int folds, Rng& rng) {
  if (folds < 2) throw std::invalid_argument("stratified_folds: folds must be >= 2");
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw std::invalid_argument("stratified_folds: label out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  for (int c = 0; c < num_classes; ++c)
    if (by_class[static_cast<std::size_t>(c)].size() < 2)
      throw std::invalid_argument("stratified_folds: class " + std::to_string(c) +
                                  " has fewer than 2 instances, cannot stratify");

  std::vector<std::vector<int>> fold_sets(static_cast<std::size_t>(folds));
  for (int c = 0; c < num_classes; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    rng.shuffle(members);
    // Start fold rotates with the class so remainders spread across folds.
    for (std::size_t k = 0; k < members.size(); ++k)
      fold_sets[(k + static_cast<std::size_t>(c)) % static_cast<std::size_t>(folds)]
          .push_back(members[k]);
  }
  for (auto& f : fold_sets) std::sort(f.begin(), f.end());
  return fold_sets;
}

namespace {

double train_and_score_fold(const Tensor& embeddings, const std::vector<int>& labels,
                            int num_classes, const std::vector<int>& test_idx,
                            const std::vector<bool>& in_test, const ProbeConfig& cfg) {
  const std::size_t dim = embeddings.cols();
  std::vector<int> train_idx;
  train_idx.reserve(labels.size() - test_idx.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!in_test[i]) train_idx.push_back(static_cast<int>(i));

  // Per-column standardization fitted on the training folds; the fixed-step
  // probe is otherwise at the mercy of the embedding scale.
  std::vector<double> mean(dim, 0.0), inv_std(dim, 1.0);
  for (int i : train_idx)
    for (std::size_t j = 0; j < dim; ++j) mean[j] += embeddings(static_cast<std::size_t>(i), j);
  for (std::size_t j = 0; j < dim; ++j) mean[j] /= static_cast<double>(train_idx.size());
  for (std::size_t j = 0; j < dim; ++j) {
    double var = 0.0;
    for (int i : train_idx) {
      const double d = embeddings(static_cast<std::size_t>(i), j) - mean[j];
      var += d * d;
    }
    var /= static_cast<double>(train_idx.size());
    if (var > 0.0) inv_std[j] = 1.0 / std::sqrt(var);
  }
  auto feature = [&](std::size_t i, std::size_t j) {
    return (embeddings(i, j) - mean[j]) * inv_std[j];
  };

  Tensor x_train(train_idx.size(), dim);
  Tensor y_mask(train_idx.size(), static_cast<std::size_t>(num_classes));
  for (std::size_t r = 0; r < train_idx.size(); ++r) {
    const std::size_t i = static_cast<std::size_t>(train_idx[r]);
    for (std::size_t j = 0; j < dim; ++j) x_train(r, j) = feature(i, j);
    y_mask(r, static_cast<std::size_t>(labels[i])) = 1.0;
  }

  Tensor weights(dim, static_cast<std::size_t>(num_classes));
  Tensor bias(1, static_cast<std::size_t>(num_classes));
  const double inv_n = 1.0 / static_cast<double>(train_idx.size());

  for (int it = 0; it < cfg.epochs; ++it) {
    Tape tape;
    Var x = tape.leaf(x_train, false);
    Var w = tape.leaf(weights, true);
    Var b = tape.leaf(bias, true);
    Var logits = tape.add(tape.matmul(x, w), b);
    Var logp = tape.log_softmax_rows(logits);
    Var picked = tape.multiply(logp, tape.leaf(y_mask, false));
    Var nll = tape.scalar_mul(tape.sum(picked), -inv_n);
    Var penalty = tape.scalar_mul(tape.sum(tape.pow(w, 2.0)), cfg.l2);
    Var loss = tape.add(nll, penalty);
    tape.backward(loss);
    const Tensor gw = tape.grad(w);
    const Tensor gb = tape.grad(b);
    for (std::size_t k = 0; k < weights.size(); ++k) weights[k] -= cfg.learning_rate * gw[k];
    for (std::size_t k = 0; k < bias.size(); ++k) bias[k] -= cfg.learning_rate * gb[k];
  }

  int correct = 0;
  for (int i : test_idx) {
    const std::size_t row = static_cast<std::size_t>(i);
    int best = 0;
    double best_score = 0.0;
    for (int c = 0; c < num_classes; ++c) {
      double score = bias(0, static_cast<std::size_t>(c));
      for (std::size_t j = 0; j < dim; ++j)
        score += feature(row, j) * weights(j, static_cast<std::size_t>(c));
      if (c == 0 || score > best_score) {
        best = c;
        best_score = score;
      }
    }
    if (best == labels[row]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_idx.size());
}

}  // namespace

EvalReport linear_probe(const Tensor& embeddings, const std::vector<int>& labels,
                        int num_classes, const ProbeConfig& cfg) {
  if (embeddings.rows() != labels.size())
    throw std::invalid_argument("linear_probe: row/label count mismatch");
  if (cfg.folds < 2) throw std::invalid_argument("linear_probe: folds must be >= 2");
  if (cfg.repeats < 1) throw std::invalid_argument("linear_probe: repeats must be >= 1");
  std::vector<bool> present(static_cast<std::size_t>(num_classes), false);
  for (int l : labels) present[static_cast<std::size_t>(l)] = true;
  if (std::count(present.begin(), present.end(), true) < 2)
    throw std::invalid_argument("linear_probe: need at least 2 classes present");

  EvalReport report;
  for (int r = 0; r < cfg.repeats; ++r) {
    Rng rng = Rng::from_keys(cfg.seed, {0xEu, static_cast<std::uint64_t>(r)});
    const auto folds = stratified_folds(labels, num_classes, cfg.folds, rng);
    double acc_sum = 0.0;
    int scored = 0;
    for (const auto& test_idx : folds) {
      if (test_idx.empty()) continue;  // more folds than samples
      std::vector<bool> in_test(labels.size(), false);
      for (int i : test_idx) in_test[static_cast<std::size_t>(i)] = true;
      acc_sum += train_and_score_fold(embeddings, labels, num_classes, test_idx, in_test, cfg);
      ++scored;
    }
    report.per_repeat.push_back(acc_sum / static_cast<double>(scored));
  }

  double mean = 0.0;
  for (double a : report.per_repeat) mean += a;
  mean /= static_cast<double>(report.per_repeat.size());
  double var = 0.0;
  for (double a : report.per_repeat) var += (a - mean) * (a - mean);
  var /= static_cast<double>(report.per_repeat.size());  // population std
  report.accuracy_mean = mean;
  report.accuracy_std = std::sqrt(var);
  return report;
}

}  // namespace graphssl
