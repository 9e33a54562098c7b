// graphssl: self-supervised graph representation learning toolkit.
//
// Subcommands: fetch | pretrain | eval | ablate | report.

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "graphssl/config.hpp"
#include "graphssl/eval.hpp"
#include "graphssl/report.hpp"
#include "graphssl/trainer.hpp"
#include "graphssl/tudataset.hpp"

namespace {

using namespace graphssl;

// Applies `key = value` config entries to CLI options that were not given on
// the command line (flags override file values).
class ConfigBinder {
 public:
  void bind(CLI::Option* opt, const std::string& key,
            std::function<void(const std::string&)> setter) {
    entries_[key] = {opt, std::move(setter)};
  }

  void apply(const std::map<std::string, std::string>& kv) const {
    for (const auto& [key, value] : kv) {
      const auto it = entries_.find(key);
      if (it == entries_.end()) throw std::runtime_error("config: unknown key '" + key + "'");
      if (it->second.opt != nullptr && it->second.opt->count() > 0) continue;
      it->second.setter(value);
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(const std::string&)> setter;
  };
  std::map<std::string, Entry> entries_;
};

template <typename T>
void parse_into(const std::string& text, T& out, const std::string& key) {
  std::istringstream in(text);
  in >> out;
  if (in.fail() || !in.eof())
    throw std::runtime_error("config: bad value '" + text + "' for key '" + key + "'");
}

struct TrainFlags {
  std::string dataset;
  std::string root = "data";
  std::string config_file;
  std::string loss = "vicreghsic";
  int epochs = 100;
  int batch_size = 128;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int num_layers = 3;
  int hidden_dim = 32;
  int projector_dim = 160;
  double lambda = 25.0, mu = 25.0, nu = 1.0;
  double gamma = 1.0, epsilon = 1e-4, p = 2.0;
  double temperature = 0.5, lambda_bt = 5e-3;
  std::string aug_a = "node-drop";
  std::string aug_b = "subgraph";
  double ratio = 0.2;

  TrainConfig to_train_config() const {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.learning_rate = lr;
    cfg.seed = seed;
    cfg.loss = loss_kind_from_name(loss);
    cfg.loss_params.lambda = lambda;
    cfg.loss_params.mu = mu;
    cfg.loss_params.nu = nu;
    cfg.loss_params.gamma = gamma;
    cfg.loss_params.epsilon = epsilon;
    cfg.loss_params.p = p;
    cfg.loss_params.temperature = temperature;
    cfg.loss_params.lambda_bt = lambda_bt;
    cfg.pool.specs = {{augment_kind_from_name(aug_a), ratio},
                      {augment_kind_from_name(aug_b), ratio}};
    cfg.encoder.num_layers = num_layers;
    cfg.encoder.hidden_dim = hidden_dim;
    cfg.encoder.projector_dim = projector_dim;
    return cfg;
  }
};

struct ProbeFlags {
  int folds = 10;
  int repeats = 5;
  int probe_epochs = 200;
  double probe_lr = 0.01;
  double l2 = 1e-3;

  ProbeConfig to_probe_config(std::uint64_t seed) const {
    ProbeConfig cfg;
    cfg.folds = folds;
    cfg.repeats = repeats;
    cfg.epochs = probe_epochs;
    cfg.learning_rate = probe_lr;
    cfg.l2 = l2;
    cfg.seed = seed;
    return cfg;
  }
};

void add_train_options(CLI::App* cmd, TrainFlags& f, ConfigBinder& binder) {
  auto* dataset = cmd->add_option("--dataset", f.dataset, "TU dataset name")->required();
  binder.bind(dataset, "dataset", [&f](const std::string& v) { f.dataset = v; });
  auto* root = cmd->add_option("--root", f.root, "dataset root directory");
  binder.bind(root, "root", [&f](const std::string& v) { f.root = v; });
  cmd->add_option("--config", f.config_file, "flat key = value config file");

  auto bind_num = [&](const char* flag, const char* key, auto& target, const char* help) {
    auto* opt = cmd->add_option(flag, target, help);
    binder.bind(opt, key, [&target, key = std::string(key)](const std::string& v) {
      parse_into(v, target, key);
    });
    return opt;
  };

  auto* loss = cmd->add_option("--loss", f.loss, "vicreg|vicreghsic|hsic|bt|ntxent");
  binder.bind(loss, "loss", [&f](const std::string& v) { f.loss = v; });
  bind_num("--epochs", "epochs", f.epochs, "pre-training epochs");
  bind_num("--batch-size", "batch-size", f.batch_size, "mini-batch size (>= 2)");
  bind_num("--lr", "lr", f.lr, "Adam learning rate");
  bind_num("--seed", "seed", f.seed, "root seed");
  bind_num("--num-layers", "num-layers", f.num_layers, "message-passing layers");
  bind_num("--hidden-dim", "hidden-dim", f.hidden_dim, "encoder width");
  bind_num("--projector-dim", "projector-dim", f.projector_dim, "projection head width");
  bind_num("--lambda", "lambda", f.lambda, "invariance weight");
  bind_num("--mu", "mu", f.mu, "variance weight");
  bind_num("--nu", "nu", f.nu, "covariance weight");
  bind_num("--gamma", "gamma", f.gamma, "target std");
  bind_num("--epsilon", "epsilon", f.epsilon, "variance stabilizer");
  bind_num("--p", "p", f.p, "invariance norm exponent");
  bind_num("--temperature", "temperature", f.temperature, "NT-Xent temperature");
  bind_num("--lambda-bt", "lambda-bt", f.lambda_bt, "Barlow Twins off-diagonal weight");
  auto* aug_a = cmd->add_option("--aug-a", f.aug_a, "first augmentation in the pool");
  binder.bind(aug_a, "aug-a", [&f](const std::string& v) { f.aug_a = v; });
  auto* aug_b = cmd->add_option("--aug-b", f.aug_b, "second augmentation in the pool");
  binder.bind(aug_b, "aug-b", [&f](const std::string& v) { f.aug_b = v; });
  bind_num("--ratio", "ratio", f.ratio, "augmentation strength in [0,1)");
}

void add_probe_options(CLI::App* cmd, ProbeFlags& f, ConfigBinder& binder) {
  auto bind_num = [&](const char* flag, const char* key, auto& target, const char* help) {
    auto* opt = cmd->add_option(flag, target, help);
    binder.bind(opt, key, [&target, key = std::string(key)](const std::string& v) {
      parse_into(v, target, key);
    });
  };
  bind_num("--folds", "folds", f.folds, "stratified folds");
  bind_num("--repeats", "repeats", f.repeats, "evaluation repeats");
  bind_num("--probe-epochs", "probe-epochs", f.probe_epochs, "probe training epochs");
  bind_num("--probe-lr", "probe-lr", f.probe_lr, "probe learning rate");
  bind_num("--l2", "l2", f.l2, "probe l2 penalty");
}

void apply_config_file(const std::string& path, const ConfigBinder& binder) {
  if (path.empty()) return;
  binder.apply(load_config_file(path));
}

std::string resolve_base_url(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("GRAPHSSL_TU_URL"); env != nullptr && *env != '\0')
    return env;
  return TuSourceConfig{}.base_url;
}

Dataset load_or_hint(const std::string& root, const std::string& name) {
  if (!tu_files_present(std::filesystem::path(root) / name, name))
    throw std::runtime_error("dataset '" + name + "' not found under " + root +
                             "; run `graphssl fetch --dataset " + name + "` first");
  return load_tudataset({root, "", name});
}

RunRecord make_record(const TrainFlags& f, const TrainResult& train, const EvalReport& eval) {
  RunRecord r;
  r.dataset = f.dataset;
  r.loss = f.loss;
  r.aug_a = f.aug_a;
  r.aug_b = f.aug_b;
  r.ratio = f.ratio;
  r.batch_size = f.batch_size;
  r.projector_dim = f.projector_dim;
  r.lambda = f.lambda;
  r.mu = f.mu;
  r.nu = f.nu;
  r.p = f.p;
  r.seed = f.seed;
  r.accuracy_mean = eval.accuracy_mean;
  r.accuracy_std = eval.accuracy_std;
  r.final_loss = train.loss_history.empty() ? 0.0 : train.loss_history.back();
  r.runtime_s = train.wall_time_s;
  return r;
}

// --- ablate ------------------------------------------------------------------

struct AxisValues {
  std::string axis;
  std::vector<std::string> values;
};

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void apply_axis_value(TrainFlags& f, const std::string& axis, const std::string& value) {
  if (axis == "p") {
    parse_into(value, f.p, axis);
  } else if (axis == "lambda-mu") {
    parse_into(value, f.lambda, axis);
    f.mu = f.lambda;
  } else if (axis == "lambda") {
    parse_into(value, f.lambda, axis);
  } else if (axis == "mu") {
    parse_into(value, f.mu, axis);
  } else if (axis == "nu") {
    parse_into(value, f.nu, axis);
  } else if (axis == "batch-size") {
    parse_into(value, f.batch_size, axis);
  } else if (axis == "projector-dim") {
    parse_into(value, f.projector_dim, axis);
  } else if (axis == "ratio") {
    parse_into(value, f.ratio, axis);
  } else if (axis == "aug-pair") {
    const std::size_t colon = value.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("aug-pair value must look like node-drop:subgraph");
    f.aug_a = value.substr(0, colon);
    f.aug_b = value.substr(colon + 1);
  } else {
    throw std::runtime_error("unknown ablation axis '" + axis + "'");
  }
}

int run_ablate(const TrainFlags& base, const ProbeFlags& probe,
               const std::vector<AxisValues>& axes, const std::string& runs_file, int jobs) {
  // Cartesian product over the declared axes.
  std::vector<TrainFlags> cells = {base};
  for (const AxisValues& ax : axes) {
    std::vector<TrainFlags> next;
    for (const TrainFlags& cell : cells)
      for (const std::string& v : ax.values) {
        TrainFlags modified = cell;
        apply_axis_value(modified, ax.axis, v);
        next.push_back(std::move(modified));
      }
    cells = std::move(next);
  }

  const Dataset dataset = load_or_hint(base.root, base.dataset);
  std::vector<RunRecord> rows(cells.size());
  std::atomic<std::size_t> cursor{0};
  std::mutex io_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) return;
      const TrainFlags& f = cells[i];
      const TrainResult train = pretrain(dataset, f.to_train_config());
      const Tensor embeddings = embed_all(train.params, dataset);
      std::vector<int> labels;
      for (const Graph& g : dataset.graphs) labels.push_back(g.label);
      const EvalReport eval =
          linear_probe(embeddings, labels, dataset.num_classes, probe.to_probe_config(f.seed));
      rows[i] = make_record(f, train, eval);
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cout << "ablate cell " << i + 1 << "/" << cells.size() << ": " << rows[i].config_key()
                << " accuracy=" << eval.accuracy_mean << "\n";
    }
  };

  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> threads;
  for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::sort(rows.begin(), rows.end(), [](const RunRecord& a, const RunRecord& b) {
    return a.config_key() < b.config_key();
  });
  append_run_records(rows, runs_file);
  std::cout << "wrote " << rows.size() << " run record(s) to " << runs_file << "\n";
  return 0;
}

// --- report ------------------------------------------------------------------

double axis_value_of(const RunRecord& r, const std::string& axis) {
  if (axis == "p") return r.p;
  if (axis == "lambda-mu" || axis == "lambda") return r.lambda;
  if (axis == "mu") return r.mu;
  if (axis == "nu") return r.nu;
  if (axis == "batch-size") return r.batch_size;
  if (axis == "projector-dim") return r.projector_dim;
  if (axis == "ratio") return r.ratio;
  throw std::runtime_error("unknown report axis '" + axis + "'");
}

int run_report(const std::string& in_file, const std::string& axis, const std::string& dataset,
               const std::string& out_file) {
  const auto rows = read_run_records(in_file);
  // One series per loss; duplicate x values average (e.g. repeated seeds).
  std::map<std::string, std::map<double, std::pair<double, int>>> grouped;
  for (const RunRecord& r : rows) {
    if (!dataset.empty() && r.dataset != dataset) continue;
    auto& slot = grouped[r.loss][axis_value_of(r, axis)];
    slot.first += r.accuracy_mean;
    slot.second += 1;
  }
  if (grouped.empty()) throw std::runtime_error("report: no matching rows in " + in_file);
  std::vector<Series> series;
  for (const auto& [loss, points] : grouped) {
    Series s;
    s.name = loss;
    for (const auto& [x, acc] : points) {
      s.x.push_back(x);
      s.y.push_back(acc.first / acc.second);
    }
    series.push_back(std::move(s));
  }
  emit_svg_linechart(series, axis, "linear evaluation accuracy", out_file);
  std::cout << "wrote " << out_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph self-supervised learning toolkit"};
  app.require_subcommand(1);

  // fetch -----------------------------------------------------------------
  std::string fetch_name, fetch_root = "data", fetch_url, fetch_config;
  ConfigBinder fetch_binder;
  auto* fetch_cmd = app.add_subcommand("fetch", "download and unpack a TU corpus");
  auto* fn = fetch_cmd->add_option("--dataset", fetch_name, "TU dataset name")->required();
  fetch_binder.bind(fn, "dataset", [&fetch_name](const std::string& v) { fetch_name = v; });
  auto* fr = fetch_cmd->add_option("--root", fetch_root, "dataset root directory");
  fetch_binder.bind(fr, "root", [&fetch_root](const std::string& v) { fetch_root = v; });
  auto* fu = fetch_cmd->add_option("--base-url", fetch_url, "archive base URL");
  fetch_binder.bind(fu, "base-url", [&fetch_url](const std::string& v) { fetch_url = v; });
  fetch_cmd->add_option("--config", fetch_config, "flat key = value config file");

  // pretrain --------------------------------------------------------------
  TrainFlags pre;
  ConfigBinder pre_binder;
  std::string out_checkpoint, out_loss_csv;
  auto* pre_cmd = app.add_subcommand("pretrain", "self-supervised pre-training");
  add_train_options(pre_cmd, pre, pre_binder);
  pre_cmd->add_option("--out-checkpoint", out_checkpoint, "checkpoint path");
  pre_cmd->add_option("--out-loss-csv", out_loss_csv, "loss history CSV path");

  // eval --------------------------------------------------------------------
  TrainFlags ev;
  ProbeFlags ev_probe;
  ConfigBinder ev_binder;
  std::string ev_checkpoint, ev_runs = "runs.csv";
  auto* ev_cmd = app.add_subcommand("eval", "linear evaluation of a checkpoint");
  add_train_options(ev_cmd, ev, ev_binder);
  add_probe_options(ev_cmd, ev_probe, ev_binder);
  ev_cmd->add_option("--checkpoint", ev_checkpoint, "trained checkpoint")->required();
  ev_cmd->add_option("--runs", ev_runs, "run record CSV to append to");

  // ablate ------------------------------------------------------------------
  TrainFlags ab;
  ProbeFlags ab_probe;
  ConfigBinder ab_binder;
  std::vector<std::string> ab_axes, ab_values;
  std::string ab_runs = "runs.csv";
  int ab_jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* ab_cmd = app.add_subcommand("ablate", "sweep config axes, one run record per cell");
  add_train_options(ab_cmd, ab, ab_binder);
  add_probe_options(ab_cmd, ab_probe, ab_binder);
  ab_cmd->add_option("--axis", ab_axes,
                     "axis name: p|lambda-mu|lambda|mu|nu|batch-size|projector-dim|ratio|aug-pair")
      ->required();
  ab_cmd->add_option("--values", ab_values, "comma-separated values, one list per --axis")
      ->required();
  ab_cmd->add_option("--runs", ab_runs, "run record CSV to append to");
  ab_cmd->add_option("--jobs", ab_jobs, "worker pool size");

  // report ------------------------------------------------------------------
  std::string rep_in, rep_axis, rep_dataset, rep_out = "report.svg";
  auto* rep_cmd = app.add_subcommand("report", "render accuracy vs axis as SVG");
  rep_cmd->add_option("--in", rep_in, "run record CSV")->required();
  rep_cmd->add_option("--axis", rep_axis, "x axis column")->required();
  rep_cmd->add_option("--dataset", rep_dataset, "filter by dataset");
  rep_cmd->add_option("--out", rep_out, "output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (*fetch_cmd) {
      // Precedence: flag > GRAPHSSL_TU_URL > config file > built-in default.
      std::string url = resolve_base_url(fetch_url);
      if (!fetch_config.empty()) {
        const bool url_unset = fetch_url.empty() && std::getenv("GRAPHSSL_TU_URL") == nullptr;
        fetch_binder.apply(load_config_file(fetch_config));
        if (url_unset && !fetch_url.empty()) url = fetch_url;
      }
      TuSourceConfig cfg{fetch_root, url, fetch_name};
      const auto dir = fetch_dataset(cfg);
      std::cout << "dataset ready at " << dir.string() << "\n";
      return 0;
    }
    if (*pre_cmd) {
      apply_config_file(pre.config_file, pre_binder);
      const Dataset dataset = load_or_hint(pre.root, pre.dataset);
      const TrainResult result = pretrain(dataset, pre.to_train_config());
      const std::string ckpt = out_checkpoint.empty() ? pre.dataset + ".ckpt" : out_checkpoint;
      const std::string loss_csv =
          out_loss_csv.empty() ? pre.dataset + "_loss.csv" : out_loss_csv;
      save_checkpoint(result.params, ckpt);
      write_loss_history_csv(result.loss_history, loss_csv);
      std::cout << "pretrained " << pre.dataset << " with " << pre.loss << " for " << pre.epochs
                << " epochs; final mean loss " << result.loss_history.back() << "\n"
                << "checkpoint: " << ckpt << "\nloss history: " << loss_csv << "\n";
      return 0;
    }
    if (*ev_cmd) {
      apply_config_file(ev.config_file, ev_binder);
      const Dataset dataset = load_or_hint(ev.root, ev.dataset);
      const ModelParams params = load_checkpoint(ev_checkpoint);
      const Tensor embeddings = embed_all(params, dataset);
      std::vector<int> labels;
      for (const Graph& g : dataset.graphs) labels.push_back(g.label);
      const EvalReport report =
          linear_probe(embeddings, labels, dataset.num_classes, ev_probe.to_probe_config(ev.seed));
      TrainResult shell;  // only the record's config fields come from flags
      RunRecord row = make_record(ev, shell, report);
      append_run_records({row}, ev_runs);
      std::cout << "accuracy " << report.accuracy_mean << " +/- " << report.accuracy_std
                << " (appended to " << ev_runs << ")\n";
      return 0;
    }
    if (*ab_cmd) {
      apply_config_file(ab.config_file, ab_binder);
      if (ab_axes.size() != ab_values.size())
        throw std::runtime_error("ablate: each --axis needs a matching --values list");
      std::vector<AxisValues> axes;
      for (std::size_t i = 0; i < ab_axes.size(); ++i) {
        AxisValues ax{ab_axes[i], split_csv_list(ab_values[i])};
        if (ax.values.empty()) throw std::runtime_error("ablate: empty --values list");
        axes.push_back(std::move(ax));
      }
      return run_ablate(ab, ab_probe, axes, ab_runs, ab_jobs);
    }
    if (*rep_cmd) return run_report(rep_in, rep_axis, rep_dataset, rep_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
