#include "graphssl/encoder.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "graphssl/rng.hpp"

namespace graphssl {

namespace {

constexpr const char* kCheckpointMagic = "GRAPHSSL-CKPT-1";

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w(fan_in, fan_out);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = (rng.uniform01() * 2.0 - 1.0) * a;
  return w;
}

}  // namespace

const Tensor& ModelParams::tensor(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return tensors[i];
  throw std::invalid_argument("ModelParams: no tensor named " + name);
}

ModelParams init_params(const EncoderConfig& cfg, int feature_dim, std::uint64_t seed) {
  if (cfg.num_layers < 1 || cfg.hidden_dim < 1 || cfg.projector_dim < 1 || feature_dim < 1)
    throw std::invalid_argument("init_params: dimensions must be positive");
  ModelParams p;
  p.cfg = cfg;
  p.feature_dim = feature_dim;
  p.seed = seed;
  Rng rng = Rng::from_keys(seed, {0x1417});
  const std::size_t hidden = static_cast<std::size_t>(cfg.hidden_dim);
  const std::size_t proj = static_cast<std::size_t>(cfg.projector_dim);
  for (int layer = 0; layer < cfg.num_layers; ++layer) {
    const std::size_t in = layer == 0 ? static_cast<std::size_t>(feature_dim) : hidden;
    const std::string prefix = "enc" + std::to_string(layer) + ".";
    p.names.push_back(prefix + "w1");
    p.tensors.push_back(glorot(in, hidden, rng));
    p.names.push_back(prefix + "b1");
    p.tensors.push_back(Tensor(1, hidden));
    p.names.push_back(prefix + "w2");
    p.tensors.push_back(glorot(hidden, hidden, rng));
    p.names.push_back(prefix + "b2");
    p.tensors.push_back(Tensor(1, hidden));
  }
  p.names.push_back("proj.w1");
  p.tensors.push_back(glorot(hidden, proj, rng));
  p.names.push_back("proj.b1");
  p.tensors.push_back(Tensor(1, proj));
  p.names.push_back("proj.w2");
  p.tensors.push_back(glorot(proj, proj, rng));
  p.names.push_back("proj.b2");
  p.tensors.push_back(Tensor(1, proj));
  return p;
}

std::vector<Var> param_vars(Tape& tape, const ModelParams& params, bool requires_grad) {
  std::vector<Var> vars;
  vars.reserve(params.tensors.size());
  for (const Tensor& t : params.tensors) vars.push_back(tape.leaf(t, requires_grad));
  return vars;
}

Var encode(Tape& tape, const std::vector<Var>& vars, const EncoderConfig& cfg,
           const GraphBatch& batch) {
  if (static_cast<int>(vars.size()) != cfg.num_layers * 4 + 4)
    throw std::invalid_argument("encode: parameter count mismatch");
  Var h = tape.leaf(batch.node_features, false);
  for (int layer = 0; layer < cfg.num_layers; ++layer) {
    const std::size_t base = static_cast<std::size_t>(layer) * 4;
    Var agg = tape.aggregate_neighbors(h, batch.directed_edges);
    Var mixed = tape.add(h, agg);
    Var z1 = tape.add(tape.matmul(mixed, vars[base + 0]), vars[base + 1]);
    Var a1 = tape.relu(z1);
    h = tape.add(tape.matmul(a1, vars[base + 2]), vars[base + 3]);
  }
  return tape.segment_mean(h, batch.node_to_graph, batch.batch_size);
}

Var project(Tape& tape, const std::vector<Var>& vars, const EncoderConfig& cfg, Var embeddings) {
  const std::size_t base = static_cast<std::size_t>(cfg.num_layers) * 4;
  if (vars.size() != base + 4) throw std::invalid_argument("project: parameter count mismatch");
  Var z1 = tape.add(tape.matmul(embeddings, vars[base + 0]), vars[base + 1]);
  Var a1 = tape.relu(z1);
  return tape.add(tape.matmul(a1, vars[base + 2]), vars[base + 3]);
}

Tensor encode_graphs(const ModelParams& params, const GraphBatch& batch) {
  Tape tape;
  std::vector<Var> vars = param_vars(tape, params, false);
  return tape.value(encode(tape, vars, params.cfg, batch));
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + file.string());
  out << kCheckpointMagic << "\n";
  out << "num_layers " << params.cfg.num_layers << "\n";
  out << "hidden_dim " << params.cfg.hidden_dim << "\n";
  out << "projector_dim " << params.cfg.projector_dim << "\n";
  out << "feature_dim " << params.feature_dim << "\n";
  out << "seed " << params.seed << "\n";
  out << "entries " << params.count() << "\n";
  char buf[64];
  for (std::size_t i = 0; i < params.count(); ++i) {
    const Tensor& t = params.tensors[i];
    out << params.names[i] << " " << t.rows() << " " << t.cols() << "\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", t[k]);
      out << buf << (k + 1 == t.size() ? "" : " ");
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + file.string());
}

ModelParams load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + file.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kCheckpointMagic)
    throw std::runtime_error("checkpoint: bad magic in " + file.string());
  ModelParams p;
  std::string key;
  std::size_t entries = 0;
  for (int i = 0; i < 6; ++i) {
    in >> key;
    if (key == "num_layers")
      in >> p.cfg.num_layers;
    else if (key == "hidden_dim")
      in >> p.cfg.hidden_dim;
    else if (key == "projector_dim")
      in >> p.cfg.projector_dim;
    else if (key == "feature_dim")
      in >> p.feature_dim;
    else if (key == "seed")
      in >> p.seed;
    else if (key == "entries")
      in >> entries;
    else
      throw std::runtime_error("checkpoint: unexpected header key " + key);
  }
  for (std::size_t e = 0; e < entries; ++e) {
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols))
      throw std::runtime_error("checkpoint: truncated entry header");
    Tensor t(rows, cols);
    for (std::size_t k = 0; k < t.size(); ++k)
      if (!(in >> t[k])) throw std::runtime_error("checkpoint: truncated values for " + name);
    p.names.push_back(name);
    p.tensors.push_back(std::move(t));
  }
  return p;
}

}  // namespace graphssl
