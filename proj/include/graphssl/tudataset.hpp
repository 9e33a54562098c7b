#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphssl/graph.hpp"

namespace graphssl {

struct TuSourceConfig {
  std::filesystem::path root_dir = "data";
  std::string base_url = "https://www.chrsmrrs.com/graphkerneldatasets";
  std::string dataset_name;
};

// The flat-file corpus exactly as read from disk (1-based ids, directed
// duplicate edges, raw label values). Kept so fixtures can round-trip
// through write_tu_corpus without loss.
struct TuRawCorpus {
  std::vector<std::pair<int, int>> edges;  // 1-based node ids, as listed in _A.txt
  std::vector<int> graph_indicator;        // 1-based graph id per node
  std::vector<int> graph_labels;           // raw values, one per graph
  std::optional<std::vector<int>> node_labels;
  std::optional<std::vector<std::vector<double>>> node_attributes;
};

// Reads `{name}_A.txt`, `{name}_graph_indicator.txt`, `{name}_graph_labels.txt`
// and the optional node label/attribute files from `dir`.
TuRawCorpus parse_tu_corpus(const std::filesystem::path& dir, const std::string& name);

// Writes the corpus back in the flat format (fields separated by ", ").
void write_tu_corpus(const TuRawCorpus& raw, const std::filesystem::path& dir,
                     const std::string& name);

// Builds the in-memory Dataset: features are one-hot node labels concatenated
// with attributes when present, else a degree one-hot capped at the corpus
// maximum degree; graph labels remapped densely by ascending original value;
// duplicate directed edge pairs collapsed to one undirected edge.
Dataset build_dataset(const TuRawCorpus& raw, const std::string& name);

Dataset load_tudataset(const TuSourceConfig& cfg);

// Downloads `{base_url}/{name}.zip` and unpacks it under root_dir; idempotent
// when the mandatory files already exist. Returns the dataset directory.
std::filesystem::path fetch_dataset(const TuSourceConfig& cfg);

// True when the three mandatory files are present in dir.
bool tu_files_present(const std::filesystem::path& dir, const std::string& name);

}  // namespace graphssl
