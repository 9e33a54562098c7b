#include <fstream>
#include <sstream>

#include "doctest.h"
#include "graphssl/config.hpp"
#include "graphssl/report.hpp"
#include "testutil.hpp"

using namespace graphssl;
using graphssl::testing::TempDir;

namespace {

RunRecord sample_record(double p, double acc) {
  RunRecord r;
  r.dataset = "FIX";
  r.loss = "vicreghsic";
  r.aug_a = "node-drop";
  r.aug_b = "subgraph";
  r.ratio = 0.2;
  r.batch_size = 128;
  r.projector_dim = 160;
  r.lambda = 25;
  r.mu = 25;
  r.nu = 1;
  r.p = p;
  r.seed = 1;
  r.accuracy_mean = acc;
  r.accuracy_std = 0.01;
  r.final_loss = 3.25;
  r.runtime_s = 12.5;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("run record CSV round trip") {
  TempDir tmp("runs");
  const auto file = tmp.path() / "runs.csv";
  append_run_records({sample_record(1.0, 0.8), sample_record(2.0, 0.9)}, file);
  append_run_records({sample_record(3.0, 0.85)}, file);  // appends without a second header

  const auto rows = read_run_records(file);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].p == 1.0);
  CHECK(rows[2].p == 3.0);
  CHECK(rows[1].accuracy_mean == 0.9);
  CHECK(rows[0].dataset == "FIX");
  CHECK(rows[0].seed == 1);

  const std::string text = slurp(file);
  CHECK(text.rfind(run_record_header(), 0) == 0);
  CHECK(text.find("dataset,", 10) == std::string::npos);  // single header only
}

TEST_CASE("run record line format is stable") {
  const std::string line = run_record_line(sample_record(2.0, 0.875));
  CHECK(line.rfind("FIX,vicreghsic,node-drop,subgraph,0.2", 0) == 0);
  const RunRecord back = parse_run_record(line);
  CHECK(back.accuracy_mean == 0.875);
  CHECK(back.projector_dim == 160);
  CHECK_THROWS_AS(parse_run_record("a,b,c"), std::runtime_error);
}

TEST_CASE("config keys differ only in measured fields sort together") {
  RunRecord a = sample_record(1.0, 0.8);
  RunRecord b = sample_record(1.0, 0.9);
  b.runtime_s = 99.0;
  CHECK(a.config_key() == b.config_key());
  RunRecord c = sample_record(2.0, 0.8);
  CHECK(a.config_key() != c.config_key());
}

TEST_CASE("svg line chart structure") {
  TempDir tmp("svg");
  const auto file = tmp.path() / "chart.svg";

  SUBCASE("single two-point series has exactly one polyline") {
    emit_svg_linechart({{"acc", {1.0, 2.0}, {0.5, 0.75}}}, "p", "accuracy", file);
    const std::string svg = slurp(file);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    std::size_t count = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
      ++count;
      ++pos;
    }
    CHECK(count == 1);
  }

  SUBCASE("two series produce two legend entries") {
    emit_svg_linechart({{"a", {1, 2}, {3, 4}}, {"b", {1, 2}, {5, 6}}}, "x", "y", file);
    const std::string svg = slurp(file);
    CHECK(svg.find(">a</text>") != std::string::npos);
    CHECK(svg.find(">b</text>") != std::string::npos);
  }

  SUBCASE("non-increasing x is rejected") {
    CHECK_THROWS_WITH_AS(
        emit_svg_linechart({{"a", {2.0, 1.0}, {0.0, 0.0}}}, "x", "y", file),
        doctest::Contains("strictly increasing"), std::invalid_argument);
    CHECK_THROWS_AS(emit_svg_linechart({}, "x", "y", file), std::invalid_argument);
    CHECK_THROWS_AS(emit_svg_linechart({{"a", {}, {}}, {"b", {1}, {1}}}, "x", "y", file),
                    std::invalid_argument);
  }
}

TEST_CASE("flat config parsing") {
  const auto kv = parse_config_text(
      "# experiment defaults\n"
      "dataset = MUTAG\n"
      "batch_size=128\n"
      "  lr   =   0.001  # inline comment\n"
      "\n");
  CHECK(kv.at("dataset") == "MUTAG");
  CHECK(kv.at("batch_size") == "128");
  CHECK(kv.at("lr") == "0.001");
  CHECK(kv.size() == 3);

  CHECK_THROWS_WITH_AS(parse_config_text("not a key value line\n"),
                       doctest::Contains("key = value"), std::runtime_error);
  CHECK_THROWS_AS(parse_config_text("= value\n"), std::runtime_error);
}

TEST_CASE("config file loader") {
  TempDir tmp("cfg");
  const auto file = tmp.path() / "exp.cfg";
  {
    std::ofstream out(file);
    out << "epochs = 100\nseed = 7\n";
  }
  const auto kv = load_config_file(file);
  CHECK(kv.at("epochs") == "100");
  CHECK(kv.at("seed") == "7");
  CHECK_THROWS_AS(load_config_file(tmp.path() / "missing.cfg"), std::runtime_error);
}
