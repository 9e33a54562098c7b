#include "graphssl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace graphssl {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string run_record_header() {
  return "dataset,loss,aug_a,aug_b,ratio,batch_size,projector_dim,lambda,mu,nu,p,seed,"
         "accuracy_mean,accuracy_std,final_loss,runtime_s";
}

std::string RunRecord::config_key() const {
  std::ostringstream os;
  os << dataset << '|' << loss << '|' << aug_a << '|' << aug_b << '|' << fmt(ratio) << '|'
     << batch_size << '|' << projector_dim << '|' << fmt(lambda) << '|' << fmt(mu) << '|'
     << fmt(nu) << '|' << fmt(p) << '|' << seed;
  return os.str();
}

std::string run_record_line(const RunRecord& r) {
  std::ostringstream os;
  os << r.dataset << ',' << r.loss << ',' << r.aug_a << ',' << r.aug_b << ',' << fmt(r.ratio)
     << ',' << r.batch_size << ',' << r.projector_dim << ',' << fmt(r.lambda) << ',' << fmt(r.mu)
     << ',' << fmt(r.nu) << ',' << fmt(r.p) << ',' << r.seed << ',' << fmt(r.accuracy_mean) << ','
     << fmt(r.accuracy_std) << ',' << fmt(r.final_loss) << ',' << fmt(r.runtime_s);
  return os.str();
}

RunRecord parse_run_record(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != 16)
    throw std::runtime_error("run record: expected 16 fields, got " + std::to_string(f.size()));
  RunRecord r;
  r.dataset = f[0];
  r.loss = f[1];
  r.aug_a = f[2];
  r.aug_b = f[3];
  r.ratio = std::stod(f[4]);
  r.batch_size = std::stoi(f[5]);
  r.projector_dim = std::stoi(f[6]);
  r.lambda = std::stod(f[7]);
  r.mu = std::stod(f[8]);
  r.nu = std::stod(f[9]);
  r.p = std::stod(f[10]);
  r.seed = std::stoull(f[11]);
  r.accuracy_mean = std::stod(f[12]);
  r.accuracy_std = std::stod(f[13]);
  r.final_loss = std::stod(f[14]);
  r.runtime_s = std::stod(f[15]);
  return r;
}

void append_run_records(const std::vector<RunRecord>& rows, const std::filesystem::path& file) {
  namespace fs = std::filesystem;
  const bool fresh = !fs::exists(file) || fs::file_size(file) == 0;
  std::ofstream out(file, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  if (fresh) out << run_record_header() << "\n";
  for (const RunRecord& r : rows) out << run_record_line(r) << "\n";
}

std::vector<RunRecord> read_run_records(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty run record file " + file.string());
  if (line != run_record_header())
    throw std::runtime_error("bad run record header in " + file.string());
  std::vector<RunRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_run_record(line));
  }
  return rows;
}

void emit_svg_linechart(const std::vector<Series>& series, const std::string& x_label,
                        const std::string& y_label, const std::filesystem::path& out_path) {
  if (series.empty()) throw std::invalid_argument("emit_svg_linechart: no series");
  for (const Series& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size())
      throw std::invalid_argument("emit_svg_linechart: series '" + s.name + "' empty or ragged");
    for (std::size_t i = 1; i < s.x.size(); ++i)
      if (s.x[i] <= s.x[i - 1])
        throw std::invalid_argument("emit_svg_linechart: series '" + s.name +
                                    "' x values not strictly increasing");
  }

  double xmin = series[0].x.front(), xmax = series[0].x.back();
  double ymin = series[0].y[0], ymax = series[0].y[0];
  for (const Series& s : series) {
    xmin = std::min(xmin, s.x.front());
    xmax = std::max(xmax, s.x.back());
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }

  const double width = 640, height = 420;
  const double left = 70, right = 20, top = 20, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const int num_ticks = 5;

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "  <rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "  <line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";

  for (int t = 0; t <= num_ticks; ++t) {
    const double fx = xmin + (xmax - xmin) * t / num_ticks;
    const double fy = ymin + (ymax - ymin) * t / num_ticks;
    out << "  <line x1=\"" << sx(fx) << "\" y1=\"" << top + plot_h << "\" x2=\"" << sx(fx)
        << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << sx(fx) << "\" y=\"" << top + plot_h + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_short(fx) << "</text>\n";
    out << "  <line x1=\"" << left - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << left
        << "\" y2=\"" << sy(fy) << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << left - 8 << "\" y=\"" << sy(fy) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_short(fy) << "</text>\n";
  }
  out << "  <text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "  <text x=\"15\" y=\"" << top + plot_h / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << top + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
    out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << (i ? " " : "") << sx(s.x[i]) << "," << sy(s.y[i]);
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << "  <circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i])
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    // legend
    const double ly = top + 16 + 18 * static_cast<double>(si);
    out << "  <line x1=\"" << left + plot_w - 120 << "\" y1=\"" << ly << "\" x2=\""
        << left + plot_w - 100 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "  <text x=\"" << left + plot_w - 94 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\">" << s.name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace graphssl
