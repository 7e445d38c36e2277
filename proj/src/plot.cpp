#include "macaac/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "macaac/errors.hpp"

namespace macaac {

namespace fs = std::filesystem;

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw SchemaError("missing column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

}  // namespace

Table read_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw SchemaError("cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw SchemaError(path.string() + ": missing header");
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields");
    }
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const char* b = cells[i].data();
      const char* e = b + cells[i].size();
      auto r = std::from_chars(b, e, row[i]);
      if (r.ec != std::errc{} || r.ptr != e) {
        throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": column '" + t.header[i] +
                          "' is not numeric");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string render_svg(const ChartSpec& spec, const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, left = 70, right = 160, top = 40, bottom = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (spec.y_from_zero && y0 > 0) y0 = 0;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << spec.title
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = y0 + (y1 - y0) * k / 4.0, xv = x0 + (x1 - x0) * k / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv
       << "</text>\n";
    os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << xv
       << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
     << spec.x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << top + ph / 2 << ")\">" << spec.y_label << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % 10];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      os << px(series[s].x[k]) << ',' << py(series[s].y[k]) << ' ';
    }
    os << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - right + 30
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - right + 35 << "\" y=\"" << ly << "\">" << series[s].label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

struct Chart {
  std::string stem;
  ChartSpec spec;
  std::string x_name;
  std::vector<Series> series;  // all series share x
};

std::string chart_csv(const Chart& c) {
  std::ostringstream os;
  os << std::setprecision(17) << c.x_name;
  for (const auto& s : c.series) os << ',' << s.label;
  os << '\n';
  const std::size_t n = c.series.empty() ? 0 : c.series.front().x.size();
  for (std::size_t k = 0; k < n; ++k) {
    os << c.series.front().x[k];
    for (const auto& s : c.series) os << ',' << s.y[k];
    os << '\n';
  }
  return os.str();
}

}  // namespace

std::vector<fs::path> plot_run(const fs::path& run_dir, fs::path out_dir) {
  if (out_dir.empty()) out_dir = run_dir / "plots";
  const Table metrics = read_csv(run_dir / "metrics.csv");
  const std::size_t ep_col = metrics.column("episode");
  const std::size_t cost_col = metrics.column("mean_total_cost");
  std::vector<std::size_t> pen_cols;
  for (std::size_t i = 0; i < metrics.header.size(); ++i) {
    if (metrics.header[i].rfind("mean_total_penalty_", 0) == 0) pen_cols.push_back(i);
  }
  if (pen_cols.empty()) throw SchemaError("missing column 'mean_total_penalty_1'");
  if (metrics.rows.empty()) throw SchemaError("metrics.csv has no rows; nothing to plot");

  std::vector<Chart> charts;
  auto col = [](const Table& t, std::size_t c) {
    std::vector<double> v;
    for (const auto& r : t.rows) v.push_back(r[c]);
    return v;
  };
  const auto episodes = col(metrics, ep_col);
  charts.push_back({"cost", {"Mean total cost", "episode", "cost"}, "episode",
                    {{"mean_total_cost", episodes, col(metrics, cost_col)}}});
  for (std::size_t k = 0; k < pen_cols.size(); ++k) {
    const std::string j = std::to_string(k + 1);
    charts.push_back({"penalty_" + j, {"Mean total penalty " + j, "episode", "penalty", true}, "episode",
                      {{metrics.header[pen_cols[k]], episodes, col(metrics, pen_cols[k])}}});
  }

  if (fs::exists(run_dir / "lambda.csv")) {
    const Table lam = read_csv(run_dir / "lambda.csv");
    const std::size_t it = lam.column("iteration"), jc = lam.column("j"), lc = lam.column("lambda");
    std::map<int, Series> by_j;
    for (const auto& r : lam.rows) {
      auto& s = by_j[static_cast<int>(r[jc])];
      s.label = "lambda_" + std::to_string(static_cast<int>(r[jc]));
      s.x.push_back(r[it]);
      s.y.push_back(r[lc]);
    }
    for (auto& [j, s] : by_j) {
      charts.push_back({"lambda_" + std::to_string(j),
                        {"Lagrange multiplier " + std::to_string(j), "update", "lambda", true},
                        "iteration", {std::move(s)}});
    }
  }

  if (fs::exists(run_dir / "attention.csv")) {
    const Table att = read_csv(run_dir / "attention.csv");
    const std::size_t it = att.column("iteration"), cc = att.column("critic_id"),
                      ic = att.column("agent_i"), jc = att.column("agent_j"), wc = att.column("weight");
    att.column("head");
    // (critic, i) -> j -> iteration -> (sum over heads, head count)
    std::map<std::pair<int, int>, std::map<int, std::map<double, std::pair<double, int>>>> acc;
    for (const auto& r : att.rows) {
      auto& cell = acc[{static_cast<int>(r[cc]), static_cast<int>(r[ic])}][static_cast<int>(r[jc])][r[it]];
      cell.first += r[wc];
      cell.second += 1;
    }
    for (auto& [key, by_j] : acc) {
      const auto [c, i] = key;
      Chart ch;
      ch.stem = "attention_critic" + std::to_string(c) + "_agent" + std::to_string(i);
      ch.spec = {"Attention of agent " + std::to_string(i) + (c == 0 ? ", Lagrangian critic"
                                                                      : ", penalty critic " + std::to_string(c)),
                 "update", "weight (mean over heads)", true};
      ch.x_name = "iteration";
      for (auto& [j, by_it] : by_j) {
        Series s;
        s.label = "agent_" + std::to_string(j);
        for (auto& [x, sw] : by_it) {
          s.x.push_back(x);
          s.y.push_back(sw.first / sw.second);
        }
        ch.series.push_back(std::move(s));
      }
      charts.push_back(std::move(ch));
    }
  }

  // Render everything before touching the filesystem.
  std::vector<std::pair<fs::path, std::string>> files;
  for (const auto& c : charts) {
    files.emplace_back(out_dir / (c.stem + ".svg"), render_svg(c.spec, c.series));
    files.emplace_back(out_dir / (c.stem + ".csv"), chart_csv(c));
  }
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const auto& [path, body] : files) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << body;
    written.push_back(path);
  }
  return written;
}

}  // namespace macaac
