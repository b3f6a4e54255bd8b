#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dra {

// One sweep cell of the precision-recall simulation.
struct TradeoffRow {
  int m = 0;
  double r_V = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_beta = 0.0;
  bool is_rv_star = false;
  bool is_fbeta_argmax = false;
};

inline void write_tradeoff_csv(const std::vector<TradeoffRow>& table, std::ostream& out) {
  out << "m,r_V,precision,recall,f_beta,is_rv_star,is_fbeta_argmax\n";
  out << std::setprecision(17);
  for (const TradeoffRow& r : table)
    out << r.m << ',' << r.r_V << ',' << r.precision << ',' << r.recall << ',' << r.f_beta
        << ',' << (r.is_rv_star ? 1 : 0) << ',' << (r.is_fbeta_argmax ? 1 : 0) << '\n';
}

inline std::vector<TradeoffRow> read_tradeoff_csv(std::istream& in) {
  std::vector<TradeoffRow> table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty tradeoff CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw std::runtime_error("bad tradeoff CSV row");
    TradeoffRow r;
    r.m = std::stoi(cells[0]);
    r.r_V = std::stod(cells[1]);
    r.precision = std::stod(cells[2]);
    r.recall = std::stod(cells[3]);
    r.f_beta = std::stod(cells[4]);
    r.is_rv_star = cells[5] == "1";
    r.is_fbeta_argmax = cells[6] == "1";
    table.push_back(r);
  }
  return table;
}

enum class PlotKind { kPrCurve, kBoundCurve };

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline const char* series_color(std::size_t idx) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[idx % 10];
}

}  // namespace detail

// Deterministic standalone SVG: one axis pair, one labeled polyline per m,
// a filled marker at the lower-bound optimum and a ring at the f-beta
// argmax. pr-curve plots precision against recall; bound-curve plots
// f-beta against r_V.
inline void emit_plot(const std::vector<TradeoffRow>& table, PlotKind kind,
                      const std::string& path) {
  if (table.empty()) throw std::invalid_argument("emit_plot: empty table");

  const double width = 720.0, height = 480.0;
  const double ml = 70.0, mr = 140.0, mt = 30.0, mb = 55.0;
  auto value_x = [&](const TradeoffRow& r) {
    return kind == PlotKind::kPrCurve ? r.recall : r.r_V;
  };
  auto value_y = [&](const TradeoffRow& r) {
    return kind == PlotKind::kPrCurve ? r.precision : r.f_beta;
  };

  double xmin = value_x(table[0]), xmax = xmin, ymin = value_y(table[0]), ymax = ymin;
  for (const TradeoffRow& r : table) {
    xmin = std::min(xmin, value_x(r));
    xmax = std::max(xmax, value_x(r));
    ymin = std::min(ymin, value_y(r));
    ymax = std::max(ymax, value_y(r));
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

  std::map<int, std::vector<const TradeoffRow*>> series;
  for (const TradeoffRow& r : table) series[r.m].push_back(&r);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  // Axes with five ticks each.
  svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4.0;
    const double fy = ymin + (ymax - ymin) * t / 4.0;
    svg << "<line x1=\"" << px(fx) << "\" y1=\"" << height - mb << "\" x2=\"" << px(fx)
        << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(fx) << "\" y=\"" << height - mb + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">" << detail::fmt(fx) << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml << "\" y2=\""
        << py(fy) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << detail::fmt(fy) << "</text>\n";
  }
  const char* xlabel = kind == PlotKind::kPrCurve ? "recall" : "r_V";
  const char* ylabel = kind == PlotKind::kPrCurve ? "precision" : "f_beta";
  svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (mt + height - mb) / 2 << ")\">" << ylabel << "</text>\n";

  std::size_t idx = 0;
  for (const auto& [m, rows] : series) {
    const char* color = detail::series_color(idx);
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const TradeoffRow* r : rows)
      svg << detail::fmt(px(value_x(*r))) << ',' << detail::fmt(py(value_y(*r))) << ' ';
    svg << "\"/>\n";
    for (const TradeoffRow* r : rows) {
      if (r->is_rv_star)
        svg << "<circle cx=\"" << detail::fmt(px(value_x(*r))) << "\" cy=\""
            << detail::fmt(py(value_y(*r))) << "\" r=\"5\" fill=\"" << color << "\"/>\n";
      if (r->is_fbeta_argmax)
        svg << "<circle cx=\"" << detail::fmt(px(value_x(*r))) << "\" cy=\""
            << detail::fmt(py(value_y(*r))) << "\" r=\"7\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
    }
    svg << "<text x=\"" << width - mr + 12 << "\" y=\"" << mt + 16 * (idx + 1)
        << "\" font-size=\"12\" fill=\"" << color << "\">m = " << m << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plot: cannot open " + path);
  out << svg.str();
}

}  // namespace dra
