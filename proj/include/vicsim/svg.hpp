#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace vicsim {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool scatter = false;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "x";
  std::string y_label = "y";
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 480;
};

// Minimal SVG line/scatter plot; enough to eyeball logs and sweep results.
inline void write_svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt,
                           const std::string& path) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;

  auto tx = [&](double v) { return opt.log_x ? std::log10(std::max(v, 1e-12)) : v; };
  auto ty = [&](double v) { return opt.log_y ? std::log10(std::max(v, 1e-12)) : v; };

  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double xpad = 0.05 * (x1 - x0), ypad = 0.05 * (y1 - y0);
  x0 -= xpad; x1 += xpad; y0 -= ypad; y1 += ypad;

  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return mt + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_svg_plot: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << " " << opt.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << opt.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << opt.title << "</text>\n";
  out << "<text x=\"" << opt.width / 2 << "\" y=\"" << opt.height - 10
      << "\" text-anchor=\"middle\" font-size=\"12\">" << opt.x_label << "</text>\n";
  out << "<text x=\"15\" y=\"" << opt.height / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 "
      << opt.height / 2 << ")\">" << opt.y_label << "</text>\n";
  // Corner tick labels.
  auto fmt = [&](double v, bool logscale) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", logscale ? std::pow(10.0, v) : v);
    return std::string(buf);
  };
  out << "<text x=\"" << ml << "\" y=\"" << mt + ph + 15 << "\" font-size=\"10\">"
      << fmt(x0, opt.log_x) << "</text>\n";
  out << "<text x=\"" << ml + pw << "\" y=\"" << mt + ph + 15
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(x1, opt.log_x) << "</text>\n";
  out << "<text x=\"" << ml - 5 << "\" y=\"" << mt + ph
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(y0, opt.log_y) << "</text>\n";
  out << "<text x=\"" << ml - 5 << "\" y=\"" << mt + 10
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(y1, opt.log_y) << "</text>\n";

  int ci = 0;
  double legend_y = mt + 14;
  for (const auto& s : series) {
    const char* color = colors[ci % 10];
    if (s.scatter) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
            << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << px(s.x[i]) << "," << py(s.y[i]) << " ";
      out << "\"/>\n";
    }
    if (!s.label.empty()) {
      out << "<rect x=\"" << ml + pw - 150 << "\" y=\"" << legend_y - 9
          << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
      out << "<text x=\"" << ml + pw - 135 << "\" y=\"" << legend_y << "\" font-size=\"11\">"
          << s.label << "</text>\n";
      legend_y += 16;
    }
    ++ci;
  }
  out << "</svg>\n";
}

}  // namespace vicsim
