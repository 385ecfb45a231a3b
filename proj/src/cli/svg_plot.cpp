// Two-panel line plot of a partition-resolution table.

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "commands.hpp"

namespace fvkit::cli {

namespace {

using Series = std::vector<std::pair<double, double>>;

struct Panel {
  std::string title;
  std::string xlabel;
  std::vector<std::pair<std::string, Series>> lines;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void draw_panel(std::ostringstream& svg, const Panel& panel, double ox, double oy) {
  constexpr double w = 360, h = 260, pad = 50;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  double xmin = std::numeric_limits<double>::max(), xmax = -xmin, ymax = 0.0;
  for (const auto& [name, s] : panel.lines)
    for (const auto& [x, y] : s) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  if (xmax <= xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.1;
  auto px = [&](double x) { return ox + pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad); };
  auto py = [&](double y) { return oy + h - pad - y / ymax * (h - 2 * pad); };

  svg << "<text x=\"" << ox + w / 2 << "\" y=\"" << oy + 20 << "\" text-anchor=\"middle\">" << panel.title
      << "</text>\n";
  svg << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(0) << "\" x2=\"" << px(xmax) << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(0) << "\" x2=\"" << px(xmin) << "\" y2=\"" << py(ymax)
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << ox + w / 2 << "\" y=\"" << oy + h - 12 << "\" text-anchor=\"middle\">" << panel.xlabel
      << "</text>\n";
  svg << "<text x=\"" << ox + 12 << "\" y=\"" << oy + h / 2 << "\" transform=\"rotate(-90 " << ox + 12 << ' '
      << oy + h / 2 << ")\" text-anchor=\"middle\">d</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = ymax * t / 4.0;
    svg << "<text x=\"" << px(xmin) - 4 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"10\">"
        << num(yv) << "</text>\n";
  }

  int li = 0;
  for (const auto& [name, s] : panel.lines) {
    const char* color = colors[li % 4];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : s) svg << px(x) << ',' << py(y) << ' ';
    svg << "\"/>\n";
    for (const auto& [x, y] : s) {
      svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      svg << "<text x=\"" << px(x) << "\" y=\"" << py(0) + 14 << "\" text-anchor=\"middle\" font-size=\"10\">"
          << num(x) << "</text>\n";
    }
    svg << "<text x=\"" << ox + w - pad << "\" y=\"" << oy + 40 + 14 * li << "\" text-anchor=\"end\" fill=\"" << color
        << "\" font-size=\"11\">" << name << "</text>\n";
    ++li;
  }
}

}  // namespace

std::string resolution_svg(const std::vector<ResolutionRow>& rows, const ResolutionConfig& config) {
  Panel a{"(a) GMM, " + std::to_string(config.fixed_components) + " components", "feature dimension", {}};
  Panel b{"(b) dimension " + std::to_string(config.sweep_dim), "number of Gaussians", {}};

  Series by_dim, by_components, sc;
  for (const auto& r : rows) {
    if (r.model == "gmm" && r.param == config.fixed_components &&
        std::find(config.dims.begin(), config.dims.end(), r.dim) != config.dims.end())
      by_dim.emplace_back(static_cast<double>(r.dim), r.d);
    if (r.model == "gmm" && r.dim == config.sweep_dim &&
        std::find(config.component_sweep.begin(), config.component_sweep.end(), r.param) !=
            config.component_sweep.end())
      by_components.emplace_back(static_cast<double>(r.param), r.d);
    if (r.model == "sc" && r.dim == config.sweep_dim) sc.emplace_back(static_cast<double>(r.param), r.d);
  }
  std::sort(by_dim.begin(), by_dim.end());
  std::sort(by_components.begin(), by_components.end());
  a.lines.emplace_back("GMM", by_dim);
  b.lines.emplace_back("GMM", by_components);
  if (!sc.empty() && !by_components.empty()) {
    // The dictionary result is drawn as a flat reference line across panel (b).
    const double d = sc.front().second;
    b.lines.emplace_back("sparse coding, " + std::to_string(config.dictionary_atoms) + " bases",
                         Series{{by_components.front().first, d}, {by_components.back().first, d}});
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"740\" height=\"280\" font-family=\"sans-serif\" "
         "font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  draw_panel(svg, a, 0, 10);
  draw_panel(svg, b, 370, 10);
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fvkit::cli
