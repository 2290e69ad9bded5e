#include "pcad/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace pcad {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0, kRight = 180.0, kTop = 40.0, kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
}

std::string render_line_plot(const LinePlot& plot) {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  for (const auto& s : plot.series) {
    for (double x : s.x) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
  }
  if (!(x_max > x_min)) {
    x_min = std::isfinite(x_min) ? x_min - 1.0 : 0.0;
    x_max = x_min + 2.0;
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
  auto sy = [&](double y) { return kTop + (plot.y_max - y) / (plot.y_max - plot.y_min) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(plot.title) << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double yv = plot.y_min + (plot.y_max - plot.y_min) * i / 5.0;
    const double xv = x_min + (x_max - x_min) * i / 5.0;
    svg << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << sy(yv) << "\" y2=\""
        << sy(yv) << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
        << num(yv) << "</text>\n"
        << "<text x=\"" << sx(xv) << "\" y=\"" << kTop + ph + 18
        << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n"
      << "<text transform=\"translate(18," << kTop + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
      svg << num(sx(s.x[j])) << ',' << num(sy(s.y[j])) << ' ';
    }
    svg << "\"/>\n";
    const double ly = kTop + 14 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << kLeft + pw + 12 << "\" x2=\"" << kLeft + pw + 40 << "\" y1=\"" << ly
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n"
        << "<text x=\"" << kLeft + pw + 46 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

LinePlot sweep_plot(const std::vector<SweepResult>& results,
                    const std::vector<std::string>& suffixes, std::string title,
                    std::string x_label) {
  LinePlot plot;
  plot.title = std::move(title);
  plot.x_label = std::move(x_label);
  plot.y_label = "probability of detection";
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto& res = results[r];
    const std::string suffix = r < suffixes.size() ? suffixes[r] : std::string{};
    for (const auto& det : res.detectors()) {
      const auto pes = res.pe_values();
      if (res.variable == "pe") {
        std::vector<double> ys;
        for (double v : res.values) ys.push_back(res.at(det, v, v).pd);
        plot.series.push_back({det + suffix, res.values, ys, det == "lrt"});
        continue;
      }
      for (double pe : pes) {
        plot.series.push_back(
            {det + " Pe=" + num(pe) + suffix, res.values, res.curve(det, pe), det == "lrt"});
      }
    }
  }
  return plot;
}

std::string render_histograms(const HistogramExport& h) {
  std::map<double, std::vector<const HistogramCell*>> panels;
  for (const auto& c : h.cells) panels[c.snr_db].push_back(&c);

  const double panel_w = 340.0, panel_h = 230.0, pad = 50.0;
  const std::size_t cols = 2;
  const std::size_t rows = (panels.size() + cols - 1) / cols;
  const double width = cols * (panel_w + pad) + pad;
  const double height = rows * (panel_h + pad + 20) + pad;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  std::size_t idx = 0;
  for (const auto& [snr, cells] : panels) {
    const double x0 = pad + static_cast<double>(idx % cols) * (panel_w + pad);
    const double y0 = pad + static_cast<double>(idx / cols) * (panel_h + pad + 20);
    ++idx;
    const auto& edges = cells.front()->edges;
    const double lo = std::min({edges.front(), h.dt_threshold, cells.front()->lrt_threshold});
    const double hi = std::max({edges.back(), h.dt_threshold, cells.front()->lrt_threshold});
    std::size_t peak = 1;
    for (const auto* c : cells) peak = std::max(peak, *std::max_element(c->counts.begin(), c->counts.end()));
    auto sx = [&](double e) { return x0 + (e - lo) / (hi - lo) * panel_w; };
    auto sy = [&](double n) { return y0 + panel_h - n / static_cast<double>(peak) * panel_h; };

    svg << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << y0 - 8
        << "\" text-anchor=\"middle\" font-size=\"13\">SNR " << num(snr) << " dB</text>\n"
        << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << panel_w << "\" height=\""
        << panel_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double e = lo + (hi - lo) * t / 4.0;
      svg << "<text x=\"" << sx(e) << "\" y=\"" << y0 + panel_h + 14
          << "\" text-anchor=\"middle\">" << num(e) << "</text>\n";
    }
    const double group = static_cast<double>(cells.size());
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      const auto* c = cells[ci];
      const char* color = c->pca ? kPalette[1 + ci % (std::size(kPalette) - 1)] : kPalette[0];
      for (std::size_t b = 0; b < c->counts.size(); ++b) {
        if (c->counts[b] == 0) continue;
        const double bw = (sx(c->edges[b + 1]) - sx(c->edges[b])) / group;
        const double bx = sx(c->edges[b]) + bw * static_cast<double>(ci);
        svg << "<rect x=\"" << num(bx) << "\" y=\"" << num(sy(static_cast<double>(c->counts[b])))
            << "\" width=\"" << num(bw) << "\" height=\""
            << num(y0 + panel_h - sy(static_cast<double>(c->counts[b]))) << "\" fill=\"" << color
            << "\" fill-opacity=\"0.7\"/>\n";
      }
      svg << "<text x=\"" << x0 + panel_w - 4 << "\" y=\"" << y0 + 14 + 13.0 * ci
          << "\" text-anchor=\"end\" fill=\"" << color << "\">Pe=" << num(c->pe) << "</text>\n";
    }
    const double lrt_x = sx(cells.front()->lrt_threshold);
    svg << "<line x1=\"" << lrt_x << "\" x2=\"" << lrt_x << "\" y1=\"" << y0 << "\" y2=\""
        << y0 + panel_h << "\" stroke=\"black\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"/>\n";
    if (std::isfinite(h.dt_threshold)) {
      const double dt_x = sx(h.dt_threshold);
      svg << "<line x1=\"" << dt_x << "\" x2=\"" << dt_x << "\" y1=\"" << y0 << "\" y2=\""
          << y0 + panel_h
          << "\" stroke=\"green\" stroke-dasharray=\"8,3,2,3\" stroke-width=\"1.5\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace pcad
