#pragma once

// Minimal SVG output for sweep curves and energy histograms.

#include <filesystem>
#include <string>
#include <vector>

#include "pcad/experiments.hpp"

namespace pcad {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  double y_min = 0.0;
  double y_max = 1.0;
};

std::string render_line_plot(const LinePlot& plot);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// One series per (detector, Pe) of each result; `suffix` tags results that
/// share detectors (for example " @ 0 dB").
LinePlot sweep_plot(const std::vector<SweepResult>& results,
                    const std::vector<std::string>& suffixes, std::string title,
                    std::string x_label);

/// One panel per SNR with grouped bars per Pe, the LRT threshold dashed and
/// the DT threshold dash-dotted.
std::string render_histograms(const HistogramExport& h);

}  // namespace pcad
