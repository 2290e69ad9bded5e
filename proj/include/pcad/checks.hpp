#pragma once

// Pass/fail bands for each reproduced figure and the CV table.

#include <span>
#include <string>
#include <vector>

#include "pcad/dtree.hpp"
#include "pcad/experiments.hpp"

namespace pcad {

struct BandCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

bool all_passed(std::span<const BandCheck> checks);

std::vector<BandCheck> check_fig4(const SweepResult& snr_sweep);
std::vector<BandCheck> check_fig5(const SweepResult& user_sweep);
/// Expects the 0 dB and 10 dB results of sweep_pe, in that order.
std::vector<BandCheck> check_fig6(std::span<const SweepResult> pe_sweeps);
std::vector<BandCheck> check_fig7(const SweepResult& antenna_sweep);
std::vector<BandCheck> check_fig8(const HistogramExport& h);
std::vector<BandCheck> check_table3(std::span<const DepthScore> scores);
/// Depth-1 tree splits on energy inside [1.15, 1.45].
std::vector<BandCheck> check_depth1_threshold(const TreeModel& model);

}  // namespace pcad
