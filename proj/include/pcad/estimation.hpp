#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcad/rng.hpp"
#include "pcad/signal_model.hpp"

namespace pcad {

struct ChannelEstimate {
  std::vector<cplx> taps;
  std::size_t source_user = 0;
};

/// One labeled sample: the detector sees (num_users, energy); pe is kept for
/// per-condition reporting.
struct FeatureRow {
  int num_users = 0;
  double snr_db = 0.0;
  double pe = 0.0;
  double energy = 0.0;
  int pca = 0;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

/// Least-squares estimate h = Y x^H / (sqrt(Pk) |x|^2).
ChannelEstimate ls_estimate(const ReceivedSignal& y, std::span<const cplx> pilot_row, double power,
                            std::size_t user = 0);

/// Per-antenna energy |h|^2 / M.
double energy_feature(std::span<const cplx> taps);
inline double energy_feature(const ChannelEstimate& est) { return energy_feature(est.taps); }

}  // namespace pcad
