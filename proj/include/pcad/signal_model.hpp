#pragma once

// Multiuser massive-MIMO uplink: orthogonal pilots, Rayleigh block-fading
// channels, and the received pilot block with an optional impersonating
// eavesdropper.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pcad/rng.hpp"

namespace pcad {

inline constexpr std::size_t kDefaultPilotLength = 300;

/// Linear noise variance for an SNR in dB under unit user power.
double noise_variance_from_snr_db(double snr_db);

struct UplinkConfig {
  std::size_t num_antennas = 1;
  std::size_t num_users = 1;
  std::size_t pilot_length = kDefaultPilotLength;
  std::vector<double> user_power;  // one entry per user; empty means all 1.0
  double eavesdropper_power = 0.0;  // 0 encodes "no attack"
  double noise_variance = 0.0;
  double channel_variance = 1.0;
  std::size_t attacked_user = 0;

  /// Unit-power users, noise variance 10^(-snr_db/10).
  static UplinkConfig from_snr_db(std::size_t antennas, std::size_t users, double snr_db,
                                  double eavesdropper_power,
                                  std::size_t pilot_length = kDefaultPilotLength);

  double power_of(std::size_t user) const;
  bool attacked() const noexcept { return eavesdropper_power > 0.0; }

  /// Throws InvalidArgument (InfeasiblePilotSet when K > N).
  void validate() const;
};

/// K rows of N unit-modulus symbols; rows are mutually orthogonal.
class PilotMatrix {
 public:
  PilotMatrix(std::size_t users, std::size_t length, std::vector<cplx> symbols);

  std::size_t users() const noexcept { return users_; }
  std::size_t length() const noexcept { return length_; }
  std::span<const cplx> row(std::size_t user) const;

 private:
  std::size_t users_;
  std::size_t length_;
  std::vector<cplx> symbols_;  // row-major K x N
};

struct ChannelVector {
  std::vector<cplx> taps;

  std::size_t size() const noexcept { return taps.size(); }
};

/// M x N block of received samples, row m is antenna m.
class ReceivedSignal {
 public:
  ReceivedSignal(std::size_t antennas, std::size_t length);

  std::size_t antennas() const noexcept { return antennas_; }
  std::size_t length() const noexcept { return length_; }

  std::span<cplx> row(std::size_t antenna);
  std::span<const cplx> row(std::size_t antenna) const;
  cplx operator()(std::size_t antenna, std::size_t n) const { return samples_[antenna * length_ + n]; }

 private:
  std::size_t antennas_;
  std::size_t length_;
  std::vector<cplx> samples_;
};

struct UplinkRealization {
  ReceivedSignal signal;
  std::vector<ChannelVector> user_channels;
  std::optional<ChannelVector> eve_channel;
};

/// Rows k of the N-point DFT basis, x_k(n) = exp(-j 2 pi k n / N).
PilotMatrix generate_pilots(std::size_t users, std::size_t length);

ChannelVector sample_channel(std::size_t antennas, double variance, RandomStream& rng);

/// Full simulation of the pilot phase. Draw order is fixed (user channels in
/// index order, eavesdropper channel, then noise row by row) and the
/// eavesdropper channel is always drawn, so streams stay aligned across Pe.
UplinkRealization simulate_uplink(const UplinkConfig& config, const PilotMatrix& pilots,
                                  RandomStream& rng);

/// Samples the attacked user's LS estimate directly:
///   h_k + sqrt(Pe/Pk) h_e + w,  w ~ CN(0, sigma^2 / (Pk N)).
/// Same distribution as simulate_uplink + ls_estimate under orthogonal pilots.
ChannelVector synthesize_estimate(const UplinkConfig& config, RandomStream& rng);

}  // namespace pcad
