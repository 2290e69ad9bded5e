#include "pcad/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pcad/error.hpp"

namespace pcad {

double noise_variance_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

UplinkConfig UplinkConfig::from_snr_db(std::size_t antennas, std::size_t users, double snr_db,
                                       double eavesdropper_power, std::size_t pilot_length) {
  UplinkConfig c;
  c.num_antennas = antennas;
  c.num_users = users;
  c.pilot_length = pilot_length;
  c.eavesdropper_power = eavesdropper_power;
  c.noise_variance = noise_variance_from_snr_db(snr_db);
  return c;
}

double UplinkConfig::power_of(std::size_t user) const {
  if (user_power.empty()) return 1.0;
  return user_power.at(user);
}

void UplinkConfig::validate() const {
  if (num_antennas == 0) throw InvalidArgument("num_antennas must be positive");
  if (num_users == 0) throw InvalidArgument("num_users must be positive");
  if (pilot_length == 0) throw InvalidArgument("pilot_length must be positive");
  if (num_users > pilot_length) {
    throw InfeasiblePilotSet("cannot build " + std::to_string(num_users) +
                             " orthogonal pilots of length " + std::to_string(pilot_length));
  }
  if (!user_power.empty() && user_power.size() != num_users) {
    throw InvalidArgument("user_power must have one entry per user");
  }
  for (double p : user_power) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("user power must be >= 0");
  }
  if (!(eavesdropper_power >= 0.0) || !std::isfinite(eavesdropper_power)) {
    throw InvalidArgument("eavesdropper_power must be >= 0");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw InvalidArgument("noise_variance must be >= 0");
  }
  if (!(channel_variance > 0.0) || !std::isfinite(channel_variance)) {
    throw InvalidArgument("channel_variance must be > 0");
  }
  if (attacked_user >= num_users) throw InvalidArgument("attacked_user out of range");
}

PilotMatrix::PilotMatrix(std::size_t users, std::size_t length, std::vector<cplx> symbols)
    : users_(users), length_(length), symbols_(std::move(symbols)) {
  if (symbols_.size() != users_ * length_) throw InvalidArgument("pilot symbol count mismatch");
}

std::span<const cplx> PilotMatrix::row(std::size_t user) const {
  if (user >= users_) throw InvalidArgument("pilot row out of range");
  return {symbols_.data() + user * length_, length_};
}

ReceivedSignal::ReceivedSignal(std::size_t antennas, std::size_t length)
    : antennas_(antennas), length_(length), samples_(antennas * length) {}

std::span<cplx> ReceivedSignal::row(std::size_t antenna) {
  return {samples_.data() + antenna * length_, length_};
}

std::span<const cplx> ReceivedSignal::row(std::size_t antenna) const {
  return {samples_.data() + antenna * length_, length_};
}

PilotMatrix generate_pilots(std::size_t users, std::size_t length) {
  if (users == 0 || length == 0) throw InvalidArgument("pilot set needs K >= 1 and N >= 1");
  if (users > length) {
    throw InfeasiblePilotSet("cannot build " + std::to_string(users) +
                             " orthogonal pilots of length " + std::to_string(length));
  }
  std::vector<cplx> symbols(users * length);
  for (std::size_t k = 0; k < users; ++k) {
    for (std::size_t n = 0; n < length; ++n) {
      // Reduce k*n mod N first so the phase stays accurate for large indices.
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((k * n) % length) /
                           static_cast<double>(length);
      symbols[k * length + n] = std::polar(1.0, phase);
    }
  }
  return {users, length, std::move(symbols)};
}

ChannelVector sample_channel(std::size_t antennas, double variance, RandomStream& rng) {
  if (antennas == 0) throw InvalidArgument("channel needs at least one antenna");
  if (!(variance > 0.0)) throw InvalidArgument("channel variance must be > 0");
  ChannelVector h;
  h.taps.resize(antennas);
  for (auto& tap : h.taps) tap = rng.complex_normal(variance);
  return h;
}

UplinkRealization simulate_uplink(const UplinkConfig& config, const PilotMatrix& pilots,
                                  RandomStream& rng) {
  config.validate();
  if (pilots.users() != config.num_users || pilots.length() != config.pilot_length) {
    throw InvalidArgument("pilot matrix does not match the uplink configuration");
  }
  const std::size_t M = config.num_antennas;
  const std::size_t N = config.pilot_length;

  UplinkRealization out{ReceivedSignal(M, N), {}, std::nullopt};
  out.user_channels.reserve(config.num_users);
  for (std::size_t k = 0; k < config.num_users; ++k) {
    out.user_channels.push_back(sample_channel(M, config.channel_variance, rng));
  }
  ChannelVector eve = sample_channel(M, config.channel_variance, rng);

  // Written out in real arithmetic: std::complex multiplication carries
  // inf/NaN recovery that dominates this loop otherwise.
  const auto accumulate = [N](std::span<cplx> y, cplx gain, std::span<const cplx> x) {
    const double gr = gain.real(), gi = gain.imag();
    for (std::size_t n = 0; n < N; ++n) {
      const double xr = x[n].real(), xi = x[n].imag();
      y[n] += cplx(gr * xr - gi * xi, gr * xi + gi * xr);
    }
  };
  for (std::size_t m = 0; m < M; ++m) {
    auto y = out.signal.row(m);
    for (std::size_t k = 0; k < config.num_users; ++k) {
      accumulate(y, std::sqrt(config.power_of(k)) * out.user_channels[k].taps[m], pilots.row(k));
    }
    if (config.attacked()) {
      accumulate(y, std::sqrt(config.eavesdropper_power) * eve.taps[m],
                 pilots.row(config.attacked_user));
    }
  }
  for (std::size_t m = 0; m < M; ++m) {
    auto y = out.signal.row(m);
    for (std::size_t n = 0; n < N; ++n) y[n] += rng.complex_normal(config.noise_variance);
  }
  if (config.attacked()) out.eve_channel = std::move(eve);
  return out;
}

ChannelVector synthesize_estimate(const UplinkConfig& config, RandomStream& rng) {
  config.validate();
  const double pk = config.power_of(config.attacked_user);
  if (!(pk > 0.0)) throw InvalidArgument("attacked user power must be > 0");
  const std::size_t M = config.num_antennas;
  const double eve_gain = std::sqrt(config.eavesdropper_power / pk);
  const double noise_var = config.noise_variance / (pk * static_cast<double>(config.pilot_length));

  ChannelVector h = sample_channel(M, config.channel_variance, rng);
  const ChannelVector he = sample_channel(M, config.channel_variance, rng);
  for (std::size_t m = 0; m < M; ++m) {
    h.taps[m] += eve_gain * he.taps[m] + rng.complex_normal(noise_var);
  }
  return h;
}

}  // namespace pcad
