#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "pcad/error.hpp"
#include "pcad/estimation.hpp"
#include "pcad/rng.hpp"
#include "pcad/signal_model.hpp"
#include "support.hpp"

using namespace pcad;

TEST_CASE("LS estimate: noiseless single user") {
  UplinkConfig cfg;
  cfg.num_antennas = 5;
  cfg.num_users = 1;
  cfg.pilot_length = 7;
  const auto pilots = generate_pilots(1, 7);
  RandomStream rng(1);
  const auto up = simulate_uplink(cfg, pilots, rng);
  const auto est = ls_estimate(up.signal, pilots.row(0), 1.0);
  REQUIRE(est.taps.size() == 5);
  for (std::size_t m = 0; m < 5; ++m) CHECK(std::abs(est.taps[m] - up.user_channels[0].taps[m]) < 1e-12);
}

TEST_CASE("LS estimate: power normalization cancels") {
  // Y = 2 h x with Pk = 4
  const auto pilots = generate_pilots(2, 6);
  const std::vector<cplx> h{{0.3, -1.0}, {2.0, 0.5}, {-0.7, 0.1}};
  ReceivedSignal y(3, 6);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t n = 0; n < 6; ++n) y.row(m)[n] = 2.0 * h[m] * pilots.row(1)[n];
  }
  const auto est = ls_estimate(y, pilots.row(1), 4.0, 1);
  CHECK(est.source_user == 1);
  for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(est.taps[m] - h[m]) < 1e-12);
}

TEST_CASE("LS estimate: argument errors") {
  const auto pilots = generate_pilots(1, 4);
  ReceivedSignal y(2, 4);
  CHECK_THROWS_AS(ls_estimate(y, pilots.row(0), 0.0), InvalidArgument);
  CHECK_THROWS_AS(ls_estimate(y, pilots.row(0), -1.0), InvalidArgument);
  const std::vector<cplx> zeros(4);
  CHECK_THROWS_AS(ls_estimate(y, zeros, 1.0), InvalidArgument);
  const auto longer = generate_pilots(1, 5);
  CHECK_THROWS_AS(ls_estimate(y, longer.row(0), 1.0), InvalidArgument);
}

TEST_CASE("LS estimate is linear in Y") {
  const auto pilots = generate_pilots(3, 10);
  RandomStream rng(2);
  ReceivedSignal a(4, 10), b(4, 10), c(4, 10);
  const cplx alpha{0.7, -1.3}, beta{-2.0, 0.25};
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t n = 0; n < 10; ++n) {
      a.row(m)[n] = rng.complex_normal(1.0);
      b.row(m)[n] = rng.complex_normal(1.0);
      c.row(m)[n] = alpha * a(m, n) + beta * b(m, n);
    }
  }
  const auto ea = ls_estimate(a, pilots.row(2), 1.5);
  const auto eb = ls_estimate(b, pilots.row(2), 1.5);
  const auto ec = ls_estimate(c, pilots.row(2), 1.5);
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(std::abs(ec.taps[m] - (alpha * ea.taps[m] + beta * eb.taps[m])) < 1e-12);
  }
}

TEST_CASE("energy feature arithmetic") {
  const std::vector<cplx> taps{{3.0, 0.0}, {0.0, 4.0}};
  CHECK(energy_feature(taps) == doctest::Approx(12.5));
  CHECK(energy_feature(std::vector<cplx>(16)) == 0.0);
  ChannelEstimate est{taps, 0};
  CHECK(energy_feature(est) == doctest::Approx(12.5));
}

TEST_CASE("energy feature scales with |c|^2") {
  RandomStream rng(3);
  std::vector<cplx> taps(37);
  for (auto& t : taps) t = rng.complex_normal(2.0);
  const double base = energy_feature(taps);
  for (cplx c : {cplx{2.0, 0.0}, cplx{0.0, -0.5}, cplx{1.5, 2.5}, cplx{1e-3, 1e-3}}) {
    std::vector<cplx> scaled = taps;
    for (auto& t : scaled) t *= c;
    CHECK(energy_feature(scaled) == doctest::Approx(std::norm(c) * base).epsilon(1e-12));
  }
}

TEST_CASE("H0 energy statistics at M=256, N=300, noise 0.1") {
  auto cfg = UplinkConfig::from_snr_db(256, 1, 10.0, 0.0);
  cfg.noise_variance = 0.1;
  const double sigma0_sq = 1.0 + 0.1 / 300.0;
  RandomStream rng(4);
  std::vector<double> e;
  e.reserve(10000);
  for (int t = 0; t < 10000; ++t) e.push_back(energy_feature(synthesize_estimate(cfg, rng).taps));
  const auto m = testing::moments(e);
  CHECK(std::abs(m.mean - sigma0_sq) <= 0.002);
  // Gamma(M, sigma0^2 / M) concentration: std = sigma0^2 / sqrt(M).
  CHECK(std::sqrt(m.variance) == doctest::Approx(sigma0_sq / 16.0).epsilon(0.2));
}

TEST_CASE("H0 energy mean through the full LS pipeline") {
  // Smaller than the fast-path case above; the tolerance scales accordingly.
  UplinkConfig cfg = UplinkConfig::from_snr_db(256, 2, 10.0, 0.0);
  cfg.noise_variance = 0.1;
  const auto pilots = generate_pilots(2, 300);
  RandomStream rng(5);
  std::vector<double> e;
  for (int t = 0; t < 300; ++t) {
    const auto up = simulate_uplink(cfg, pilots, rng);
    e.push_back(energy_feature(ls_estimate(up.signal, pilots.row(0), 1.0)));
  }
  const auto m = testing::moments(e);
  CHECK(std::abs(m.mean - (1.0 + 0.1 / 300.0)) <= 4.0 * m.standard_error());
}

TEST_CASE("feature rows compare by value") {
  FeatureRow a{64, 10.0, 0.5, 1.25, 1};
  FeatureRow b = a;
  CHECK(a == b);
  b.energy = 1.26;
  CHECK_FALSE(a == b);
}
