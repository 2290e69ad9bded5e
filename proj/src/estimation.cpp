#include "pcad/estimation.hpp"

#include <cmath>

#include "pcad/error.hpp"

namespace pcad {

ChannelEstimate ls_estimate(const ReceivedSignal& y, std::span<const cplx> pilot_row, double power,
                            std::size_t user) {
  if (!(power > 0.0)) throw InvalidArgument("LS estimation needs a positive user power");
  if (pilot_row.size() != y.length()) throw InvalidArgument("pilot length does not match Y");
  double pilot_energy = 0.0;
  for (const cplx& x : pilot_row) pilot_energy += std::norm(x);
  if (!(pilot_energy > 0.0)) throw InvalidArgument("zero-energy pilot");

  const double scale = 1.0 / (std::sqrt(power) * pilot_energy);
  ChannelEstimate est;
  est.source_user = user;
  est.taps.resize(y.antennas());
  for (std::size_t m = 0; m < y.antennas(); ++m) {
    const auto row = y.row(m);
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < row.size(); ++n) {
      const double yr = row[n].real(), yi = row[n].imag();
      const double xr = pilot_row[n].real(), xi = pilot_row[n].imag();
      re += yr * xr + yi * xi;
      im += yi * xr - yr * xi;
    }
    est.taps[m] = cplx(re * scale, im * scale);
  }
  return est;
}

double energy_feature(std::span<const cplx> taps) {
  if (taps.empty()) return 0.0;
  double sum = 0.0;
  for (const cplx& t : taps) sum += std::norm(t);
  return sum / static_cast<double>(taps.size());
}

}  // namespace pcad
