#include "pcad/lrt.hpp"

#include <bit>
#include <cmath>
#include <mutex>
#include <string>

#include "pcad/error.hpp"

namespace pcad {

HypothesisVariances hypothesis_variances(double noise_variance, std::size_t pilot_length,
                                         double pe) {
  const double sigma0_sq = 1.0 + noise_variance / static_cast<double>(pilot_length);
  return {sigma0_sq, sigma0_sq + pe};
}

double lrt_threshold(std::size_t antennas, std::size_t pilot_length, double noise_variance,
                     double pe) {
  if (!(pe > 0.0)) throw InvalidArgument("LRT threshold needs Pe > 0");
  if (pilot_length == 0) throw InvalidArgument("LRT threshold needs N >= 1");
  if (!(noise_variance >= 0.0)) throw InvalidArgument("noise variance must be >= 0");
  const double a = 1.0 + noise_variance / static_cast<double>(pilot_length);
  const double b = a + pe;
  // log1p keeps ln(b/a) accurate when Pe << a.
  return static_cast<double>(antennas) / pe * a * b * std::log1p(pe / a);
}

double lrt_threshold_unsimplified(std::size_t antennas, std::size_t pilot_length,
                                  double noise_variance, double pe) {
  if (pilot_length == 0) throw InvalidArgument("LRT threshold needs N >= 1");
  if (!(pe != 0.0)) throw InvalidArgument("hypotheses have equal variance");
  // ln(s1/s0) and s1 - s0 cancel badly for small Pe; long double keeps this
  // reference form accurate enough to compare against the closed form.
  const long double s0 = 1.0L + static_cast<long double>(noise_variance) / pilot_length;
  const long double s1 = s0 + pe;
  return static_cast<double>(antennas * (s0 * s1 / (s1 - s0)) * std::log(s1 / s0));
}

LrtDetector::LrtDetector(std::size_t antennas, std::size_t pilot_length, double noise_variance,
                         double assumed_pe)
    : antennas_(antennas),
      pilot_length_(pilot_length),
      noise_variance_(noise_variance),
      assumed_pe_(assumed_pe),
      eta_(lrt_threshold(antennas, pilot_length, noise_variance, assumed_pe)) {
  if (antennas == 0) throw InvalidArgument("LRT detector needs M >= 1");
}

std::string_view to_string(LrtNoiseReference ref) {
  return ref == LrtNoiseReference::estimate ? "estimate" : "received";
}

LrtNoiseReference parse_lrt_noise_reference(std::string_view text) {
  if (text == "estimate") return LrtNoiseReference::estimate;
  if (text == "received") return LrtNoiseReference::received;
  throw InvalidArgument("unknown LRT noise reference '" + std::string(text) + "'");
}

LrtBaseline::LrtBaseline(LrtNoiseReference reference, double assumed_pe)
    : reference_(reference), assumed_pe_(assumed_pe) {
  if (!(assumed_pe > 0.0)) throw InvalidArgument("LRT baseline needs an assumed Pe > 0");
}

LrtDetector LrtBaseline::detector_for(std::size_t antennas, std::size_t pilot_length,
                                      double noise_variance) const {
  const std::size_t n = reference_ == LrtNoiseReference::estimate ? pilot_length : 1;
  const auto key = std::make_tuple(std::bit_cast<std::uint64_t>(noise_variance), antennas, n);
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  LrtDetector det(antennas, n, noise_variance, assumed_pe_);
  std::unique_lock lock(mutex_);
  return cache_.try_emplace(key, det).first->second;
}

std::size_t LrtBaseline::cached_thresholds() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

}  // namespace pcad
