#pragma once

// Likelihood-ratio energy test between the no-attack and attack hypotheses of
// a zero-mean complex Gaussian channel estimate.

#include <cstddef>
#include <cstdint>
#include <map>
#include <shared_mutex>
#include <string_view>
#include <tuple>

namespace pcad {

inline constexpr double kDefaultAssumedPe = 1.0;

struct HypothesisVariances {
  double sigma0_sq;  // 1 + sigma^2/N
  double sigma1_sq;  // 1 + Pe + sigma^2/N
};

HypothesisVariances hypothesis_variances(double noise_variance, std::size_t pilot_length, double pe);

/// eta = (M/Pe) (1 + s^2/N)(1 + Pe + s^2/N) ln((1 + Pe + s^2/N)/(1 + s^2/N)).
/// Throws InvalidArgument for Pe <= 0.
double lrt_threshold(std::size_t antennas, std::size_t pilot_length, double noise_variance,
                     double pe);

/// M s0 s1 / (s1 - s0) ln(s1/s0), evaluated before substituting the variances.
/// Exists to check the closed form; throws when s1 == s0.
double lrt_threshold_unsimplified(std::size_t antennas, std::size_t pilot_length,
                                  double noise_variance, double pe);

class LrtDetector {
 public:
  LrtDetector(std::size_t antennas, std::size_t pilot_length, double noise_variance,
              double assumed_pe = kDefaultAssumedPe);

  std::size_t antennas() const noexcept { return antennas_; }
  std::size_t pilot_length() const noexcept { return pilot_length_; }
  double noise_variance() const noexcept { return noise_variance_; }
  double assumed_pe() const noexcept { return assumed_pe_; }
  double eta() const noexcept { return eta_; }
  double normalized_threshold() const noexcept { return eta_ / static_cast<double>(antennas_); }

  /// 1 iff the per-antenna energy exceeds eta/M; the boundary goes to H0.
  int detect(double normalized_energy) const noexcept {
    return normalized_energy > normalized_threshold() ? 1 : 0;
  }

 private:
  std::size_t antennas_;
  std::size_t pilot_length_;
  double noise_variance_;
  double assumed_pe_;
  double eta_;
};

/// Which noise term the threshold assumes for the channel estimate.
///  - estimate: sigma^2/N, the LS-estimate noise of the model.
///  - received: sigma^2, the per-sample noise the receiver measures. This
///    calibration reproduces the published baseline curves.
enum class LrtNoiseReference { estimate, received };

std::string_view to_string(LrtNoiseReference ref);
LrtNoiseReference parse_lrt_noise_reference(std::string_view text);

/// Baseline LRT that follows the scenario's noise variance, building and
/// caching one detector per (sigma^2, M). Thread-safe.
class LrtBaseline {
 public:
  explicit LrtBaseline(LrtNoiseReference reference = LrtNoiseReference::received,
                       double assumed_pe = kDefaultAssumedPe);

  LrtDetector detector_for(std::size_t antennas, std::size_t pilot_length,
                           double noise_variance) const;
  int detect(std::size_t antennas, std::size_t pilot_length, double noise_variance,
             double normalized_energy) const {
    return detector_for(antennas, pilot_length, noise_variance).detect(normalized_energy);
  }

  LrtNoiseReference reference() const noexcept { return reference_; }
  double assumed_pe() const noexcept { return assumed_pe_; }
  std::size_t cached_thresholds() const;

 private:
  LrtNoiseReference reference_;
  double assumed_pe_;
  mutable std::shared_mutex mutex_;
  // (bit pattern of sigma^2, M, N)
  mutable std::map<std::tuple<std::uint64_t, std::size_t, std::size_t>, LrtDetector> cache_;
};

}  // namespace pcad
