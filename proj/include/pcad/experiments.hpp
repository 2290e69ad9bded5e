#pragma once

// Monte Carlo detection-probability sweeps over SNR, user count, eavesdropper
// power and antenna count, plus energy histograms with both thresholds.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcad/dataset.hpp"
#include "pcad/dtree.hpp"
#include "pcad/lrt.hpp"
#include "pcad/signal_model.hpp"

namespace pcad {

class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string id() const = 0;
  /// 1 = PCA. The condition is the scenario the energy was drawn from; only
  /// detectors that assume noise knowledge may read its noise variance.
  virtual int decide(const UplinkConfig& condition, double energy) const = 0;
};

class TreeDetector final : public Detector {
 public:
  explicit TreeDetector(TreeModel model) : model_(std::move(model)) {}
  std::string id() const override { return "dt"; }
  int decide(const UplinkConfig& condition, double energy) const override {
    return model_.predict(static_cast<int>(condition.num_users), energy);
  }
  const TreeModel& model() const noexcept { return model_; }

 private:
  TreeModel model_;
};

class LrtBaselineDetector final : public Detector {
 public:
  explicit LrtBaselineDetector(LrtNoiseReference reference = LrtNoiseReference::received,
                               double assumed_pe = kDefaultAssumedPe)
      : baseline_(reference, assumed_pe) {}
  std::string id() const override { return "lrt"; }
  int decide(const UplinkConfig& condition, double energy) const override {
    return baseline_.detect(condition.num_antennas, condition.pilot_length,
                            condition.noise_variance, energy);
  }
  const LrtBaseline& baseline() const noexcept { return baseline_; }

 private:
  LrtBaseline baseline_;
};

/// Depth-1 style summary: the root threshold when the root splits on energy.
std::optional<double> energy_threshold(const TreeModel& model);

/// Per-antenna energies for `trials` independent uplinks of one condition.
/// Trial seeds depend on (seed, M, K, N, Pe, attacked user, trial) but not on
/// the SNR, so points that differ only in SNR share channel draws and differ
/// only through the noise level.
std::vector<double> condition_energies(const UplinkConfig& condition, std::size_t trials,
                                       std::uint64_t seed,
                                       GenerationMode mode = GenerationMode::fast);

struct PointEstimate {
  std::size_t detections = 0;
  std::size_t trials = 0;
  double pd = 0.0;
};

/// Fraction of trials flagged as PCA per condition (false-alarm rate when Pe = 0).
std::vector<PointEstimate> detection_probability(const Detector& detector,
                                                 std::span<const UplinkConfig> conditions,
                                                 std::size_t trials, std::uint64_t seed,
                                                 GenerationMode mode = GenerationMode::fast);

struct SweepRecord {
  std::string detector;
  double pe = 0.0;
  double value = 0.0;
  std::size_t detections = 0;
  std::size_t trials = 0;
  double pd = 0.0;
};

struct SweepResult {
  std::string variable;
  std::vector<double> values;
  std::vector<SweepRecord> records;
  std::map<std::string, std::string> fixed_parameters;

  /// pd per swept value for one (detector, Pe) series, aligned with `values`.
  std::vector<double> curve(const std::string& detector, double pe) const;
  const SweepRecord& at(const std::string& detector, double pe, double value) const;
  std::vector<std::string> detectors() const;
  std::vector<double> pe_values() const;
};

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

struct SweepOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  GenerationMode mode = GenerationMode::fast;
  LrtNoiseReference lrt_reference = LrtNoiseReference::received;
  std::size_t pilot_length = kDefaultPilotLength;
};

/// Integer-stepped grid first, first+step, ..., last, divided by `divisor`
/// (so 0..25 / 10 gives exact decimal tenths).
std::vector<double> decimal_range(int first, int last, int step, double divisor = 1.0);

struct TrainedModel {
  TreeModel model;
  std::size_t rows = 0;
  double seconds = 0.0;
};

/// Default training grid for M antennas, seeded from (seed, M).
GridSpec training_grid(std::size_t antennas, std::uint64_t seed);

/// Fits a tree of the given depth on training_grid(antennas, seed).
TrainedModel train_default_model(std::size_t antennas, std::uint64_t seed, int depth = 1,
                                 GenerationMode mode = GenerationMode::fast);

struct SnrSweepSpec {
  std::size_t antennas = 256;
  std::size_t users = 64;
  std::vector<double> pe_values{0.0, 1.0};
  std::vector<double> snr_db = decimal_range(-10, 30, 1);
};

struct UserSweepSpec {
  std::size_t antennas = 256;
  double snr_db = 10.0;
  std::vector<double> pe_values{0.0, 1.0};
  std::vector<std::size_t> users = [] {
    std::vector<std::size_t> k;
    for (std::size_t u = 4; u <= 256; u += 4) k.push_back(u);
    return k;
  }();
};

struct PeSweepSpec {
  std::size_t antennas = 256;
  std::size_t users = 64;
  std::vector<double> snr_db{0.0, 10.0};
  std::vector<double> pe_values = decimal_range(0, 25, 1, 10.0);
};

struct AntennaSweepSpec {
  std::size_t users = 64;
  double snr_db = 10.0;
  std::vector<double> pe_values{0.0, 0.5, 1.0};
  std::vector<std::size_t> antennas = [] {
    std::vector<std::size_t> m;
    for (std::size_t a = 64; a <= 256; a += 16) m.push_back(a);
    return m;
  }();
  int depth = 1;
};

/// Both detectors vs SNR. Throws ModelRequired when `model` is empty.
SweepResult sweep_snr(const std::optional<TreeModel>& model, const SnrSweepSpec& spec,
                      const SweepOptions& options);
SweepResult sweep_users(const std::optional<TreeModel>& model, const UserSweepSpec& spec,
                        const SweepOptions& options);
/// One result per SNR in the spec, each swept over Pe.
std::vector<SweepResult> sweep_pe(const std::optional<TreeModel>& model, const PeSweepSpec& spec,
                                  const SweepOptions& options);
/// Retrains a tree per M (train_default_model with options.seed).
SweepResult sweep_antennas(const AntennaSweepSpec& spec, const SweepOptions& options,
                           std::vector<TreeModel>* models = nullptr);

struct HistogramCell {
  double snr_db = 0.0;
  double pe = 0.0;
  int pca = 0;
  std::vector<double> edges;  // bins + 1, strictly increasing
  std::vector<std::size_t> counts;
  double lrt_threshold = 0.0;  // eta / M at this SNR
};

struct HistogramExport {
  std::vector<HistogramCell> cells;
  double dt_threshold = 0.0;
  std::size_t antennas = 0;
  std::size_t users = 0;
  std::size_t trials = 0;
};

struct HistogramSpec {
  std::size_t antennas = 256;
  std::size_t users = 64;
  std::vector<double> snr_db{-10.0, 0.0, 10.0, 20.0};
  std::vector<double> pe_values{0.0, 0.5, 1.0, 2.0};
  std::size_t trials = 1000;
  std::size_t bins = 40;
};

/// Cells sharing an SNR share bin edges. Throws InvalidArgument for bins < 10.
HistogramExport export_energy_histograms(const TreeModel& model, const HistogramSpec& spec,
                                         const SweepOptions& options);

void write_histogram_csv(const HistogramExport& h, const std::filesystem::path& path);

}  // namespace pcad
