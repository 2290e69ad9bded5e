#pragma once

// Labeled training/test data: parameter grids, Monte Carlo generation with
// class balancing, CSV persistence, and stratified folds.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pcad/estimation.hpp"
#include "pcad/signal_model.hpp"

namespace pcad {

inline constexpr std::string_view kGeneratorVersion = "pcad-dataset/1";

enum class GenerationMode { fast, full };

std::string_view to_string(GenerationMode mode);
GenerationMode parse_generation_mode(std::string_view text);

struct GridSpec {
  std::vector<double> snr_db_values;
  std::vector<std::size_t> k_values;
  std::vector<double> pe_values;
  std::size_t trials_per_cell = 100;
  std::size_t num_antennas = 0;
  std::size_t pilot_length = kDefaultPilotLength;
  std::uint64_t master_seed = 0;

  void validate() const;
  std::size_t positive_pe_count() const;
  bool has_zero_pe() const;

  nlohmann::json to_json() const;
  static GridSpec from_json(const nlohmann::json& j);
  /// Stable hex digest of the canonical JSON form.
  std::string digest() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Training grid for an M-antenna base station: SNR -10..30 step 5,
/// K in {1, 16, 32, ..., M}, Pe in {0, 0.5, ..., 2.5}.
GridSpec default_train_grid(std::size_t antennas, std::uint64_t seed = 0);
/// Test grid: SNR -10..30 step 1, K in 1..M, Pe in {0, 0.1, ..., 2.5}.
GridSpec default_test_grid(std::size_t antennas, std::uint64_t seed = 0);

struct Dataset {
  std::vector<FeatureRow> rows;
  GridSpec grid;
  GenerationMode mode = GenerationMode::fast;

  /// {count(pca=0), count(pca=1)}
  std::array<std::size_t, 2> class_counts() const;
  bool balanced() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Energy of the attacked user's estimate for one trial. Full mode needs the
/// pilot matrix for (config.num_users, config.pilot_length).
double trial_energy(const UplinkConfig& config, GenerationMode mode, RandomStream& rng,
                    const PilotMatrix* pilots = nullptr);

/// Cells are visited K-major, then Pe, then SNR. Zero-power cells are drawn
/// once per positive Pe value (fresh seeds each time) so both classes end up
/// the same size. Row seeds depend only on (master_seed, K, Pe, SNR, replica,
/// trial), never on scheduling.
Dataset generate_dataset(const GridSpec& grid, GenerationMode mode);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Writes the CSV and its `<stem>.meta.json` sidecar. `extra` is merged into
/// the sidecar (for example a run-config digest).
void save_csv(const Dataset& ds, const std::filesystem::path& path,
              const nlohmann::json& extra = nlohmann::json::object());
/// Reads rows and, when present, the sidecar. Throws ParseError on bad input.
Dataset load_csv(const std::filesystem::path& path);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

std::vector<Fold> stratified_kfold(std::span<const int> labels, std::size_t folds,
                                   std::uint64_t seed);
std::vector<Fold> stratified_kfold(const Dataset& ds, std::size_t folds, std::uint64_t seed);

}  // namespace pcad
