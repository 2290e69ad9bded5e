#pragma once

// Depth-limited CART classifier over the two detector features (energy, K),
// with Gini splitting, binary metrics, and cross-validated depth search.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pcad/dataset.hpp"

namespace pcad {

enum class Feature { energy, num_users };

std::string_view to_string(Feature f);
Feature parse_feature(std::string_view text);

using ClassCounts = std::array<std::size_t, 2>;

/// 1 - p0^2 - p1^2. Throws InvalidArgument when both counts are zero.
double gini(ClassCounts counts);

struct Split {
  double threshold = 0.0;
  double impurity = 0.0;  // count-weighted child Gini
};

/// Best midpoint threshold for one feature; ties go to the smaller threshold.
/// Returns nullopt for a constant feature. Throws on empty input or a
/// values/labels length mismatch.
std::optional<Split> best_split(std::span<const double> values, std::span<const int> labels);

struct TreeNode {
  bool leaf = true;
  Feature feature = Feature::energy;
  double threshold = 0.0;
  int left = -1;   // feature <= threshold
  int right = -1;  // feature > threshold
  int label = 0;
  ClassCounts counts{0, 0};

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class TreeModel {
 public:
  TreeModel() = default;

  int predict(int num_users, double energy) const;
  int predict(const FeatureRow& row) const { return predict(row.num_users, row.energy); }

  const TreeNode& root() const { return nodes_.at(0); }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  int max_depth() const noexcept { return max_depth_; }
  int depth() const;
  /// Set when the training data held a single class.
  bool degenerate() const noexcept { return degenerate_; }
  const std::string& provenance() const noexcept { return provenance_; }
  void set_provenance(std::string digest) { provenance_ = std::move(digest); }

  nlohmann::json to_json() const;
  static TreeModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path, const nlohmann::json& extra = {}) const;
  static TreeModel load(const std::filesystem::path& path);

  friend bool operator==(const TreeModel&, const TreeModel&) = default;

 private:
  friend TreeModel fit(std::span<const FeatureRow>, std::span<const std::size_t>, int);

  std::vector<TreeNode> nodes_;
  int max_depth_ = 0;
  bool degenerate_ = false;
  std::string provenance_;
};

/// Grows a tree on rows[subset] (all rows when subset is empty).
/// max_depth must be in [1, 32].
TreeModel fit(std::span<const FeatureRow> rows, std::span<const std::size_t> subset,
              int max_depth);
TreeModel fit(const Dataset& ds, int max_depth);

struct Metrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  /// A 0/0 ratio was reported as 0.
  bool degenerate = false;

  static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
};

Metrics evaluate(const TreeModel& model, std::span<const FeatureRow> rows,
                 std::span<const std::size_t> subset = {});

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

struct DepthScore {
  int depth = 0;
  MeanStd accuracy, precision, recall, f1;
  std::vector<Metrics> per_fold;
};

/// Stratified k-fold CV per depth; per-fold metrics averaged, sample std.
std::vector<DepthScore> grid_search_cv(const Dataset& ds, std::span<const int> depths,
                                       std::size_t folds, std::uint64_t seed);

/// Smallest depth whose mean F1 is within one standard deviation of the best.
int select_depth(std::span<const DepthScore> scores);

}  // namespace pcad
