#include "pcad/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "pcad/error.hpp"
#include "pcad/parallel.hpp"

namespace pcad {

namespace {

constexpr int kModelVersion = 1;
constexpr std::string_view kModelFormat = "pcad-decision-tree";

double feature_value(const FeatureRow& r, Feature f) {
  return f == Feature::energy ? r.energy : static_cast<double>(r.num_users);
}

double weighted_gini(const ClassCounts& left, const ClassCounts& right) {
  const double nl = static_cast<double>(left[0] + left[1]);
  const double nr = static_cast<double>(right[0] + right[1]);
  return (nl * gini(left) + nr * gini(right)) / (nl + nr);
}

double midpoint(double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  // Adjacent doubles: the midpoint can round up onto hi and move hi left.
  return mid < hi ? mid : lo;
}

// Sweeps candidates over an ascending sequence. value(i) and label(i) address
// the i-th element in sorted order.
template <class ValueAt, class LabelAt>
std::optional<Split> sweep_sorted(std::size_t n, ValueAt value, LabelAt label) {
  ClassCounts total{0, 0};
  for (std::size_t i = 0; i < n; ++i) ++total[label(i) != 0 ? 1 : 0];

  std::optional<Split> best;
  ClassCounts left{0, 0};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    ++left[label(i) != 0 ? 1 : 0];
    const double a = value(i);
    const double b = value(i + 1);
    if (!(a < b)) continue;
    const ClassCounts right{total[0] - left[0], total[1] - left[1]};
    const double imp = weighted_gini(left, right);
    if (!best || imp < best->impurity) best = Split{midpoint(a, b), imp};
  }
  return best;
}

int majority(const ClassCounts& c) { return c[1] > c[0] ? 1 : 0; }

class Grower {
 public:
  Grower(std::span<const FeatureRow> rows, int max_depth, std::vector<TreeNode>& nodes)
      : rows_(rows), max_depth_(max_depth), nodes_(nodes) {}

  // by_feature[f] lists this node's rows sorted by feature f.
  int grow(std::array<std::vector<std::size_t>, 2> by_feature, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    ClassCounts counts{0, 0};
    for (std::size_t i : by_feature[0]) ++counts[rows_[i].pca != 0 ? 1 : 0];
    {
      TreeNode& node = nodes_[id];
      node.counts = counts;
      node.label = majority(counts);
    }
    if (depth >= max_depth_ || counts[0] == 0 || counts[1] == 0) return id;

    std::optional<Split> chosen;
    Feature chosen_feature = Feature::energy;
    for (Feature f : {Feature::energy, Feature::num_users}) {
      const auto& order = by_feature[static_cast<int>(f)];
      auto split = sweep_sorted(
          order.size(), [&](std::size_t i) { return feature_value(rows_[order[i]], f); },
          [&](std::size_t i) { return rows_[order[i]].pca; });
      // Strict comparison keeps energy on ties.
      if (split && (!chosen || split->impurity < chosen->impurity)) {
        chosen = split;
        chosen_feature = f;
      }
    }
    if (!chosen || !(chosen->impurity < gini(counts))) return id;

    std::array<std::vector<std::size_t>, 2> left, right;
    for (int f = 0; f < 2; ++f) {
      left[f].reserve(by_feature[f].size());
      right[f].reserve(by_feature[f].size());
      for (std::size_t i : by_feature[f]) {
        (feature_value(rows_[i], chosen_feature) <= chosen->threshold ? left : right)[f].push_back(i);
      }
      by_feature[f].clear();
      by_feature[f].shrink_to_fit();
    }
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    TreeNode& node = nodes_[id];
    node.leaf = false;
    node.feature = chosen_feature;
    node.threshold = chosen->threshold;
    node.left = l;
    node.right = r;
    return id;
  }

 private:
  std::span<const FeatureRow> rows_;
  int max_depth_;
  std::vector<TreeNode>& nodes_;
};

nlohmann::json node_to_json(const std::vector<TreeNode>& nodes, int id) {
  const TreeNode& n = nodes.at(id);
  if (n.leaf) {
    return {{"leaf", true}, {"class", n.label}, {"counts", {n.counts[0], n.counts[1]}}};
  }
  return {{"leaf", false},
          {"feature", to_string(n.feature)},
          {"threshold", n.threshold},
          {"counts", {n.counts[0], n.counts[1]}},
          {"left", node_to_json(nodes, n.left)},
          {"right", node_to_json(nodes, n.right)}};
}

int node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  TreeNode node;
  node.leaf = j.at("leaf").get<bool>();
  const auto& counts = j.at("counts");
  node.counts = {counts.at(0).get<std::size_t>(), counts.at(1).get<std::size_t>()};
  if (node.leaf) {
    node.label = j.at("class").get<int>();
    if (node.label != 0 && node.label != 1) throw InvalidArgument("leaf class must be 0 or 1");
  } else {
    node.feature = parse_feature(j.at("feature").get<std::string>());
    node.threshold = j.at("threshold").get<double>();
    if (!std::isfinite(node.threshold)) throw InvalidArgument("non-finite threshold");
    node.label = majority(node.counts);
    node.left = node_from_json(j.at("left"), nodes);
    node.right = node_from_json(j.at("right"), nodes);
  }
  nodes[id] = node;
  return id;
}

int subtree_depth(const std::vector<TreeNode>& nodes, int id) {
  const TreeNode& n = nodes[id];
  if (n.leaf) return 0;
  return 1 + std::max(subtree_depth(nodes, n.left), subtree_depth(nodes, n.right));
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

}  // namespace

std::string_view to_string(Feature f) { return f == Feature::energy ? "energy" : "num_users"; }

Feature parse_feature(std::string_view text) {
  if (text == "energy") return Feature::energy;
  if (text == "num_users") return Feature::num_users;
  throw InvalidArgument("unknown feature '" + std::string(text) + "'");
}

double gini(ClassCounts counts) {
  const std::size_t n = counts[0] + counts[1];
  if (n == 0) throw InvalidArgument("gini of an empty node");
  const double p0 = static_cast<double>(counts[0]) / static_cast<double>(n);
  const double p1 = static_cast<double>(counts[1]) / static_cast<double>(n);
  return 1.0 - (p0 * p0 + p1 * p1);
}

std::optional<Split> best_split(std::span<const double> values, std::span<const int> labels) {
  if (values.empty()) throw InvalidArgument("best_split needs at least one row");
  if (values.size() != labels.size()) throw InvalidArgument("values/labels length mismatch");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return sweep_sorted(
      order.size(), [&](std::size_t i) { return values[order[i]]; },
      [&](std::size_t i) { return labels[order[i]]; });
}

int TreeModel::predict(int num_users, double energy) const {
  int id = 0;
  while (true) {
    const TreeNode& n = nodes_.at(id);
    if (n.leaf) return n.label;
    const double v = n.feature == Feature::energy ? energy : static_cast<double>(num_users);
    id = v <= n.threshold ? n.left : n.right;
  }
}

int TreeModel::depth() const { return nodes_.empty() ? 0 : subtree_depth(nodes_, 0); }

nlohmann::json TreeModel::to_json() const {
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"max_depth", max_depth_},
          {"degenerate", degenerate_},
          {"provenance_digest", provenance_},
          {"root", node_to_json(nodes_, 0)}};
}

TreeModel TreeModel::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != kModelFormat) {
    throw InvalidArgument("not a decision-tree model document");
  }
  if (j.at("version").get<int>() != kModelVersion) {
    throw InvalidArgument("unsupported model version");
  }
  TreeModel m;
  m.max_depth_ = j.at("max_depth").get<int>();
  m.degenerate_ = j.value("degenerate", false);
  m.provenance_ = j.value("provenance_digest", std::string{});
  node_from_json(j.at("root"), m.nodes_);
  if (m.depth() > m.max_depth_) throw InvalidArgument("tree deeper than its max_depth");
  return m;
}

void TreeModel::save(const std::filesystem::path& path, const nlohmann::json& extra) const {
  auto j = to_json();
  if (extra.is_object()) j.update(extra);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

TreeModel TreeModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 1, e.what());
  }
}

TreeModel fit(std::span<const FeatureRow> rows, std::span<const std::size_t> subset,
              int max_depth) {
  if (max_depth < 1 || max_depth > 32) throw InvalidArgument("max_depth must be in [1, 32]");
  std::vector<std::size_t> members;
  if (subset.empty()) {
    members.resize(rows.size());
    std::iota(members.begin(), members.end(), 0);
  } else {
    members.assign(subset.begin(), subset.end());
  }
  if (members.empty()) throw InvalidArgument("cannot fit a tree on zero rows");

  std::array<std::vector<std::size_t>, 2> by_feature{members, members};
  for (Feature f : {Feature::energy, Feature::num_users}) {
    auto& order = by_feature[static_cast<int>(f)];
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return feature_value(rows[a], f) < feature_value(rows[b], f);
    });
  }

  TreeModel model;
  model.max_depth_ = max_depth;
  Grower(rows, max_depth, model.nodes_).grow(std::move(by_feature), 0);
  const auto& root = model.nodes_.front();
  model.degenerate_ = root.counts[0] == 0 || root.counts[1] == 0;
  return model;
}

TreeModel fit(const Dataset& ds, int max_depth) {
  TreeModel m = fit(ds.rows, {}, max_depth);
  m.set_provenance(ds.grid.digest());
  return m;
}

Metrics Metrics::from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  auto ratio = [&m](std::size_t num, std::size_t den) {
    if (den == 0) {
      m.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(tp + tn, tp + tn + fp + fn);
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.degenerate = true;
    m.f1 = 0.0;
  }
  return m;
}

Metrics evaluate(const TreeModel& model, std::span<const FeatureRow> rows,
                 std::span<const std::size_t> subset) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  auto tally = [&](const FeatureRow& r) {
    const int p = model.predict(r);
    if (r.pca != 0) {
      (p != 0 ? tp : fn)++;
    } else {
      (p != 0 ? fp : tn)++;
    }
  };
  if (subset.empty()) {
    for (const auto& r : rows) tally(r);
  } else {
    for (std::size_t i : subset) tally(rows[i]);
  }
  return Metrics::from_counts(tp, fp, tn, fn);
}

std::vector<DepthScore> grid_search_cv(const Dataset& ds, std::span<const int> depths,
                                       std::size_t folds, std::uint64_t seed) {
  if (depths.empty()) throw InvalidArgument("grid search needs at least one depth");
  const auto partition = stratified_kfold(ds, folds, seed);

  std::vector<DepthScore> scores(depths.size());
  for (std::size_t d = 0; d < depths.size(); ++d) {
    scores[d].depth = depths[d];
    scores[d].per_fold.resize(folds);
  }
  parallel_for(depths.size() * folds, [&](std::size_t job) {
    const std::size_t d = job / folds;
    const std::size_t f = job % folds;
    const TreeModel m = fit(ds.rows, partition[f].train, depths[d]);
    scores[d].per_fold[f] = evaluate(m, ds.rows, partition[f].validation);
  });

  for (auto& s : scores) {
    std::vector<double> acc, prec, rec, f1;
    for (const auto& m : s.per_fold) {
      acc.push_back(m.accuracy);
      prec.push_back(m.precision);
      rec.push_back(m.recall);
      f1.push_back(m.f1);
    }
    s.accuracy = mean_std(acc);
    s.precision = mean_std(prec);
    s.recall = mean_std(rec);
    s.f1 = mean_std(f1);
  }
  return scores;
}

int select_depth(std::span<const DepthScore> scores) {
  if (scores.empty()) throw InvalidArgument("no depth scores to select from");
  const auto best = std::max_element(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    return a.f1.mean < b.f1.mean;
  });
  int chosen = best->depth;
  for (const auto& s : scores) {
    if (s.f1.mean >= best->f1.mean - best->f1.stddev) chosen = std::min(chosen, s.depth);
  }
  return chosen;
}

}  // namespace pcad
