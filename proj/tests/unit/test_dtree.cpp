#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pcad/dataset.hpp"
#include "pcad/dtree.hpp"
#include "pcad/error.hpp"
#include "pcad/parallel.hpp"
#include "support.hpp"

using namespace pcad;

namespace {

std::vector<FeatureRow> separable_rows() {
  std::vector<FeatureRow> rows;
  for (int i = 0; i < 20; ++i) rows.push_back({8, 10.0, 0.0, 0.9 + 0.01 * i, 0});
  for (int i = 0; i < 20; ++i) rows.push_back({8, 10.0, 1.0, 1.9 + 0.01 * i, 1});
  return rows;
}

TreeModel threshold_model(double t) {
  nlohmann::json j = {{"format", "pcad-decision-tree"},
                      {"version", 1},
                      {"max_depth", 1},
                      {"root",
                       {{"leaf", false},
                        {"feature", "energy"},
                        {"threshold", t},
                        {"counts", {10, 10}},
                        {"left", {{"leaf", true}, {"class", 0}, {"counts", {10, 0}}}},
                        {"right", {{"leaf", true}, {"class", 1}, {"counts", {0, 10}}}}}}};
  return TreeModel::from_json(j);
}

}  // namespace

TEST_CASE("gini impurity") {
  CHECK(gini({50, 50}) == doctest::Approx(0.5));
  CHECK(gini({10, 0}) == 0.0);
  CHECK(gini({3, 1}) == doctest::Approx(0.375));
  CHECK_THROWS_AS(gini({0, 0}), InvalidArgument);
  for (std::size_t a = 0; a < 30; ++a) {
    for (std::size_t b = 0; b < 30; ++b) {
      if (a + b == 0) continue;
      const double g = gini({a, b});
      CHECK(g >= 0.0);
      CHECK(g <= 0.5);
      CHECK(g == gini({b, a}));
    }
  }
}

TEST_CASE("best split basics") {
  const std::vector<double> e{1.0, 1.0, 2.0};
  const std::vector<int> y{0, 0, 1};
  const auto s = best_split(e, y);
  REQUIRE(s);
  CHECK(s->threshold == 1.5);
  CHECK(s->impurity == 0.0);

  const std::vector<double> flat{3.0, 3.0, 3.0};
  CHECK_FALSE(best_split(flat, y));
  CHECK_THROWS_AS(best_split(std::vector<double>{}, std::vector<int>{}), InvalidArgument);
  CHECK_THROWS_AS(best_split(e, std::vector<int>{0, 1}), InvalidArgument);
}

TEST_CASE("best split breaks impurity ties toward the smaller threshold") {
  // Splitting at 1.5 or 3.5 isolates one row of each class: same impurity.
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const std::vector<int> y{1, 0, 0, 1};
  const auto s = best_split(v, y);
  REQUIRE(s);
  CHECK(s->threshold == 1.5);
}

TEST_CASE("best split midpoint never lands on the upper value") {
  const double lo = 1.0;
  const double hi = std::nextafter(1.0, 2.0);
  const std::vector<double> v{lo, hi};
  const std::vector<int> y{0, 1};
  const auto s = best_split(v, y);
  REQUIRE(s);
  CHECK(s->threshold < hi);
  CHECK(s->threshold >= lo);
}

TEST_CASE("best split equals the exhaustive midpoint scan") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 200; ++rep) {
    const auto rows = oracle::random_rows(gen, 200);
    std::vector<double> v;
    std::vector<int> y;
    for (const auto& r : rows) {
      v.push_back(r.energy);
      y.push_back(r.pca);
    }
    const auto got = best_split(v, y);
    const auto want = oracle::best_midpoint(v, y, Feature::energy);
    REQUIRE(got.has_value() == want.has_value());
    if (!got) continue;
    CHECK(got->threshold == want->threshold);
    CHECK(got->impurity == want->impurity);
  }
}

TEST_CASE("best split is invariant under increasing transforms") {
  std::mt19937_64 gen(12);
  for (int rep = 0; rep < 50; ++rep) {
    const auto rows = oracle::random_rows(gen, 150);
    std::vector<double> v, w;
    std::vector<int> y;
    for (const auto& r : rows) {
      v.push_back(r.energy);
      w.push_back(std::exp(3.0 * r.energy) + 5.0);
      y.push_back(r.pca);
    }
    const auto a = best_split(v, y);
    const auto b = best_split(w, y);
    REQUIRE(a.has_value() == b.has_value());
    if (!a) continue;
    CHECK(a->impurity == doctest::Approx(b->impurity).epsilon(1e-12));
    // Same partition of the rows.
    for (std::size_t i = 0; i < v.size(); ++i) CHECK((v[i] <= a->threshold) == (w[i] <= b->threshold));
  }
}

TEST_CASE("depth-1 fit equals the exhaustive oracle over both features") {
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 100; ++rep) {
    const auto rows = oracle::random_rows(gen, 500);
    const auto model = fit(rows, {}, 1);
    const auto want = oracle::depth1_root(rows);
    CAPTURE(rep);
    if (!want) {
      CHECK(model.root().leaf);
      continue;
    }
    const auto& root = model.root();
    REQUIRE_FALSE(root.leaf);
    CHECK(root.feature == want->feature);
    CHECK(root.threshold == want->threshold);
    const auto& l = model.nodes()[root.left];
    const auto& r = model.nodes()[root.right];
    const double n = static_cast<double>(rows.size());
    const double nl = static_cast<double>(l.counts[0] + l.counts[1]);
    const double nr = static_cast<double>(r.counts[0] + r.counts[1]);
    const double imp = (nl * oracle::node_gini(l.counts[0], l.counts[1]) +
                        nr * oracle::node_gini(r.counts[0], r.counts[1])) / n;
    CHECK(imp == want->impurity);
  }
}

TEST_CASE("fit: perfectly separated data") {
  const auto rows = separable_rows();
  const auto m = fit(rows, {}, 1);
  CHECK(m.depth() == 1);
  CHECK(m.max_depth() == 1);
  CHECK_FALSE(m.degenerate());
  CHECK(m.root().feature == Feature::energy);
  CHECK(m.root().threshold == doctest::Approx(0.5 * (1.09 + 1.9)));
  const auto metrics = evaluate(m, rows);
  CHECK(metrics.accuracy == 1.0);
  // a deeper limit adds nothing once the children are pure
  CHECK(fit(rows, {}, 5).depth() == 1);
}

TEST_CASE("fit: subsets, degenerate data and errors") {
  const auto rows = separable_rows();
  const std::vector<std::size_t> zeros{0, 1, 2, 3};
  const auto m = fit(rows, zeros, 3);
  CHECK(m.degenerate());
  CHECK(m.root().leaf);
  CHECK(m.predict(8, 100.0) == 0);
  CHECK_THROWS_AS(fit(rows, {}, 0), InvalidArgument);
  CHECK_THROWS_AS(fit(rows, {}, 33), InvalidArgument);
  CHECK_THROWS_AS(fit(std::vector<FeatureRow>{}, {}, 1), InvalidArgument);
}

TEST_CASE("fit: splits on K when only K separates") {
  std::vector<FeatureRow> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({4, 0.0, 0.0, 1.0, 0});
  for (int i = 0; i < 10; ++i) rows.push_back({12, 0.0, 1.0, 1.0, 1});
  const auto m = fit(rows, {}, 2);
  CHECK(m.root().feature == Feature::num_users);
  CHECK(m.root().threshold == 8.0);
  CHECK(m.predict(4, 1.0) == 0);
  CHECK(m.predict(12, 1.0) == 1);
}

TEST_CASE("fit: energy is preferred when both features tie") {
  std::vector<FeatureRow> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({4, 0.0, 0.0, 1.0, 0});
  for (int i = 0; i < 10; ++i) rows.push_back({12, 0.0, 1.0, 2.0, 1});
  CHECK(fit(rows, {}, 1).root().feature == Feature::energy);
}

TEST_CASE("fit: majority leaves break count ties toward class 0") {
  std::vector<FeatureRow> rows{{1, 0.0, 0.0, 1.0, 0}, {1, 0.0, 1.0, 1.0, 1}};
  const auto m = fit(rows, {}, 1);
  CHECK(m.root().leaf);
  CHECK(m.predict(1, 1.0) == 0);
}

TEST_CASE("fit on a generated grid: deeper trees do not lose training accuracy") {
  GridSpec g;
  g.snr_db_values = {-10.0, 0.0, 10.0};
  g.k_values = {1, 16, 32};
  g.pe_values = {0.0, 0.5, 1.0};
  g.trials_per_cell = 60;
  g.num_antennas = 32;
  g.master_seed = 14;
  const auto ds = generate_dataset(g, GenerationMode::fast);
  const auto m1 = fit(ds, 1);
  const auto m3 = fit(ds, 3);
  CHECK(m1.provenance() == g.digest());
  CHECK(m3.depth() <= 3);
  CHECK(evaluate(m3, ds.rows).accuracy >= evaluate(m1, ds.rows).accuracy);
  CHECK(fit(ds, 3) == m3);
}

TEST_CASE("predict follows the threshold rule") {
  const auto m = threshold_model(1.289);
  CHECK(m.predict(64, 2.0) == 1);
  CHECK(m.predict(64, 0.5) == 0);
  CHECK(m.predict(64, 1.289) == 0);
  CHECK(m.predict(64, std::nextafter(1.289, 2.0)) == 1);
  // monotone step over a fine scan
  int last = 0, flips = 0;
  for (int i = 0; i <= 3000; ++i) {
    const int p = m.predict(1, i * 1e-3);
    flips += p != last;
    last = p;
  }
  CHECK(flips == 1);
}

TEST_CASE("model JSON round trip and validation") {
  const auto m = fit(separable_rows(), {}, 2);
  const auto j = m.to_json();
  CHECK(j.at("format") == "pcad-decision-tree");
  CHECK(j.at("version") == 1);
  CHECK(TreeModel::from_json(j) == m);

  testing::TempDir dir("model");
  m.save(dir / "m.json", {{"note", 1}});
  CHECK(TreeModel::load(dir / "m.json") == m);

  auto bad = j;
  bad["format"] = "other";
  CHECK_THROWS_AS(TreeModel::from_json(bad), InvalidArgument);
  bad = j;
  bad["version"] = 2;
  CHECK_THROWS_AS(TreeModel::from_json(bad), InvalidArgument);
  bad = j;
  bad["root"]["left"] = {{"leaf", true}, {"class", 3}, {"counts", {1, 0}}};
  CHECK_THROWS_AS(TreeModel::from_json(bad), InvalidArgument);
  bad = j;
  bad["root"]["feature"] = "snr";
  CHECK_THROWS_AS(TreeModel::from_json(bad), InvalidArgument);
  bad = j;
  bad["max_depth"] = 0;
  CHECK_THROWS_AS(TreeModel::from_json(bad), InvalidArgument);

  testing::spit(dir / "junk.json", "{");
  CHECK_THROWS_AS(TreeModel::load(dir / "junk.json"), ParseError);
  CHECK_THROWS(TreeModel::load(dir / "none.json"));
}

TEST_CASE("features parse") {
  CHECK(parse_feature("energy") == Feature::energy);
  CHECK(parse_feature("num_users") == Feature::num_users);
  CHECK(to_string(Feature::num_users) == "num_users");
  CHECK_THROWS_AS(parse_feature("k"), InvalidArgument);
}

TEST_CASE("metrics arithmetic") {
  const auto m = Metrics::from_counts(997, 3, 998, 2);
  CHECK(m.precision == doctest::Approx(0.997));
  CHECK(m.recall == doctest::Approx(997.0 / 999.0));
  CHECK(m.recall == doctest::Approx(0.998).epsilon(1e-3));
  CHECK(m.accuracy == doctest::Approx(1995.0 / 2000.0));
  CHECK(m.f1 == doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
  CHECK_FALSE(m.degenerate);

  const auto none = Metrics::from_counts(0, 0, 50, 50);
  CHECK(none.accuracy == 0.5);
  CHECK(none.recall == 0.0);
  CHECK(none.precision == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.degenerate);
}

TEST_CASE("evaluate counts the confusion matrix") {
  const auto rows = separable_rows();
  const auto all_zero = threshold_model(100.0);
  const auto m = evaluate(all_zero, rows);
  CHECK(m.accuracy == 0.5);
  CHECK(m.recall == 0.0);
  CHECK(m.tn == 20);
  CHECK(m.fn == 20);
  const std::vector<std::size_t> pick{0, 39};
  const auto sub = evaluate(threshold_model(1.5), rows, pick);
  CHECK(sub.tp == 1);
  CHECK(sub.tn == 1);
  CHECK(sub.accuracy == 1.0);
}

TEST_CASE("grid search cross-validation") {
  SUBCASE("two folds on four rows") {
    Dataset ds;
    ds.rows = {{1, 0.0, 0.0, 1.0, 0}, {1, 0.0, 0.0, 1.1, 0}, {1, 0.0, 1.0, 2.0, 1}, {1, 0.0, 1.0, 2.1, 1}};
    const std::vector<int> depths{1};
    const auto s = grid_search_cv(ds, depths, 2, 1);
    REQUIRE(s.size() == 1);
    CHECK(s[0].per_fold.size() == 2);
    CHECK(s[0].accuracy.mean == 1.0);
    CHECK(s[0].accuracy.stddev == 0.0);
  }
  SUBCASE("means and sample std follow the per-fold metrics") {
    GridSpec g;
    g.snr_db_values = {0.0, 10.0};
    g.k_values = {4, 8};
    g.pe_values = {0.0, 0.5};
    g.trials_per_cell = 40;
    g.num_antennas = 16;
    g.master_seed = 15;
    const auto ds = generate_dataset(g, GenerationMode::fast);
    const std::vector<int> depths{1, 2, 3};
    set_worker_count(1);
    const auto a = grid_search_cv(ds, depths, 5, 3);
    set_worker_count(0);
    const auto b = grid_search_cv(ds, depths, 5, 3);
    REQUIRE(a.size() == 3);
    for (std::size_t d = 0; d < 3; ++d) {
      CHECK(a[d].depth == depths[d]);
      CHECK(a[d].f1.mean == b[d].f1.mean);
      double mean = 0.0;
      for (const auto& m : a[d].per_fold) mean += m.recall;
      mean /= 5.0;
      double ss = 0.0;
      for (const auto& m : a[d].per_fold) ss += (m.recall - mean) * (m.recall - mean);
      CHECK(a[d].recall.mean == doctest::Approx(mean));
      CHECK(a[d].recall.stddev == doctest::Approx(std::sqrt(ss / 4.0)));
    }
  }
  SUBCASE("errors") {
    Dataset ds;
    ds.rows = {{1, 0.0, 0.0, 1.0, 0}, {1, 0.0, 1.0, 2.0, 1}};
    CHECK_THROWS_AS(grid_search_cv(ds, std::vector<int>{}, 2, 1), InvalidArgument);
    CHECK_THROWS_AS(grid_search_cv(ds, std::vector<int>{1}, 2, 1), InvalidArgument);
  }
}

TEST_CASE("depth selection prefers the shallowest competitive depth") {
  std::vector<DepthScore> s(3);
  s[0].depth = 1;
  s[0].f1 = {0.990, 0.002};
  s[1].depth = 2;
  s[1].f1 = {0.991, 0.002};
  s[2].depth = 3;
  s[2].f1 = {0.980, 0.001};
  CHECK(select_depth(s) == 1);
  s[0].f1 = {0.95, 0.001};
  CHECK(select_depth(s) == 2);
  CHECK_THROWS_AS(select_depth(std::vector<DepthScore>{}), InvalidArgument);
}
