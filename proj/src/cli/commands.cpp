#include "cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcad/checks.hpp"
#include "pcad/dtree.hpp"
#include "pcad/error.hpp"
#include "pcad/experiments.hpp"
#include "pcad/parallel.hpp"
#include "pcad/plot.hpp"

namespace pcad::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string digest_of(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(stream_tag(text)));
  return buf;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

bool contains_value(const std::vector<double>& set, double v) {
  for (double s : set) {
    if (quantized_key(s) == quantized_key(v)) return true;
  }
  return false;
}

std::string table3_text(const std::vector<DepthScore>& scores) {
  std::ostringstream os;
  os << "depth  accuracy         precision        recall           f1\n";
  for (const auto& s : scores) {
    os << "  " << s.depth << "    " << fmt(s.accuracy.mean, "%.3f") << " +/- "
       << fmt(s.accuracy.stddev, "%.3f") << "  " << fmt(s.precision.mean, "%.3f") << " +/- "
       << fmt(s.precision.stddev, "%.3f") << "  " << fmt(s.recall.mean, "%.3f") << " +/- "
       << fmt(s.recall.stddev, "%.3f") << "  " << fmt(s.f1.mean, "%.3f") << " +/- "
       << fmt(s.f1.stddev, "%.3f") << '\n';
  }
  return os.str();
}

void write_table3_csv(const std::vector<DepthScore>& scores, const fs::path& path) {
  std::ostringstream os;
  os << "depth,accuracy_mean,accuracy_std,precision_mean,precision_std,recall_mean,recall_std,"
        "f1_mean,f1_std\n";
  for (const auto& s : scores) {
    os << s.depth << ',' << fmt(s.accuracy.mean, "%.9g") << ',' << fmt(s.accuracy.stddev, "%.9g")
       << ',' << fmt(s.precision.mean, "%.9g") << ',' << fmt(s.precision.stddev, "%.9g") << ','
       << fmt(s.recall.mean, "%.9g") << ',' << fmt(s.recall.stddev, "%.9g") << ','
       << fmt(s.f1.mean, "%.9g") << ',' << fmt(s.f1.stddev, "%.9g") << '\n';
  }
  ensure_parent(path);
  write_text_file(path, os.str());
}

int report_checks(const std::string& figure, const std::vector<BandCheck>& checks, std::ostream& out,
                  nlohmann::json& manifest) {
  auto& list = manifest["checks"];
  list = nlohmann::json::array();
  for (const auto& c : checks) {
    out << (c.passed ? "[PASS] " : "[FAIL] ") << figure << ": " << c.name;
    if (!c.detail.empty()) out << " (" << c.detail << ")";
    out << '\n';
    list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return all_passed(checks) ? kExitOk : kExitFailure;
}

}  // namespace

GridSpec resolve_grid(const GenerateOptions& o) {
  GridSpec g;
  if (o.grid == "train") {
    g = default_train_grid(o.antennas, o.seed);
  } else if (o.grid == "test") {
    g = default_test_grid(o.antennas, o.seed);
  } else if (o.grid == "custom") {
    g.num_antennas = o.antennas;
    g.snr_db_values = o.snr_db;
    g.k_values = o.users;
    g.pe_values = o.pe;
    g.master_seed = o.seed;
  } else {
    throw InvalidArgument("unknown grid '" + o.grid + "' (expected train, test or custom)");
  }
  if (o.grid != "custom") {
    if (!o.snr_db.empty()) g.snr_db_values = o.snr_db;
    if (!o.users.empty()) g.k_values = o.users;
    if (!o.pe.empty()) g.pe_values = o.pe;
  }
  g.trials_per_cell = o.trials;
  g.pilot_length = o.pilot_length;
  g.validate();
  return g;
}

int cmd_generate(const GenerateOptions& o, const std::string& config_digest, std::ostream& out) {
  const GridSpec grid = resolve_grid(o);
  const GenerationMode mode = parse_generation_mode(o.mode);
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = generate_dataset(grid, mode);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ensure_parent(o.out);
  save_csv(ds, o.out, {{"config_digest", config_digest}});
  const auto counts = ds.class_counts();
  out << "wrote " << ds.rows.size() << " rows to " << o.out.string() << " (no-PCA " << counts[0]
      << ", PCA " << counts[1] << ", " << (ds.balanced() ? "balanced" : "unbalanced") << ", "
      << fmt(secs, "%.2f") << " s)\n";
  return kExitOk;
}

int cmd_train(const TrainOptions& o, const std::string& config_digest, std::ostream& out) {
  const Dataset ds = load_csv(o.data);
  const auto counts = ds.class_counts();
  if (counts[0] == 0 || counts[1] == 0) {
    throw InvalidArgument("training data holds a single class (no-PCA " + std::to_string(counts[0]) +
                          ", PCA " + std::to_string(counts[1]) + ")");
  }
  if (!o.allow_unbalanced && counts[0] != counts[1]) {
    throw InvalidArgument("training data is unbalanced (no-PCA " + std::to_string(counts[0]) +
                          ", PCA " + std::to_string(counts[1]) +
                          "); pass --allow-unbalanced to train anyway");
  }

  int depth = 0;
  nlohmann::json cv = nullptr;
  if (o.depth) {
    depth = *o.depth;
  } else {
    const auto scores = grid_search_cv(ds, o.depths, o.folds, o.seed);
    depth = select_depth(scores);
    out << "stratified " << o.folds << "-fold cross-validation\n" << table3_text(scores);
    out << "selected depth " << depth << '\n';
    if (!o.report.empty()) write_table3_csv(scores, o.report);
    cv = nlohmann::json::array();
    for (const auto& s : scores) {
      cv.push_back({{"depth", s.depth},
                    {"accuracy", {s.accuracy.mean, s.accuracy.stddev}},
                    {"precision", {s.precision.mean, s.precision.stddev}},
                    {"recall", {s.recall.mean, s.recall.stddev}},
                    {"f1", {s.f1.mean, s.f1.stddev}}});
    }
  }
  const TreeModel model = fit(ds, depth);
  ensure_parent(o.model_out);
  model.save(o.model_out, {{"config_digest", config_digest}, {"cross_validation", cv}});
  const Metrics m = evaluate(model, ds.rows);
  out << "model depth " << model.depth() << " (max " << depth << ") written to "
      << o.model_out.string() << '\n';
  if (auto thr = energy_threshold(model)) out << "root energy threshold " << fmt(*thr) << '\n';
  out << "training accuracy " << fmt(m.accuracy) << ", recall " << fmt(m.recall) << '\n';
  if (model.degenerate()) out << "warning: degenerate single-class model\n";
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const TreeModel model = TreeModel::load(o.model);
  const Dataset ds = load_csv(o.data);

  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const auto& r = ds.rows[i];
    if (!o.filter_snr.empty() && !contains_value(o.filter_snr, r.snr_db)) continue;
    if (!o.filter_pe.empty() && !contains_value(o.filter_pe, r.pe)) continue;
    if (!o.filter_users.empty() &&
        std::find(o.filter_users.begin(), o.filter_users.end(), r.num_users) == o.filter_users.end()) {
      continue;
    }
    selected.push_back(i);
  }
  if (selected.empty()) throw InvalidArgument("filters selected no rows");

  const Metrics m = evaluate(model, ds.rows, selected);
  out << "rows " << selected.size() << "  tp " << m.tp << "  fp " << m.fp << "  tn " << m.tn
      << "  fn " << m.fn << '\n'
      << "accuracy " << fmt(m.accuracy) << "  precision " << fmt(m.precision) << "  recall "
      << fmt(m.recall) << "  f1 " << fmt(m.f1) << (m.degenerate ? "  (degenerate ratio)" : "")
      << '\n';

  if (!o.breakdown.empty()) {
    std::map<std::tuple<int, double, double>, std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i : selected) {
      const auto& r = ds.rows[i];
      auto& c = cells[{r.num_users, r.snr_db, r.pe}];
      ++c.first;
      c.second += static_cast<std::size_t>(model.predict(r));
    }
    std::ostringstream os;
    os << "k,snr_db,pe,rows,flagged,pd\n";
    for (const auto& [key, c] : cells) {
      os << std::get<0>(key) << ',' << fmt(std::get<1>(key), "%.9g") << ','
         << fmt(std::get<2>(key), "%.9g") << ',' << c.first << ',' << c.second << ','
         << fmt(static_cast<double>(c.second) / static_cast<double>(c.first), "%.9g") << '\n';
    }
    ensure_parent(o.breakdown);
    write_text_file(o.breakdown, os.str());
    out << "per-condition breakdown (" << cells.size() << " conditions) written to "
        << o.breakdown.string() << '\n';
  }
  return kExitOk;
}

int cmd_reproduce(const ReproduceOptions& o, const std::string& config_digest, std::ostream& out) {
  static const std::set<std::string> kFigures{"fig4", "fig5", "fig6", "fig7", "fig8", "table3", "all"};
  if (!kFigures.contains(o.figure)) throw InvalidArgument("unknown figure id '" + o.figure + "'");
  if (o.figure == "all") {
    int status = kExitOk;
    for (const char* f : {"table3", "fig4", "fig5", "fig6", "fig7", "fig8"}) {
      ReproduceOptions sub = o;
      sub.figure = f;
      status = std::max(status, cmd_reproduce(sub, config_digest, out));
    }
    return status;
  }

  fs::create_directories(o.out_dir);
  SweepOptions sw;
  sw.seed = o.seed;
  sw.mode = parse_generation_mode(o.mode);
  sw.lrt_reference = parse_lrt_noise_reference(o.lrt_noise);
  if (o.trials) sw.trials = *o.trials;

  nlohmann::json manifest = {{"figure", o.figure},
                             {"config_digest", config_digest},
                             {"seed", o.seed},
                             {"mode", o.mode},
                             {"lrt_noise_reference", o.lrt_noise},
                             {"trials", sw.trials},
                             {"files", nlohmann::json::array()}};
  auto record_file = [&](const fs::path& p) {
    manifest["files"].push_back(p.filename().string());
    out << "wrote " << p.string() << '\n';
  };

  auto trained = [&]() -> TreeModel {
    if (!o.model.empty()) return TreeModel::load(o.model);
    out << "training depth-1 tree on the default grid (M=256)...\n";
    const auto t = train_default_model(256, o.seed, 1, sw.mode);
    out << "  " << t.rows << " rows, " << fmt(t.seconds, "%.2f") << " s";
    if (auto thr = energy_threshold(t.model)) out << ", threshold " << fmt(*thr);
    out << '\n';
    manifest["training_seconds"] = t.seconds;
    return t.model;
  };

  std::vector<BandCheck> checks;
  if (o.figure == "fig4") {
    const auto r = sweep_snr(trained(), SnrSweepSpec{}, sw);
    const auto csv = o.out_dir / "fig4_pd_vs_snr.csv";
    write_sweep_csv(r, csv);
    record_file(csv);
    const auto svg = o.out_dir / "fig4_pd_vs_snr.svg";
    write_text_file(svg, render_line_plot(sweep_plot({r}, {}, "Pd vs SNR (M=256, K=64)", "SNR (dB)")));
    record_file(svg);
    checks = check_fig4(r);
  } else if (o.figure == "fig5") {
    const auto r = sweep_users(trained(), UserSweepSpec{}, sw);
    const auto csv = o.out_dir / "fig5_pd_vs_users.csv";
    write_sweep_csv(r, csv);
    record_file(csv);
    const auto svg = o.out_dir / "fig5_pd_vs_users.svg";
    write_text_file(svg, render_line_plot(sweep_plot({r}, {}, "Pd vs users (M=256, 10 dB)", "K")));
    record_file(svg);
    checks = check_fig5(r);
  } else if (o.figure == "fig6") {
    const auto rs = sweep_pe(trained(), PeSweepSpec{}, sw);
    std::vector<std::string> suffixes;
    for (const auto& r : rs) {
      const std::string snr = r.fixed_parameters.at("snr_db");
      const auto csv = o.out_dir / ("fig6_pd_vs_pe_snr" + snr + ".csv");
      write_sweep_csv(r, csv);
      record_file(csv);
      suffixes.push_back(" @ " + snr + " dB");
    }
    const auto svg = o.out_dir / "fig6_pd_vs_pe.svg";
    write_text_file(svg, render_line_plot(sweep_plot(rs, suffixes, "Pd vs Pe (M=256, K=64)", "Pe")));
    record_file(svg);
    checks = check_fig6(rs);
  } else if (o.figure == "fig7") {
    out << "training one tree per antenna count...\n";
    const auto r = sweep_antennas(AntennaSweepSpec{}, sw);
    const auto csv = o.out_dir / "fig7_pd_vs_antennas.csv";
    write_sweep_csv(r, csv);
    record_file(csv);
    const auto svg = o.out_dir / "fig7_pd_vs_antennas.svg";
    write_text_file(svg, render_line_plot(sweep_plot({r}, {}, "Pd vs antennas (K=64, 10 dB)", "M")));
    record_file(svg);
    checks = check_fig7(r);
  } else if (o.figure == "fig8") {
    HistogramSpec spec;
    if (o.trials) spec.trials = *o.trials;
    const auto h = export_energy_histograms(trained(), spec, sw);
    const auto csv = o.out_dir / "fig8_energy_histograms.csv";
    write_histogram_csv(h, csv);
    record_file(csv);
    const auto svg = o.out_dir / "fig8_energy_histograms.svg";
    write_text_file(svg, render_histograms(h));
    record_file(svg);
    checks = check_fig8(h);
  } else if (o.figure == "table3") {
    const GridSpec grid = training_grid(256, o.seed);
    const Dataset ds = generate_dataset(grid, sw.mode);
    const std::vector<int> depths{1, 2, 3, 4, 5};
    const auto start = std::chrono::steady_clock::now();
    const auto scores = grid_search_cv(ds, depths, 10, o.seed);
    manifest["cv_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << table3_text(scores);
    const auto csv = o.out_dir / "table3_cv.csv";
    write_table3_csv(scores, csv);
    record_file(csv);
    checks = check_table3(scores);
  }

  const int status = report_checks(o.figure, checks, out, manifest);
  write_text_file(o.out_dir / (o.figure + ".manifest.json"), manifest.dump(2) + "\n");
  return o.check ? status : kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pilot-contamination attack detection toolkit"};
  app.set_config("--config", "", "INI config file; one [section] per command, flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (0 = all)");

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Generate a labeled dataset (CSV + meta sidecar)");
  g->add_option("--antennas", gen.antennas, "BS antenna count M")->capture_default_str();
  g->add_option("--grid", gen.grid, "train | test | custom")
      ->check(CLI::IsMember({"train", "test", "custom"}))
      ->capture_default_str();
  g->add_option("--snr", gen.snr_db, "SNR values in dB (override / custom grid)")->delimiter(',');
  g->add_option("--users", gen.users, "K values (override / custom grid)")->delimiter(',');
  g->add_option("--pe", gen.pe, "Eavesdropper powers (override / custom grid)")->delimiter(',');
  g->add_option("--trials", gen.trials, "Trials per grid cell")->capture_default_str();
  g->add_option("--pilot-length", gen.pilot_length, "Pilot length N")->capture_default_str();
  g->add_option("--mode", gen.mode, "fast | full")
      ->check(CLI::IsMember({"fast", "full"}))
      ->capture_default_str();
  g->add_option("--out", gen.out, "Output CSV path")->required();
  g->add_option("--seed", gen.seed, "Master seed")->required();

  TrainOptions tr;
  int train_depth = 0;
  auto* t = app.add_subcommand("train", "Fit a decision tree, with depth grid search by default");
  t->add_option("--data", tr.data, "Training CSV")->required()->check(CLI::ExistingFile);
  auto* depth_opt = t->add_option("--depth", train_depth, "Fixed depth; skips the grid search")
                        ->check(CLI::Range(1, 32));
  t->add_option("--depths", tr.depths, "Depths searched by cross-validation")->delimiter(',');
  t->add_option("--folds", tr.folds, "Cross-validation folds")->capture_default_str();
  t->add_option("--model-out", tr.model_out, "Output model JSON")->required();
  t->add_option("--report", tr.report, "CV report CSV");
  t->add_flag("--allow-unbalanced", tr.allow_unbalanced, "Accept unequal class counts");
  t->add_option("--seed", tr.seed, "Fold seed")->required();

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Score a model on a labeled CSV");
  e->add_option("--model", ev.model, "Model JSON")->required()->check(CLI::ExistingFile);
  e->add_option("--data", ev.data, "Test CSV")->required()->check(CLI::ExistingFile);
  e->add_option("--filter-snr", ev.filter_snr, "Keep only these SNR values")->delimiter(',');
  e->add_option("--filter-k", ev.filter_users, "Keep only these K values")->delimiter(',');
  e->add_option("--filter-pe", ev.filter_pe, "Keep only these Pe values")->delimiter(',');
  e->add_option("--breakdown", ev.breakdown, "Per-condition CSV output");

  ReproduceOptions rp;
  std::size_t rp_trials = 0;
  auto* r = app.add_subcommand("reproduce", "Reproduce a figure or the CV table");
  r->add_option("figure", rp.figure, "fig4 | fig5 | fig6 | fig7 | fig8 | table3 | all")
      ->required()
      ->check(CLI::IsMember({"fig4", "fig5", "fig6", "fig7", "fig8", "table3", "all"}));
  r->add_option("--out-dir", rp.out_dir, "Output directory")->required();
  r->add_option("--model", rp.model, "Pre-trained model (default: train on the fly)")
      ->check(CLI::ExistingFile);
  auto* trials_opt = r->add_option("--trials", rp_trials, "Trials per point override")
                         ->check(CLI::PositiveNumber);
  r->add_option("--mode", rp.mode, "fast | full")
      ->check(CLI::IsMember({"fast", "full"}))
      ->capture_default_str();
  r->add_option("--lrt-noise", rp.lrt_noise, "LRT threshold noise term: received | estimate")
      ->check(CLI::IsMember({"received", "estimate"}))
      ->capture_default_str();
  r->add_flag("--check", rp.check, "Exit 1 if any acceptance band fails");
  r->add_option("--seed", rp.seed, "Master seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  set_worker_count(threads);
  const std::string digest = digest_of(app.config_to_str(true, false));

  try {
    if (*g) return cmd_generate(gen, digest, out);
    if (*t) {
      if (*depth_opt) tr.depth = train_depth;
      return cmd_train(tr, digest, out);
    }
    if (*e) return cmd_evaluate(ev, out);
    if (*r) {
      if (*trials_opt) rp.trials = rp_trials;
      return cmd_reproduce(rp, digest, out);
    }
  } catch (const InvalidArgument& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace pcad::cli
