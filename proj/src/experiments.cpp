#include "pcad/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "pcad/error.hpp"
#include "pcad/parallel.hpp"

namespace pcad {

namespace {

constexpr std::uint64_t kSweepStream = stream_tag("sweep-trial");
constexpr std::uint64_t kTrainStream = stream_tag("default-train-grid");

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const TreeModel& require(const std::optional<TreeModel>& model) {
  if (!model) throw ModelRequired("this sweep needs a trained decision-tree model");
  return *model;
}

struct Condition {
  double value;
  double pe;
  UplinkConfig config;
};

// Evaluates every detector on the same draws of each condition.
SweepResult run_conditions(std::string variable, std::vector<double> values,
                           const std::vector<Condition>& conditions,
                           const std::vector<std::vector<const Detector*>>& detectors_per_condition,
                           const SweepOptions& options) {
  if (options.trials == 0) throw InvalidArgument("sweeps need trials >= 1");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i - 1] < values[i])) throw InvalidArgument("swept values must be strictly increasing");
  }
  std::vector<std::vector<SweepRecord>> per_condition(conditions.size());
  parallel_for(conditions.size(), [&](std::size_t c) {
    const Condition& cond = conditions[c];
    const auto energies = condition_energies(cond.config, options.trials, options.seed, options.mode);
    for (const Detector* d : detectors_per_condition[c]) {
      std::size_t hits = 0;
      for (double e : energies) hits += static_cast<std::size_t>(d->decide(cond.config, e));
      per_condition[c].push_back({d->id(), cond.pe, cond.value, hits, energies.size(),
                                  static_cast<double>(hits) / static_cast<double>(energies.size())});
    }
  });
  SweepResult out;
  out.variable = std::move(variable);
  out.values = std::move(values);
  for (auto& recs : per_condition) {
    for (auto& r : recs) out.records.push_back(std::move(r));
  }
  return out;
}

void add_common(SweepResult& r, const SweepOptions& o) {
  r.fixed_parameters["trials"] = std::to_string(o.trials);
  r.fixed_parameters["seed"] = std::to_string(o.seed);
  r.fixed_parameters["mode"] = std::string(to_string(o.mode));
  r.fixed_parameters["lrt_noise_reference"] = std::string(to_string(o.lrt_reference));
  r.fixed_parameters["pilot_length"] = std::to_string(o.pilot_length);
}

}  // namespace

std::optional<double> energy_threshold(const TreeModel& model) {
  if (model.nodes().empty()) return std::nullopt;
  const TreeNode& root = model.root();
  if (root.leaf || root.feature != Feature::energy) return std::nullopt;
  return root.threshold;
}

std::vector<double> condition_energies(const UplinkConfig& condition, std::size_t trials,
                                       std::uint64_t seed, GenerationMode mode) {
  condition.validate();
  std::optional<PilotMatrix> pilots;
  if (mode == GenerationMode::full) pilots = generate_pilots(condition.num_users, condition.pilot_length);
  std::vector<double> out(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    RandomStream rng(derive_seed(seed, {kSweepStream, condition.num_antennas, condition.num_users,
                                        condition.pilot_length,
                                        quantized_key(condition.eavesdropper_power),
                                        condition.attacked_user, t}));
    out[t] = trial_energy(condition, mode, rng, pilots ? &*pilots : nullptr);
  }
  return out;
}

std::vector<PointEstimate> detection_probability(const Detector& detector,
                                                 std::span<const UplinkConfig> conditions,
                                                 std::size_t trials, std::uint64_t seed,
                                                 GenerationMode mode) {
  if (trials == 0) throw InvalidArgument("detection_probability needs trials >= 1");
  std::vector<PointEstimate> out(conditions.size());
  parallel_for(conditions.size(), [&](std::size_t c) {
    const auto energies = condition_energies(conditions[c], trials, seed, mode);
    std::size_t hits = 0;
    for (double e : energies) hits += static_cast<std::size_t>(detector.decide(conditions[c], e));
    out[c] = {hits, trials, static_cast<double>(hits) / static_cast<double>(trials)};
  });
  return out;
}

std::vector<double> SweepResult::curve(const std::string& detector, double pe) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(at(detector, pe, v).pd);
  return out;
}

const SweepRecord& SweepResult::at(const std::string& detector, double pe, double value) const {
  for (const auto& r : records) {
    if (r.detector == detector && quantized_key(r.pe) == quantized_key(pe) &&
        quantized_key(r.value) == quantized_key(value)) {
      return r;
    }
  }
  throw InvalidArgument("no sweep record for " + detector + " pe=" + fmt_real(pe) +
                        " value=" + fmt_real(value));
}

std::vector<std::string> SweepResult::detectors() const {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.detector) == out.end()) out.push_back(r.detector);
  }
  return out;
}

std::vector<double> SweepResult::pe_values() const {
  std::set<double> pes;
  for (const auto& r : records) pes.insert(r.pe);
  return {pes.begin(), pes.end()};
}

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "variable,value,detector,pe,pd,trials\n";
  for (const auto& r : result.records) {
    out << result.variable << ',' << fmt_real(r.value) << ',' << r.detector << ','
        << fmt_real(r.pe) << ',' << fmt_real(r.pd) << ',' << r.trials << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<double> decimal_range(int first, int last, int step, double divisor) {
  if (step <= 0) throw InvalidArgument("range step must be positive");
  std::vector<double> out;
  for (int i = first; i <= last; i += step) out.push_back(static_cast<double>(i) / divisor);
  return out;
}

GridSpec training_grid(std::size_t antennas, std::uint64_t seed) {
  return default_train_grid(antennas, derive_seed(seed, {kTrainStream, antennas}));
}

TrainedModel train_default_model(std::size_t antennas, std::uint64_t seed, int depth,
                                 GenerationMode mode) {
  const auto start = std::chrono::steady_clock::now();
  const GridSpec grid = training_grid(antennas, seed);
  const Dataset ds = generate_dataset(grid, mode);
  TrainedModel out{fit(ds, depth), ds.rows.size(), 0.0};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SweepResult sweep_snr(const std::optional<TreeModel>& model, const SnrSweepSpec& spec,
                      const SweepOptions& options) {
  const TreeDetector dt(require(model));
  const LrtBaselineDetector lrt(options.lrt_reference);
  std::vector<Condition> conds;
  for (double snr : spec.snr_db) {
    for (double pe : spec.pe_values) {
      conds.push_back({snr, pe,
                       UplinkConfig::from_snr_db(spec.antennas, spec.users, snr, pe,
                                                 options.pilot_length)});
    }
  }
  const std::vector<std::vector<const Detector*>> dets(conds.size(), {&dt, &lrt});
  auto r = run_conditions("snr_db", spec.snr_db, conds, dets, options);
  r.fixed_parameters["antennas"] = std::to_string(spec.antennas);
  r.fixed_parameters["users"] = std::to_string(spec.users);
  add_common(r, options);
  return r;
}

SweepResult sweep_users(const std::optional<TreeModel>& model, const UserSweepSpec& spec,
                        const SweepOptions& options) {
  const TreeDetector dt(require(model));
  const LrtBaselineDetector lrt(options.lrt_reference);
  std::vector<double> values;
  std::vector<Condition> conds;
  for (std::size_t k : spec.users) {
    values.push_back(static_cast<double>(k));
    for (double pe : spec.pe_values) {
      conds.push_back({static_cast<double>(k), pe,
                       UplinkConfig::from_snr_db(spec.antennas, k, spec.snr_db, pe,
                                                 options.pilot_length)});
    }
  }
  const std::vector<std::vector<const Detector*>> dets(conds.size(), {&dt, &lrt});
  auto r = run_conditions("users", std::move(values), conds, dets, options);
  r.fixed_parameters["antennas"] = std::to_string(spec.antennas);
  r.fixed_parameters["snr_db"] = fmt_real(spec.snr_db);
  add_common(r, options);
  return r;
}

std::vector<SweepResult> sweep_pe(const std::optional<TreeModel>& model, const PeSweepSpec& spec,
                                  const SweepOptions& options) {
  const TreeDetector dt(require(model));
  const LrtBaselineDetector lrt(options.lrt_reference);
  std::vector<SweepResult> out;
  for (double snr : spec.snr_db) {
    std::vector<Condition> conds;
    for (double pe : spec.pe_values) {
      conds.push_back({pe, pe,
                       UplinkConfig::from_snr_db(spec.antennas, spec.users, snr, pe,
                                                 options.pilot_length)});
    }
    const std::vector<std::vector<const Detector*>> dets(conds.size(), {&dt, &lrt});
    auto r = run_conditions("pe", spec.pe_values, conds, dets, options);
    r.fixed_parameters["antennas"] = std::to_string(spec.antennas);
    r.fixed_parameters["users"] = std::to_string(spec.users);
    r.fixed_parameters["snr_db"] = fmt_real(snr);
    add_common(r, options);
    out.push_back(std::move(r));
  }
  return out;
}

SweepResult sweep_antennas(const AntennaSweepSpec& spec, const SweepOptions& options,
                           std::vector<TreeModel>* models) {
  std::vector<std::unique_ptr<TreeDetector>> trees;
  for (std::size_t m : spec.antennas) {
    trees.push_back(std::make_unique<TreeDetector>(
        train_default_model(m, options.seed, spec.depth, options.mode).model));
    if (models) models->push_back(trees.back()->model());
  }
  const LrtBaselineDetector lrt(options.lrt_reference);
  std::vector<double> values;
  std::vector<Condition> conds;
  std::vector<std::vector<const Detector*>> dets;
  for (std::size_t i = 0; i < spec.antennas.size(); ++i) {
    const std::size_t m = spec.antennas[i];
    values.push_back(static_cast<double>(m));
    for (double pe : spec.pe_values) {
      conds.push_back({static_cast<double>(m), pe,
                       UplinkConfig::from_snr_db(m, spec.users, spec.snr_db, pe,
                                                 options.pilot_length)});
      dets.push_back({trees[i].get(), &lrt});
    }
  }
  auto r = run_conditions("antennas", std::move(values), conds, dets, options);
  r.fixed_parameters["users"] = std::to_string(spec.users);
  r.fixed_parameters["snr_db"] = fmt_real(spec.snr_db);
  add_common(r, options);
  return r;
}

HistogramExport export_energy_histograms(const TreeModel& model, const HistogramSpec& spec,
                                         const SweepOptions& options) {
  if (spec.bins < 10) throw InvalidArgument("histograms need at least 10 bins");
  if (spec.trials == 0) throw InvalidArgument("histograms need trials >= 1");
  const LrtBaseline lrt(options.lrt_reference);

  HistogramExport out;
  out.dt_threshold = energy_threshold(model).value_or(std::numeric_limits<double>::quiet_NaN());
  out.antennas = spec.antennas;
  out.users = spec.users;
  out.trials = spec.trials;

  for (double snr : spec.snr_db) {
    std::vector<std::vector<double>> samples;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double pe : spec.pe_values) {
      const auto cfg = UplinkConfig::from_snr_db(spec.antennas, spec.users, snr, pe,
                                                 options.pilot_length);
      samples.push_back(condition_energies(cfg, spec.trials, options.seed, options.mode));
      const auto [mn, mx] = std::minmax_element(samples.back().begin(), samples.back().end());
      lo = std::min(lo, *mn);
      hi = std::max(hi, *mx);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    std::vector<double> edges(spec.bins + 1);
    for (std::size_t b = 0; b <= spec.bins; ++b) {
      edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(spec.bins);
    }
    const double lrt_thr =
        lrt.detector_for(spec.antennas, options.pilot_length, noise_variance_from_snr_db(snr))
            .normalized_threshold();
    for (std::size_t p = 0; p < spec.pe_values.size(); ++p) {
      HistogramCell cell;
      cell.snr_db = snr;
      cell.pe = spec.pe_values[p];
      cell.pca = cell.pe > 0.0 ? 1 : 0;
      cell.edges = edges;
      cell.counts.assign(spec.bins, 0);
      cell.lrt_threshold = lrt_thr;
      for (double e : samples[p]) {
        auto b = static_cast<std::size_t>((e - lo) / (hi - lo) * static_cast<double>(spec.bins));
        ++cell.counts[std::min(b, spec.bins - 1)];
      }
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

void write_histogram_csv(const HistogramExport& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "snr_db,pe,pca,bin_lo,bin_hi,count,lrt_threshold,dt_threshold\n";
  for (const auto& c : h.cells) {
    for (std::size_t b = 0; b < c.counts.size(); ++b) {
      out << fmt_real(c.snr_db) << ',' << fmt_real(c.pe) << ',' << c.pca << ','
          << fmt_real(c.edges[b]) << ',' << fmt_real(c.edges[b + 1]) << ',' << c.counts[b] << ','
          << fmt_real(c.lrt_threshold) << ',' << fmt_real(h.dt_threshold) << '\n';
    }
  }
}

}  // namespace pcad
