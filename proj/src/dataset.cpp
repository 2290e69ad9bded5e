#include "pcad/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "pcad/error.hpp"
#include "pcad/parallel.hpp"

namespace pcad {

namespace {

constexpr std::uint64_t kDatasetStream = stream_tag("dataset-row");
constexpr std::uint64_t kFoldStream = stream_tag("stratified-kfold");
constexpr std::string_view kCsvHeader = "k,snr_db,pe,energy,pca";

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Rows hold exactly what the CSV stores, so a model trained in memory and one
// trained from the saved file are identical.
double round_to_csv_precision(double v) { return std::strtod(format_real(v).c_str(), nullptr); }

std::string fnv_hex(std::string_view text) {
  const std::uint64_t h = stream_tag(text);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> stepped(int first, int last, int step, double divisor) {
  std::vector<double> out;
  for (int i = first; i <= last; i += step) out.push_back(static_cast<double>(i) / divisor);
  return out;
}

}  // namespace

std::string_view to_string(GenerationMode mode) {
  return mode == GenerationMode::fast ? "fast" : "full";
}

GenerationMode parse_generation_mode(std::string_view text) {
  if (text == "fast") return GenerationMode::fast;
  if (text == "full") return GenerationMode::full;
  throw InvalidArgument("unknown generation mode '" + std::string(text) + "'");
}

void GridSpec::validate() const {
  if (snr_db_values.empty()) throw InvalidArgument("grid has no SNR values");
  if (k_values.empty()) throw InvalidArgument("grid has no K values");
  if (pe_values.empty()) throw InvalidArgument("grid has no Pe values");
  if (trials_per_cell == 0) throw InvalidArgument("trials_per_cell must be >= 1");
  if (num_antennas == 0) throw InvalidArgument("grid needs num_antennas >= 1");
  if (pilot_length == 0) throw InvalidArgument("grid needs pilot_length >= 1");
  for (std::size_t k : k_values) {
    if (k == 0) throw InvalidArgument("K values must be >= 1");
    if (k > pilot_length) {
      throw InvalidArgument("K=" + std::to_string(k) + " exceeds pilot length " +
                            std::to_string(pilot_length));
    }
    if (k > num_antennas) {
      throw InvalidArgument("K=" + std::to_string(k) + " exceeds antenna count " +
                            std::to_string(num_antennas));
    }
  }
  for (double pe : pe_values) {
    if (!(pe >= 0.0) || !std::isfinite(pe)) throw InvalidArgument("Pe values must be >= 0");
  }
  for (double snr : snr_db_values) {
    if (!std::isfinite(snr)) throw InvalidArgument("SNR values must be finite");
  }
}

std::size_t GridSpec::positive_pe_count() const {
  return static_cast<std::size_t>(
      std::count_if(pe_values.begin(), pe_values.end(), [](double p) { return p > 0.0; }));
}

bool GridSpec::has_zero_pe() const {
  return std::any_of(pe_values.begin(), pe_values.end(), [](double p) { return p == 0.0; });
}

nlohmann::json GridSpec::to_json() const {
  return {{"snr_db_values", snr_db_values}, {"k_values", k_values},
          {"pe_values", pe_values},         {"trials_per_cell", trials_per_cell},
          {"num_antennas", num_antennas},   {"pilot_length", pilot_length},
          {"master_seed", master_seed}};
}

GridSpec GridSpec::from_json(const nlohmann::json& j) {
  GridSpec g;
  j.at("snr_db_values").get_to(g.snr_db_values);
  j.at("k_values").get_to(g.k_values);
  j.at("pe_values").get_to(g.pe_values);
  j.at("trials_per_cell").get_to(g.trials_per_cell);
  j.at("num_antennas").get_to(g.num_antennas);
  j.at("pilot_length").get_to(g.pilot_length);
  j.at("master_seed").get_to(g.master_seed);
  return g;
}

std::string GridSpec::digest() const { return fnv_hex(to_json().dump()); }

GridSpec default_train_grid(std::size_t antennas, std::uint64_t seed) {
  if (antennas < 16) throw InvalidArgument("default grids need M >= 16");
  GridSpec g;
  g.snr_db_values = stepped(-10, 30, 5, 1.0);
  g.k_values.push_back(1);
  for (std::size_t k = 16; k <= antennas; k += 16) g.k_values.push_back(k);
  g.pe_values = stepped(0, 25, 5, 10.0);
  g.trials_per_cell = 100;
  g.num_antennas = antennas;
  g.pilot_length = kDefaultPilotLength;
  g.master_seed = seed;
  return g;
}

GridSpec default_test_grid(std::size_t antennas, std::uint64_t seed) {
  if (antennas < 16) throw InvalidArgument("default grids need M >= 16");
  GridSpec g;
  g.snr_db_values = stepped(-10, 30, 1, 1.0);
  for (std::size_t k = 1; k <= antennas; ++k) g.k_values.push_back(k);
  g.pe_values = stepped(0, 25, 1, 10.0);
  g.trials_per_cell = 100;
  g.num_antennas = antennas;
  g.pilot_length = kDefaultPilotLength;
  g.master_seed = seed;
  return g;
}

std::array<std::size_t, 2> Dataset::class_counts() const {
  std::array<std::size_t, 2> c{0, 0};
  for (const auto& r : rows) ++c[r.pca != 0 ? 1 : 0];
  return c;
}

bool Dataset::balanced() const {
  const auto c = class_counts();
  return c[0] == c[1];
}

double trial_energy(const UplinkConfig& config, GenerationMode mode, RandomStream& rng,
                    const PilotMatrix* pilots) {
  if (mode == GenerationMode::fast) return energy_feature(synthesize_estimate(config, rng).taps);
  if (pilots == nullptr) {
    const PilotMatrix local = generate_pilots(config.num_users, config.pilot_length);
    return trial_energy(config, mode, rng, &local);
  }
  const auto uplink = simulate_uplink(config, *pilots, rng);
  const auto est = ls_estimate(uplink.signal, pilots->row(config.attacked_user),
                               config.power_of(config.attacked_user), config.attacked_user);
  return energy_feature(est);
}

Dataset generate_dataset(const GridSpec& grid, GenerationMode mode) {
  grid.validate();

  struct Cell {
    std::size_t k;
    double pe;
    double snr;
    std::size_t replicas;
    std::size_t offset;
  };
  const std::size_t zero_replicas = std::max<std::size_t>(1, grid.positive_pe_count());
  std::vector<Cell> cells;
  std::size_t total = 0;
  for (std::size_t k : grid.k_values) {
    for (double pe : grid.pe_values) {
      for (double snr : grid.snr_db_values) {
        const std::size_t replicas = pe > 0.0 ? 1 : zero_replicas;
        cells.push_back({k, pe, snr, replicas, total});
        total += replicas * grid.trials_per_cell;
      }
    }
  }

  Dataset ds;
  ds.grid = grid;
  ds.mode = mode;
  ds.rows.resize(total);

  parallel_for(cells.size(), [&](std::size_t c) {
    const Cell& cell = cells[c];
    const UplinkConfig config = UplinkConfig::from_snr_db(grid.num_antennas, cell.k, cell.snr,
                                                          cell.pe, grid.pilot_length);
    std::optional<PilotMatrix> pilots;
    if (mode == GenerationMode::full) pilots = generate_pilots(cell.k, grid.pilot_length);
    std::size_t out = cell.offset;
    for (std::size_t r = 0; r < cell.replicas; ++r) {
      for (std::size_t t = 0; t < grid.trials_per_cell; ++t) {
        RandomStream rng(derive_seed(grid.master_seed,
                                     {kDatasetStream, cell.k, quantized_key(cell.pe),
                                      quantized_key(cell.snr), r, t}));
        const double e = trial_energy(config, mode, rng, pilots ? &*pilots : nullptr);
        ds.rows[out++] = FeatureRow{static_cast<int>(cell.k), cell.snr, cell.pe,
                                    round_to_csv_precision(e), cell.pe > 0.0 ? 1 : 0};
      }
    }
  });
  return ds;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path, const nlohmann::json& extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << kCsvHeader << '\n';
  for (const auto& r : ds.rows) {
    out << r.num_users << ',' << format_real(r.snr_db) << ',' << format_real(r.pe) << ','
        << format_real(r.energy) << ',' << r.pca << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");

  const auto counts = ds.class_counts();
  nlohmann::json meta = {{"generator_version", kGeneratorVersion},
                         {"grid", ds.grid.to_json()},
                         {"grid_digest", ds.grid.digest()},
                         {"mode", to_string(ds.mode)},
                         {"master_seed", ds.grid.master_seed},
                         {"rows", ds.rows.size()},
                         {"class_counts", {counts[0], counts[1]}}};
  if (extra.is_object()) meta.update(extra);
  std::ofstream side(sidecar_path(path), std::ios::binary);
  if (!side) throw std::runtime_error("cannot write sidecar for '" + path.string() + "'");
  side << meta.dump(2) << '\n';
}

namespace {

template <class T>
T parse_field(std::string_view field, const std::string& source, std::size_t line,
              const char* name) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(source, line, std::string("invalid ") + name + " '" + std::string(field) + "'");
  }
  return value;
}

GridSpec infer_grid(const std::vector<FeatureRow>& rows) {
  std::set<double> snr, pe;
  std::set<std::size_t> k;
  for (const auto& r : rows) {
    snr.insert(r.snr_db);
    pe.insert(r.pe);
    k.insert(static_cast<std::size_t>(r.num_users));
  }
  GridSpec g;
  g.snr_db_values.assign(snr.begin(), snr.end());
  g.k_values.assign(k.begin(), k.end());
  g.pe_values.assign(pe.begin(), pe.end());
  g.trials_per_cell = 1;
  g.num_antennas = g.k_values.empty() ? 0 : g.k_values.back();
  return g;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  const std::string source = path.string();

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(source, line_no, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw ParseError(source, line_no, "expected header '" + std::string(kCsvHeader) + "'");
  }

  Dataset ds;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string_view, 5> fields;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      if (count == fields.size()) throw ParseError(source, line_no, "too many fields");
      fields[count++] = rest.substr(0, comma);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (count != fields.size()) throw ParseError(source, line_no, "expected 5 fields");

    FeatureRow r;
    r.num_users = parse_field<int>(fields[0], source, line_no, "k");
    r.snr_db = parse_field<double>(fields[1], source, line_no, "snr_db");
    r.pe = parse_field<double>(fields[2], source, line_no, "pe");
    r.energy = parse_field<double>(fields[3], source, line_no, "energy");
    r.pca = parse_field<int>(fields[4], source, line_no, "pca");
    if (r.num_users < 1) throw ParseError(source, line_no, "k must be >= 1");
    if (!(r.pe >= 0.0)) throw ParseError(source, line_no, "pe must be >= 0");
    if (!(r.energy >= 0.0) || !std::isfinite(r.energy)) {
      throw ParseError(source, line_no, "energy must be a finite value >= 0");
    }
    if (r.pca != 0 && r.pca != 1) throw ParseError(source, line_no, "pca must be 0 or 1");
    if ((r.pca == 1) != (r.pe > 0.0)) {
      throw ParseError(source, line_no, "pca label disagrees with pe");
    }
    ds.rows.push_back(r);
  }

  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    std::ifstream meta_in(side);
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(meta_in);
      ds.grid = GridSpec::from_json(meta.at("grid"));
      ds.mode = parse_generation_mode(meta.at("mode").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(side.string(), 1, e.what());
    }
    const std::set<double> snr(ds.grid.snr_db_values.begin(), ds.grid.snr_db_values.end());
    const std::set<std::size_t> ks(ds.grid.k_values.begin(), ds.grid.k_values.end());
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
      const auto& r = ds.rows[i];
      if (!snr.contains(r.snr_db) || !ks.contains(static_cast<std::size_t>(r.num_users))) {
        throw ParseError(source, i + 2, "row is not on the provenance grid");
      }
    }
  } else {
    ds.grid = infer_grid(ds.rows);
  }
  return ds;
}

std::vector<Fold> stratified_kfold(std::span<const int> labels, std::size_t folds,
                                   std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("stratified k-fold needs k >= 2");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] != 0 ? 1 : 0].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < folds) {
      throw InvalidArgument("class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) + " rows, fewer than k=" +
                            std::to_string(folds));
    }
  }

  std::vector<std::vector<std::size_t>> members(folds);
  std::size_t dealt = 0;
  for (int c = 0; c < 2; ++c) {
    std::mt19937_64 engine(derive_seed(seed, {kFoldStream, static_cast<std::uint64_t>(c)}));
    auto idx = by_class[c];
    std::shuffle(idx.begin(), idx.end(), engine);
    // Class 1 continues the deal where class 0 stopped so fold sizes differ by at most one.
    for (std::size_t i : idx) members[dealt++ % folds].push_back(i);
  }

  std::vector<Fold> out(folds);
  std::vector<std::size_t> owner(labels.size());
  for (std::size_t f = 0; f < folds; ++f) {
    for (std::size_t i : members[f]) owner[i] = f;
  }
  for (std::size_t f = 0; f < folds; ++f) {
    out[f].validation = std::move(members[f]);
    std::sort(out[f].validation.begin(), out[f].validation.end());
    out[f].train.reserve(labels.size() - out[f].validation.size());
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t f = 0; f < folds; ++f) {
      if (owner[i] != f) out[f].train.push_back(i);
    }
  }
  return out;
}

std::vector<Fold> stratified_kfold(const Dataset& ds, std::size_t folds, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(ds.rows.size());
  for (const auto& r : ds.rows) labels.push_back(r.pca);
  return stratified_kfold(labels, folds, seed);
}

}  // namespace pcad
