#include "pcad/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pcad/error.hpp"
#include "pcad/lrt.hpp"

namespace pcad {

namespace {

constexpr double kGridEps = 1e-9;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Checks pd of one series over the values selected by `in_range`, against
// [lo, hi]. Detail lists the first violation.
template <class Pred>
BandCheck band(std::string name, const SweepResult& r, const std::string& det, double pe,
               Pred in_range, double lo, double hi) {
  BandCheck c{std::move(name), true, ""};
  std::size_t n = 0;
  double worst = std::numeric_limits<double>::quiet_NaN();
  for (double v : r.values) {
    if (!in_range(v)) continue;
    ++n;
    const double pd = r.at(det, pe, v).pd;
    if (pd < lo || pd > hi) {
      if (c.passed) c.detail = r.variable + "=" + fmt(v) + " pd=" + fmt(pd);
      c.passed = false;
    }
    if (std::isnan(worst) || std::abs(pd - (lo + hi) / 2) > std::abs(worst - (lo + hi) / 2)) worst = pd;
  }
  if (n == 0) {
    c.passed = false;
    c.detail = "no points in range";
  } else if (c.passed) {
    c.detail = std::to_string(n) + " points, extreme pd=" + fmt(worst);
  }
  return c;
}

auto any_value = [](double) { return true; };

const SweepResult* find_snr(std::span<const SweepResult> sweeps, double snr) {
  for (const auto& s : sweeps) {
    auto it = s.fixed_parameters.find("snr_db");
    if (it != s.fixed_parameters.end() && std::abs(std::stod(it->second) - snr) < kGridEps) return &s;
  }
  return nullptr;
}

// Sweeps over Pe index their single series by pe == value.
BandCheck pe_band(std::string name, const SweepResult& r, const std::string& det, double pe_lo,
                  double pe_hi, double lo, double hi) {
  BandCheck c{std::move(name), true, ""};
  std::size_t n = 0;
  for (double v : r.values) {
    if (v < pe_lo - kGridEps || v > pe_hi + kGridEps) continue;
    ++n;
    const double pd = r.at(det, v, v).pd;
    if (pd < lo || pd > hi) {
      if (c.passed) c.detail = "Pe=" + fmt(v) + " pd=" + fmt(pd);
      c.passed = false;
    }
  }
  if (n == 0) {
    c.passed = false;
    c.detail = "no points in range";
  } else if (c.passed) {
    c.detail = std::to_string(n) + " points";
  }
  return c;
}

}  // namespace

bool all_passed(std::span<const BandCheck> checks) {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::vector<BandCheck> check_fig4(const SweepResult& r) {
  return {
      band("DT pd >= 0.99 at Pe=1, all SNR", r, "dt", 1.0, any_value, 0.99, 1.0),
      band("DT false alarm <= 0.01 at Pe=0", r, "dt", 0.0, any_value, 0.0, 0.01),
      band("LRT false alarm <= 0.01 at Pe=0", r, "lrt", 0.0, any_value, 0.0, 0.01),
      band("LRT pd <= 0.05 for SNR <= -2 dB", r, "lrt", 1.0,
           [](double s) { return s <= -2.0 + kGridEps; }, 0.0, 0.05),
      band("LRT pd >= 0.99 for SNR >= 6 dB", r, "lrt", 1.0,
           [](double s) { return s >= 6.0 - kGridEps; }, 0.99, 1.0),
  };
}

std::vector<BandCheck> check_fig5(const SweepResult& r) {
  return {
      band("DT pd = 1 at Pe=1, all K", r, "dt", 1.0, any_value, 1.0, 1.0),
      band("LRT pd = 1 at Pe=1, all K", r, "lrt", 1.0, any_value, 1.0, 1.0),
      band("DT pd = 0 at Pe=0, all K", r, "dt", 0.0, any_value, 0.0, 0.0),
      band("LRT pd = 0 at Pe=0, all K", r, "lrt", 0.0, any_value, 0.0, 0.0),
  };
}

std::vector<BandCheck> check_fig6(std::span<const SweepResult> sweeps) {
  const SweepResult* low = find_snr(sweeps, 0.0);
  const SweepResult* high = find_snr(sweeps, 10.0);
  if (!low || !high) return {{"Pe sweeps at 0 and 10 dB present", false, "missing SNR"}};
  std::vector<BandCheck> out{
      pe_band("0 dB: DT pd >= 0.99 for Pe >= 0.5", *low, "dt", 0.5, 1e9, 0.99, 1.0),
      pe_band("0 dB: LRT pd <= 0.10 for Pe <= 0.8", *low, "lrt", 0.0, 0.8, 0.0, 0.10),
      pe_band("0 dB: LRT pd >= 0.99 for Pe >= 1.6", *low, "lrt", 1.6, 1e9, 0.99, 1.0),
  };
  BandCheck same{"10 dB DT curve within 0.05 of 0 dB curve", true, ""};
  double worst = 0.0;
  for (double v : low->values) {
    const double d = std::abs(low->at("dt", v, v).pd - high->at("dt", v, v).pd);
    if (d > worst) worst = d;
    if (d > 0.05 + kGridEps && same.passed) {
      same.passed = false;
      same.detail = "Pe=" + fmt(v) + " diff=" + fmt(d);
    }
  }
  if (same.passed) same.detail = "max diff " + fmt(worst);
  out.push_back(same);
  return out;
}

std::vector<BandCheck> check_fig7(const SweepResult& r) {
  std::vector<BandCheck> out{
      band("DT pd >= 0.95 at Pe=0.5 for M >= 160", r, "dt", 0.5,
           [](double m) { return m >= 160.0; }, 0.95, 1.0),
      band("DT false alarm <= 0.05 for M >= 80", r, "dt", 0.0,
           [](double m) { return m >= 80.0; }, 0.0, 0.05),
      band("LRT false alarm = 0 for all M", r, "lrt", 0.0, any_value, 0.0, 0.0),
  };
  double sum_low = 0.0, sum_high = 0.0;
  std::size_t n_low = 0, n_high = 0, lrt_below = 0;
  for (double m : r.values) {
    const double pd = r.at("dt", 0.5, m).pd;
    if (m < 150.0) {
      sum_low += pd;
      ++n_low;
    } else {
      sum_high += pd;
      ++n_high;
    }
    if (r.at("lrt", 0.5, m).pd <= 0.75) ++lrt_below;
  }
  const double mean_low = n_low ? sum_low / n_low : 0.0;
  const double mean_high = n_high ? sum_high / n_high : 0.0;
  out.push_back({"DT mean pd at Pe=0.5 lower for M < 150 than M >= 150",
                 n_low > 0 && n_high > 0 && mean_low < mean_high,
                 "M<150: " + fmt(mean_low) + ", M>=150: " + fmt(mean_high)});
  out.push_back({"LRT pd <= 0.75 at Pe=0.5 for at least half the M grid",
                 2 * lrt_below >= r.values.size(),
                 std::to_string(lrt_below) + " of " + std::to_string(r.values.size())});
  return out;
}

std::vector<BandCheck> check_fig8(const HistogramExport& h) {
  std::vector<BandCheck> out;
  out.push_back({"DT threshold in [1.15, 1.45]", h.dt_threshold >= 1.15 && h.dt_threshold <= 1.45,
                 "threshold " + fmt(h.dt_threshold)});
  for (const auto& c : h.cells) {
    if (std::abs(c.snr_db - 10.0) > kGridEps) continue;
    if (c.pe != 0.0 && std::abs(c.pe - 1.0) > kGridEps) continue;
    double mass = 0.0, first = 0.0;
    for (std::size_t b = 0; b < c.counts.size(); ++b) {
      const double centre = 0.5 * (c.edges[b] + c.edges[b + 1]);
      mass += static_cast<double>(c.counts[b]);
      first += centre * static_cast<double>(c.counts[b]);
    }
    const double mean = first / mass;
    const auto v = hypothesis_variances(noise_variance_from_snr_db(10.0), kDefaultPilotLength, c.pe);
    const double expected = c.pe > 0.0 ? v.sigma1_sq : v.sigma0_sq;
    const double bin_width = c.edges[1] - c.edges[0];
    // Histogram mean is exact up to half a bin plus Monte Carlo error.
    const double tol = 0.5 * bin_width + 4.0 * expected / std::sqrt(static_cast<double>(h.antennas) * mass);
    out.push_back({"10 dB, Pe=" + fmt(c.pe) + " centred near " + fmt(expected),
                   std::abs(mean - expected) <= tol, "histogram mean " + fmt(mean)});
  }
  return out;
}

std::vector<BandCheck> check_table3(std::span<const DepthScore> scores) {
  std::vector<BandCheck> out;
  auto near = [](double v, double target) { return v >= 0.99 && std::abs(v - target) <= 0.005 + kGridEps; };
  for (const auto& s : scores) {
    const std::string d = "depth " + std::to_string(s.depth) + ": ";
    out.push_back({d + "accuracy >= 0.99, within 0.005 of 0.998", near(s.accuracy.mean, 0.998),
                   fmt(s.accuracy.mean) + " +/- " + fmt(s.accuracy.stddev)});
    out.push_back({d + "precision >= 0.99, within 0.005 of 0.997", near(s.precision.mean, 0.997),
                   fmt(s.precision.mean) + " +/- " + fmt(s.precision.stddev)});
    out.push_back({d + "recall >= 0.99, within 0.005 of 0.998", near(s.recall.mean, 0.998),
                   fmt(s.recall.mean) + " +/- " + fmt(s.recall.stddev)});
    out.push_back({d + "F1 within 0.005 of 0.998", std::abs(s.f1.mean - 0.998) <= 0.005 + kGridEps,
                   fmt(s.f1.mean) + " +/- " + fmt(s.f1.stddev)});
  }
  return out;
}

std::vector<BandCheck> check_depth1_threshold(const TreeModel& model) {
  const auto thr = energy_threshold(model);
  if (!thr) return {{"depth-1 root splits on energy", false, "root is not an energy split"}};
  return {{"depth-1 root splits on energy", true, ""},
          {"threshold in [1.15, 1.45]", *thr >= 1.15 && *thr <= 1.45, "threshold " + fmt(*thr)}};
}

}  // namespace pcad
