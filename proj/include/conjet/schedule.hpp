#pragma once

// The numerical stand-in for "as z -> 0": geometric radius schedules, sphere
// sample sets, and the decay rule that decides whether a sampled quantity is
// o(r^p).

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "conjet/rng.hpp"
#include "conjet/tensor.hpp"

namespace conjet {

struct RadiiSchedule {
  double r0 = 0.1;
  double factor = 0.5;
  int count = 10;
  int sphere_samples = 16;  // low-discrepancy points; 2n coordinate dirs are added
  double decay_tol = 1e-3;
  std::vector<double> explicit_radii;  // optional override (e.g. resonant radii)

  void validate() const {
    if (!explicit_radii.empty()) {
      for (double r : explicit_radii)
        if (!(r > 0)) throw invalid_input("RadiiSchedule: radii must be positive");
      return;
    }
    if (!(r0 > 0)) throw invalid_input("RadiiSchedule: r0 must be positive");
    if (!(factor > 0 && factor < 1))
      throw invalid_input("RadiiSchedule: factor must lie in (0,1)");
    if (count < 4) throw invalid_input("RadiiSchedule: count must be >= 4");
  }

  /// Radii in decreasing order.
  std::vector<double> radii() const {
    validate();
    if (!explicit_radii.empty()) {
      std::vector<double> r = explicit_radii;
      std::sort(r.begin(), r.end(), std::greater<double>());
      return r;
    }
    std::vector<double> r(count);
    double cur = r0;
    for (int k = 0; k < count; ++k, cur *= factor) r[k] = cur;
    return r;
  }

  RadiiSchedule with_count(int c) const {
    RadiiSchedule s = *this;
    s.count = c;
    return s;
  }
  RadiiSchedule with_decay_tol(double t) const {
    RadiiSchedule s = *this;
    s.decay_tol = t;
    return s;
  }
};

/// Default schedule: three decades of radii before round-off dominates
/// double precision at second order.
inline RadiiSchedule default_schedule(int n) {
  RadiiSchedule s;
  s.sphere_samples = std::max(2 * n, 16);
  return s;
}

/// Unit directions used at every radius: a deterministic low-discrepancy set
/// plus the 2n coordinate directions.
inline std::vector<Vec> sphere_directions(int n, int sphere_samples) {
  if (sphere_samples < 2 * n)
    throw invalid_input("sphere_samples must be >= 2n");
  std::vector<Vec> dirs;
  if (n > 1) dirs = halton_sphere(n, sphere_samples);
  for (int k = 0; k < n; ++k) {
    dirs.push_back(basis_vec(n, k));
    dirs.push_back(scaled(basis_vec(n, k), -1.0));
  }
  return dirs;
}

// ---------------------------------------------------------------------------
// Decay tables and the o(r^p) decision rule

struct DecayRow {
  double radius = 0;
  double max_ratio = 0;  // max over sphere samples of quantity / r^p
};

using DecayTable = std::vector<DecayRow>;

/// Ratios at or below this floor count as an exact zero signal.
inline constexpr double kRatioFloor = 1e-13;

/// Tables never exceeding this ceiling carry only double-precision
/// cancellation noise (|Q| ~ eps/r^p after exact cancellation), not signal.
inline constexpr double kNoiseCeiling = 1e-10;

struct LogLogFit {
  double slope = 0;      // d log(ratio) / d log(radius)
  int rows_used = 0;     // rows with ratio above the floor
  bool zero_signal = false;
};

/// Least-squares slope of log(ratio) against log(radius), ignoring rows at
/// the zero floor.  A table that is zero almost everywhere is a zero signal
/// (decay holds trivially).
inline LogLogFit fit_loglog(const DecayTable& table, double floor = kRatioFloor) {
  LogLogFit f;
  double peak = 0;
  for (const DecayRow& row : table) peak = std::max(peak, row.max_ratio);
  if (peak <= kNoiseCeiling && floor >= kRatioFloor) {
    f.zero_signal = true;
    f.slope = std::numeric_limits<double>::infinity();
    return f;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const DecayRow& row : table) {
    if (row.max_ratio <= floor) continue;
    double x = std::log(row.radius);
    double y = std::log(row.max_ratio);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++f.rows_used;
  }
  if (f.rows_used < 3) {
    f.zero_signal = true;
    f.slope = std::numeric_limits<double>::infinity();
    return f;
  }
  double denom = f.rows_used * sxx - sx * sx;
  f.slope = std::abs(denom) > 1e-30 ? (f.rows_used * sxy - sx * sy) / denom : 0.0;
  return f;
}

enum class Verdict { member, non_member, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::member: return "member";
    case Verdict::non_member: return "non_member";
    default: return "inconclusive";
  }
}

struct DecayDecision {
  Verdict verdict = Verdict::inconclusive;
  double fitted_exponent = 0;
};

/// o(r^p) at desk scale: ratio below decay_tol at the two finest radii AND a
/// positive fitted log-log slope.  A pure threshold misclassifies slow O(r^p)
/// terms; a pure slope test is noise-sensitive.  Ratios that are identically
/// zero (to round-off) decay trivially.
inline DecayDecision decide_decay(const DecayTable& table, double decay_tol) {
  DecayDecision d;
  if (table.size() < 2) return d;
  LogLogFit fit = fit_loglog(table);
  d.fitted_exponent = fit.slope;
  double finest = table[table.size() - 1].max_ratio;
  double second = table[table.size() - 2].max_ratio;
  // a tolerance at or below the noise ceiling cannot be certified either way
  if (decay_tol <= kNoiseCeiling && finest <= kNoiseCeiling &&
      second <= kNoiseCeiling)
    return d;
  bool below = finest < decay_tol && second < decay_tol;
  bool decays = fit.zero_signal || fit.slope > 0.25;
  d.verdict = (below && decays) ? Verdict::member : Verdict::non_member;
  return d;
}

/// liminf variant: SOME schedule radius realises the decay (Def of approximate
/// jets), in contrast with the eventual decay demanded by contact jets.
inline DecayDecision decide_liminf(const DecayTable& table, double decay_tol) {
  DecayDecision d;
  if (table.empty()) return d;
  double best = std::numeric_limits<double>::infinity();
  for (const DecayRow& row : table) best = std::min(best, row.max_ratio);
  LogLogFit fit = fit_loglog(table);
  d.fitted_exponent = fit.slope;
  d.verdict = best < decay_tol ? Verdict::member : Verdict::non_member;
  return d;
}

/// Monotone modulus envelope: sigma(r_k) = max of the observed ratios at radii
/// <= r_k, floored away from zero.  This is the minimal concrete realisation
/// of the existence statement "T(z) <= tau(|z|) I with tau increasing".
inline std::vector<double> modulus_envelope(const DecayTable& table,
                                            double floor = 1e-12) {
  std::vector<double> sigma(table.size(), floor);
  double running = floor;  // radii are stored coarse -> fine; scan from fine end
  for (size_t k = table.size(); k-- > 0;) {
    running = std::max(running, std::max(table[k].max_ratio, floor));
    sigma[k] = running;
  }
  // one smoothing pass (midpoint averaging); the envelope must keep
  // dominating the raw ratios and stay monotone, so take the max with the
  // running maximum afterwards
  std::vector<double> sm = sigma;
  for (size_t k = 1; k + 1 < sigma.size(); ++k)
    sm[k] = 0.5 * (0.5 * (sigma[k - 1] + sigma[k + 1]) + sigma[k]);
  for (size_t k = 0; k < sm.size(); ++k) sm[k] = std::max(sm[k], sigma[k]);
  for (size_t k = 1; k < sm.size(); ++k) sm[k] = std::min(sm[k], sm[k - 1]);
  return sm;
}

/// Dominating smooth power law c r^q with sigma(r_k) >= envelope_k at every
/// schedule radius; used where a C^2 modulus is required.
struct PowerModulus {
  double c = 1e-12;
  double q = 1.0;
  double operator()(double r) const { return c * std::pow(r, q); }
};

inline PowerModulus fit_power_modulus(const std::vector<double>& radii,
                                      const std::vector<double>& envelope) {
  PowerModulus pm;
  DecayTable t;
  for (size_t k = 0; k < radii.size(); ++k)
    t.push_back({radii[k], envelope[k]});
  LogLogFit fit = fit_loglog(t, 0.0);
  pm.q = fit.zero_signal ? 1.0 : std::min(std::max(fit.slope, 0.05), 4.0);
  pm.c = 0.0;
  for (size_t k = 0; k < radii.size(); ++k)
    pm.c = std::max(pm.c, envelope[k] / std::pow(radii[k], pm.q));
  pm.c = std::max(pm.c, 1e-12);
  return pm;
}

}  // namespace conjet
