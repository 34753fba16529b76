#pragma once

// Deterministic, counter-based randomness.  Every draw is a pure function of
// (seed, stream, counter), so parallel execution order cannot change results
// and every report is replayable from its recorded seed.

#include <cmath>
#include <cstdint>
#include <vector>

#include "conjet/tensor.hpp"

namespace conjet {

inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : key_(mix64(seed ^ mix64(stream))) {}

  /// Independent child stream; the parent's counter is unaffected.
  Rng child(uint64_t stream) const { return Rng(key_, mix64(stream) + 1); }

  uint64_t next_u64() { return mix64(key_ + 0x632be59bd9b4e019ULL * ++ctr_); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform(), u2 = uniform();
    u1 = std::max(u1, 1e-300);
    double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(6.283185307179586 * u2);
    have_cached_ = true;
    return r * std::cos(6.283185307179586 * u2);
  }

  Vec normal_vec(int d) {
    Vec v(d);
    for (double& x : v) x = normal();
    return v;
  }

  Vec on_sphere(int d) {
    for (;;) {
      Vec v = normal_vec(d);
      double nv = norm(v);
      if (nv > 1e-8) return scaled(v, 1.0 / nv);
    }
  }

  Direction direction(int d) { return Direction(on_sphere(d)); }

  Mat mat(int r, int c, double scale = 1.0) {
    Mat m(r, c);
    for (double& x : m.a) x = scale * normal();
    return m;
  }

  /// B^T B with B standard normal, optionally rescaled to a target norm.
  SymMat psd(int d, double target_norm = -1.0) {
    Mat b = mat(d, d);
    SymMat s(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double v = 0;
        for (int k = 0; k < d; ++k) v += b(k, i) * b(k, j);
        s(i, j) = v;
      }
    if (target_norm >= 0.0) {
      double f = s.frob_norm();
      if (f > 1e-300) s *= target_norm / f;
      if (target_norm == 0.0) s = SymMat(d);
    }
    return s;
  }

  SymMat sym(int d, double scale = 1.0) {
    SymMat s(d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) s.set(i, j, scale * normal());
    return s;
  }

  Hess hess(int N, int n, double scale = 1.0) {
    Hess h(N, n);
    for (int al = 0; al < N; ++al)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) h.set_sym(al, i, j, scale * normal());
    return h;
  }

  /// Random element of R_s^{Nn x Nn} (main symmetry only).
  BiForm biform(int N, int n, double scale = 1.0) {
    BiForm b(N, n);
    for (int al = 0; al < N; ++al)
      for (int i = 0; i < n; ++i)
        for (int be = 0; be < N; ++be)
          for (int j = 0; j < n; ++j) {
            if (al * n + i > be * n + j) continue;
            double v = scale * normal();
            b.at(al, i, be, j) = v;
            b.at(be, j, al, i) = v;
          }
    return b;
  }

 private:
  uint64_t key_;
  uint64_t ctr_ = 0;
  bool have_cached_ = false;
  double cached_ = 0;
};

// ---------------------------------------------------------------------------
// Low-discrepancy point sets

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// relative error below 1.2e-9 -- enough for quasi-random direction sets).
inline double inv_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > phigh) {
    double q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

inline double halton(uint64_t index, uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

/// Deterministic low-discrepancy set on S^{d-1}: Halton points mapped through
/// the inverse normal CDF per axis, then normalised.  For d = 1 this is the
/// alternating pair {+1, -1}.
inline std::vector<Vec> halton_sphere(int d, int count, uint64_t skip = 32) {
  static const uint64_t primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                    23, 29, 31, 37, 41, 43, 47, 53};
  std::vector<Vec> pts;
  pts.reserve(count);
  if (d == 1) {
    for (int k = 0; k < count; ++k) pts.push_back(Vec{k % 2 == 0 ? 1.0 : -1.0});
    return pts;
  }
  uint64_t idx = skip;
  while (static_cast<int>(pts.size()) < count) {
    Vec v(d);
    for (int j = 0; j < d; ++j) {
      double u = halton(idx, primes[j]);
      u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
      v[j] = inv_normal_cdf(u);
    }
    ++idx;
    double nv = norm(v);
    if (nv > 1e-8) pts.push_back(scaled(v, 1.0 / nv));
  }
  return pts;
}

}  // namespace conjet
