#pragma once

// Worked example maps with closed-form jet structure, used as oracles by the
// test batteries and exposed as named builtins by the CLI.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "conjet/jets.hpp"
#include "conjet/maps.hpp"
#include "conjet/tensor.hpp"

namespace conjet {

// ---------------------------------------------------------------------------
// Polynomial handles

struct Monomial {
  double coef = 0;
  std::vector<int> exps;  // one exponent per coordinate
};

struct Poly {
  int n = 1;
  std::vector<Monomial> terms;

  double eval(const Vec& x) const {
    double s = 0;
    for (const Monomial& m : terms) {
      double t = m.coef;
      for (int k = 0; k < n; ++k)
        for (int e = 0; e < m.exps[k]; ++e) t *= x[k];
      s += t;
    }
    return s;
  }

  Poly derivative(int k) const {
    Poly d;
    d.n = n;
    for (const Monomial& m : terms) {
      if (m.exps[k] == 0) continue;
      Monomial md = m;
      md.coef *= m.exps[k];
      md.exps[k] -= 1;
      d.terms.push_back(md);
    }
    return d;
  }
};

/// The quadratic map z -> value + P (z - x0) + X : (z - x0) (x) (z - x0) / 2
/// with exact derivatives; the second-order Taylor polynomial of anything.
inline MapHandle quadratic_map(const Vec& x0, const Vec& value, const Mat& P,
                               const Hess& X, Domain dom) {
  int n = static_cast<int>(x0.size());
  int N = static_cast<int>(value.size());
  auto eval = [x0, value, P, X](const Vec& x) {
    Vec z = sub(x, x0);
    Vec r = add(value, P.apply(z));
    return add(r, scaled(X.contract_pair(z, z), 0.5));
  };
  auto grad = [x0, P, X](const Vec& x) {
    Vec z = sub(x, x0);
    Mat g = P;
    for (int al = 0; al < X.N; ++al)
      for (int j = 0; j < X.n; ++j) {
        double v = 0;
        for (int i = 0; i < X.n; ++i) v += X(al, j, i) * z[i];
        g(al, j) += v;
      }
    return g;
  };
  auto hess = [X](const Vec&) { return X; };
  return make_map_unchecked(n, N, eval, std::move(dom), grad, hess);
}

// ---------------------------------------------------------------------------
// The one-dimensional corner map (two linear branches, one with a quadratic
// part): u(z) = -A z on z <= 0 and B z + C z^2 / 2 on z > 0, with A + B != 0.
//
// Its jets at the origin are empty except along one distinguished axis
// direction; along it the first jets form the segment
// { (B-A)/2 + t (A+B)/2 : t in [-1, 1] } and the second jets are stratified
// by t.  Direct evaluation of the defining inequality (and its scalar
// reduction to sub/superjets) fixes the distinguished direction as
// -(A+B)/|A+B| for this orientation of the branches.

struct CornerMapOracle {
  Vec A, B, C;
  int N = 0;

  CornerMapOracle(Vec A_, Vec B_, Vec C_)
      : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)),
        N(static_cast<int>(A.size())) {
    if (B.size() != A.size() || C.size() != A.size())
      throw invalid_input("corner map: dimension mismatch");
    if (norm(add(A, B)) < kZeroVecTol)
      throw invalid_input("corner map: A + B must be nonzero");
  }

  Vec axis() const { return add(A, B); }
  Direction distinguished_direction() const {
    return Direction::normalised(scaled(axis(), -1.0));
  }

  MapHandle map(double domain_radius = 1.0) const {
    Vec A_ = A, B_ = B, C_ = C;
    auto eval = [A_, B_, C_](const Vec& x) {
      double z = x[0];
      Vec r(A_.size());
      if (z <= 0)
        for (size_t k = 0; k < r.size(); ++k) r[k] = -A_[k] * z;
      else
        for (size_t k = 0; k < r.size(); ++k) r[k] = B_[k] * z + 0.5 * C_[k] * z * z;
      return r;
    };
    return make_map_unchecked(1, N, eval, Domain::ball(Vec{0.0}, domain_radius));
  }

  /// The candidate gradient at parameter t.
  Mat gradient_at(double t) const {
    Mat P(N, 1);
    for (int k = 0; k < N; ++k) P(k, 0) = 0.5 * (B[k] - A[k]) + 0.5 * t * (A[k] + B[k]);
    return P;
  }

  Hess hessian_from(const Vec& X) const {
    Hess h(N, 1);
    for (int k = 0; k < N; ++k) h(k, 0, 0) = X[k];
    return h;
  }

  /// Recovers t from a candidate P, or nan if P is off the segment axis.
  double parameter_of(const Mat& P, double tol = 1e-9) const {
    Vec ax = axis();
    Vec d(N);
    for (int k = 0; k < N; ++k) d[k] = P(k, 0) - 0.5 * (B[k] - A[k]);
    double t = 2.0 * dot(d, ax) / dot(ax, ax);
    Vec res = sub(d, scaled(ax, 0.5 * t));
    if (norm(res) > tol * std::max(1.0, norm(d)))
      return std::numeric_limits<double>::quiet_NaN();
    return t;
  }

  bool direction_matches(const Direction& xi, double tol = 1e-9) const {
    return norm(sub(xi.vec(), distinguished_direction().vec())) <= tol;
  }

  /// Analytic first-jet membership predicate.
  bool order1_member(const Direction& xi, const Mat& P, double tol = 1e-9) const {
    if (!direction_matches(xi, tol)) return false;
    double t = parameter_of(P, tol);
    return std::isfinite(t) && std::abs(t) <= 1.0 + tol;
  }

  /// Analytic second-jet membership predicate: interior t admits every X,
  /// t = +1 admits X = C - s (A+B) and t = -1 admits X = -s (A+B), s >= 0.
  bool order2_member(const Direction& xi, const Mat& P, const Vec& X,
                     double tol = 1e-9) const {
    if (!direction_matches(xi, tol)) return false;
    double t = parameter_of(P, tol);
    if (!std::isfinite(t) || std::abs(t) > 1.0 + tol) return false;
    if (std::abs(t) < 1.0 - tol) return true;
    Vec ax = axis();
    Vec base = (t > 0) ? C : Vec(N, 0.0);
    Vec d = sub(X, base);  // must equal -s (A+B) with s >= 0
    double s = -dot(d, ax) / dot(ax, ax);
    Vec res = add(d, scaled(ax, s));
    return norm(res) <= tol * std::max(1.0, norm(d)) && s >= -tol;
  }
};

inline CornerMapOracle example19_standard() {
  return CornerMapOracle(Vec{1.0, 0.0}, Vec{0.0, 1.0}, Vec{0.0, 0.0});
}

// ---------------------------------------------------------------------------
// The instability example: u(z) = (-|z|^{1+alpha}, 0) with second contact
// e1-map psi(z) = (0, k z^2) at the origin, for any k != 0.

struct InstabilityExample {
  double alpha = 0.5;
  double k = 1.0;

  Direction xi() const { return Direction(Vec{1.0, 0.0}); }

  MapHandle map(double domain_radius = 1.0) const {
    double a = alpha;
    auto eval = [a](const Vec& x) {
      return Vec{-std::pow(std::abs(x[0]), 1.0 + a), 0.0};
    };
    return make_map_unchecked(1, 2, eval, Domain::ball(Vec{0.0}, domain_radius));
  }

  MapHandle psi(double domain_radius = 4.0) const {
    Hess X(2, 1);
    X(1, 0, 0) = 2.0 * k;
    return quadratic_map(Vec{0.0}, Vec{0.0, 0.0}, Mat(2, 1), X,
                         Domain::ball(Vec{0.0}, domain_radius));
  }

  /// The jet carried by psi: P = 0, X with e2-component 2k.
  JetCandidate jet() const {
    Hess X(2, 1);
    X(1, 0, 0) = 2.0 * k;
    return JetCandidate(Vec{0.0}, xi(), Mat(2, 1), X);
  }
};

// ---------------------------------------------------------------------------
// Oscillatory scalar maps with nontrivial approximate derivatives

/// u(z) = z cos(1/|z|), u(0) = 0: the approximate first jets at 0 fill the
/// interval [-1, 1] although u'(0) does not exist.
inline MapHandle remark44_map(double domain_radius = 1.0) {
  auto eval = [](const Vec& x) {
    double z = x[0];
    if (z == 0.0) return Vec{0.0};
    return Vec{z * std::cos(1.0 / std::abs(z))};
  };
  return make_map_unchecked(1, 1, eval, Domain::ball(Vec{0.0}, domain_radius));
}

/// Resonant radii r_k = 1/(theta + 2 pi k) with cos(theta) = clamp(P):
/// the subsequence along which z cos(1/|z|) realises slope P.
inline std::vector<double> resonant_radii(double P, int count, int k0 = 2) {
  double theta = std::acos(std::min(std::max(P, -1.0), 1.0));
  std::vector<double> r(count);
  for (int k = 0; k < count; ++k)
    r[k] = 1.0 / (theta + 2.0 * 3.14159265358979323846 * (k0 + k));
  return r;
}

/// u(z) = -|z| cos^2(1/z), u(0) = 0: both J^{1,+}u(0) and A^1 u(0) equal {0}.
inline MapHandle remark48_map(double domain_radius = 1.0) {
  auto eval = [](const Vec& x) {
    double z = x[0];
    if (z == 0.0) return Vec{0.0};
    double c = std::cos(1.0 / z);
    return Vec{-std::abs(z) * c * c};
  };
  return make_map_unchecked(1, 1, eval, Domain::ball(Vec{0.0}, domain_radius));
}

// ---------------------------------------------------------------------------
// Smooth fixtures with closed-form derivatives

/// u(x) = sin(x_1) v for a fixed vector v.
inline MapHandle sine_map(int n, const Vec& v, double domain_radius = 1.0) {
  int N = static_cast<int>(v.size());
  auto eval = [v](const Vec& x) { return scaled(v, std::sin(x[0])); };
  auto grad = [v, n, N](const Vec& x) {
    Mat g(N, n);
    double c = std::cos(x[0]);
    for (int al = 0; al < N; ++al) g(al, 0) = v[al] * c;
    return g;
  };
  auto hess = [v, n, N](const Vec& x) {
    Hess h(N, n);
    double s = -std::sin(x[0]);
    for (int al = 0; al < N; ++al) h(al, 0, 0) = v[al] * s;
    return h;
  };
  return make_map(n, N, eval, Domain::ball(Vec(n, 0.0), domain_radius), grad, hess);
}

/// u_alpha(x) = c_alpha |x|^2: the classical solution family for the
/// power-Laplacian systems; Delta u_alpha = 2 n c_alpha.
inline MapHandle squared_norm_map(int n, const Vec& coeff,
                                  double domain_radius = 2.0) {
  int N = static_cast<int>(coeff.size());
  auto eval = [coeff](const Vec& x) { return scaled(coeff, dot(x, x)); };
  auto grad = [coeff, n, N](const Vec& x) {
    Mat g(N, n);
    for (int al = 0; al < N; ++al)
      for (int j = 0; j < n; ++j) g(al, j) = 2.0 * coeff[al] * x[j];
    return g;
  };
  auto hess = [coeff, n, N](const Vec&) {
    Hess h(N, n);
    for (int al = 0; al < N; ++al)
      for (int i = 0; i < n; ++i) h(al, i, i) = 2.0 * coeff[al];
    return h;
  };
  return make_map(n, N, eval, Domain::ball(Vec(n, 0.0), domain_radius), grad, hess);
}

/// A mixed trig/polynomial family: component al is
/// a_al sin(w . x) + b_al |x|^2 / 2 + c_al . x.
inline MapHandle trig_poly_map(int n, int N, const Vec& a, const Vec& w,
                               const Vec& b, const Mat& c,
                               double domain_radius = 1.5) {
  auto eval = [a, w, b, c, n, N](const Vec& x) {
    Vec r(N);
    double s = std::sin(dot(w, x)), q = 0.5 * dot(x, x);
    for (int al = 0; al < N; ++al) {
      r[al] = a[al] * s + b[al] * q;
      for (int j = 0; j < n; ++j) r[al] += c(al, j) * x[j];
    }
    return r;
  };
  auto grad = [a, w, b, c, n, N](const Vec& x) {
    Mat g(N, n);
    double cs = std::cos(dot(w, x));
    for (int al = 0; al < N; ++al)
      for (int j = 0; j < n; ++j)
        g(al, j) = a[al] * cs * w[j] + b[al] * x[j] + c(al, j);
    return g;
  };
  auto hess = [a, w, b, n, N](const Vec& x) {
    Hess h(N, n);
    double sn = -std::sin(dot(w, x));
    for (int al = 0; al < N; ++al)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = a[al] * sn * w[i] * w[j];
          if (i == j) v += b[al];
          h(al, i, j) = v;
        }
    return h;
  };
  return make_map(n, N, eval, Domain::ball(Vec(n, 0.0), domain_radius), grad, hess);
}

/// Deterministic battery of smooth fixtures across dimensions.
inline std::vector<MapHandle> smooth_fixture_battery() {
  std::vector<MapHandle> out;
  out.push_back(sine_map(1, Vec{1.0, 0.5}));
  out.push_back(sine_map(2, Vec{0.3, -0.7}));
  out.push_back(squared_norm_map(2, Vec{1.0, 1.0}));
  out.push_back(squared_norm_map(2, Vec{0.5, -0.25}));
  out.push_back(squared_norm_map(3, Vec{0.2, 0.4}));
  out.push_back(trig_poly_map(2, 2, Vec{0.4, -0.2}, Vec{1.0, 0.5}, Vec{0.1, 0.3},
                              Mat::from(2, 2, {0.2, -0.1, 0.05, 0.4})));
  out.push_back(trig_poly_map(2, 3, Vec{0.25, 0.0, -0.5}, Vec{0.7, -0.3},
                              Vec{0.2, -0.1, 0.0},
                              Mat::from(3, 2, {0.1, 0.0, -0.2, 0.3, 0.0, 0.15})));
  out.push_back(trig_poly_map(3, 2, Vec{0.3, 0.2}, Vec{0.5, 0.4, -0.2},
                              Vec{-0.15, 0.25},
                              Mat::from(2, 3, {0.1, 0.2, 0.0, -0.3, 0.05, 0.1})));
  out.push_back(sine_map(1, Vec{-1.0}));
  out.push_back(trig_poly_map(1, 1, Vec{0.6}, Vec{1.3}, Vec{-0.4},
                              Mat::from(1, 1, {0.7})));
  return out;
}

}  // namespace conjet
