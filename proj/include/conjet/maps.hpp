#pragma once

// Evaluable maps u : Omega (subset of R^n) -> R^N with optional analytic first
// and second derivatives.  Supplied derivatives are sanity-gated against
// central finite differences at construction.

#include <functional>
#include <optional>
#include <utility>

#include "conjet/rng.hpp"
#include "conjet/tensor.hpp"

namespace conjet {

struct Domain {
  enum class Kind { ball, box };
  Kind kind = Kind::ball;
  Vec center;     // ball
  double radius = 1.0;
  Vec lo, hi;     // box

  static Domain ball(Vec c, double r) {
    Domain d;
    d.kind = Kind::ball;
    d.center = std::move(c);
    d.radius = r;
    return d;
  }
  static Domain box(Vec lo_, Vec hi_) {
    Domain d;
    d.kind = Kind::box;
    d.lo = std::move(lo_);
    d.hi = std::move(hi_);
    return d;
  }

  int dim() const {
    return kind == Kind::ball ? static_cast<int>(center.size())
                              : static_cast<int>(lo.size());
  }

  bool contains(const Vec& x) const {
    if (kind == Kind::ball) return norm(sub(x, center)) <= radius;
    for (size_t k = 0; k < lo.size(); ++k)
      if (x[k] < lo[k] || x[k] > hi[k]) return false;
    return true;
  }

  /// Distance from x to the boundary (negative outside).
  double interior_margin(const Vec& x) const {
    if (kind == Kind::ball) return radius - norm(sub(x, center));
    double m = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < lo.size(); ++k) {
      m = std::min(m, x[k] - lo[k]);
      m = std::min(m, hi[k] - x[k]);
    }
    return m;
  }

  /// A point well inside, used for sampling anchors.
  Vec anchor() const {
    if (kind == Kind::ball) return center;
    Vec c(lo.size());
    for (size_t k = 0; k < lo.size(); ++k) c[k] = 0.5 * (lo[k] + hi[k]);
    return c;
  }
};

struct MapHandle {
  int n = 0, N = 0;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> grad;   // optional
  std::function<Hess(const Vec&)> hess;  // optional
  Domain domain;

  bool has_grad() const { return static_cast<bool>(grad); }
  bool has_hess() const { return static_cast<bool>(hess); }

  Vec operator()(const Vec& x) const { return eval(x); }
};

namespace detail {

inline Mat fd_gradient(const MapHandle& u, const Vec& x, double h) {
  Mat g(u.N, u.n);
  for (int j = 0; j < u.n; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    Vec up = u.eval(xp), um = u.eval(xm);
    for (int al = 0; al < u.N; ++al) g(al, j) = (up[al] - um[al]) / (2 * h);
  }
  return g;
}

inline Hess fd_hessian(const MapHandle& u, const Vec& x, double h) {
  Hess H(u.N, u.n);
  Vec u0 = u.eval(x);
  for (int i = 0; i < u.n; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    Vec up = u.eval(xp), um = u.eval(xm);
    for (int al = 0; al < u.N; ++al)
      H(al, i, i) = (up[al] - 2 * u0[al] + um[al]) / (h * h);
  }
  for (int i = 0; i < u.n; ++i)
    for (int j = i + 1; j < u.n; ++j) {
      Vec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += h; xpp[j] += h;
      xpm[i] += h; xpm[j] -= h;
      xmp[i] -= h; xmp[j] += h;
      xmm[i] -= h; xmm[j] -= h;
      Vec upp = u.eval(xpp), upm = u.eval(xpm), ump = u.eval(xmp), umm = u.eval(xmm);
      for (int al = 0; al < u.N; ++al) {
        double v = (upp[al] - upm[al] - ump[al] + umm[al]) / (4 * h * h);
        H(al, i, j) = v;
        H(al, j, i) = v;
      }
    }
  return H;
}

}  // namespace detail

/// Sanity gate on supplied derivatives: central finite differences of eval
/// must match them within 1e-5 (relative to the local derivative scale) at
/// 10 deterministic interior points.
inline void check_derivative_gate(const MapHandle& u, double tol = 1e-5) {
  if (!u.has_grad() && !u.has_hess()) return;
  Rng rng(0x5eedfacedULL);
  Vec anchor = u.domain.anchor();
  double r = u.domain.kind == Domain::Kind::ball
                 ? u.domain.radius * 0.5
                 : 0.25 * u.domain.interior_margin(anchor);
  for (int trial = 0; trial < 10; ++trial) {
    Vec x = anchor;
    Vec dir = rng.on_sphere(u.n);
    double rad = r * rng.uniform();
    for (int k = 0; k < u.n; ++k) x[k] += rad * dir[k];
    if (u.domain.interior_margin(x) < 1e-3 * r) continue;
    if (u.has_grad()) {
      Mat g = u.grad(x);
      Mat fd = detail::fd_gradient(u, x, 1e-5 * std::max(1.0, r));
      double scale = std::max(1.0, g.frob_norm());
      if ((g - fd).frob_norm() > tol * scale)
        throw invalid_input("MapHandle: supplied gradient fails the FD gate");
    }
    if (u.has_hess()) {
      Hess H = u.hess(x);
      Hess fd = detail::fd_hessian(u, x, 2e-4 * std::max(1.0, r));
      double scale = std::max(1.0, H.frob_norm());
      if ((H - fd).frob_norm() > 10 * tol * scale)
        throw invalid_input("MapHandle: supplied hessian fails the FD gate");
    }
  }
}

/// Builds a map handle and runs the derivative sanity gate.
inline MapHandle make_map(int n, int N, std::function<Vec(const Vec&)> eval,
                          Domain domain,
                          std::function<Mat(const Vec&)> grad = nullptr,
                          std::function<Hess(const Vec&)> hess = nullptr) {
  MapHandle u;
  u.n = n;
  u.N = N;
  u.eval = std::move(eval);
  u.grad = std::move(grad);
  u.hess = std::move(hess);
  u.domain = std::move(domain);
  check_derivative_gate(u);
  return u;
}

/// Same, for maps whose derivatives are correct by construction (e.g.
/// polynomial handles assembled from their own coefficient data).
inline MapHandle make_map_unchecked(int n, int N,
                                    std::function<Vec(const Vec&)> eval,
                                    Domain domain,
                                    std::function<Mat(const Vec&)> grad = nullptr,
                                    std::function<Hess(const Vec&)> hess = nullptr) {
  MapHandle u;
  u.n = n;
  u.N = N;
  u.eval = std::move(eval);
  u.grad = std::move(grad);
  u.hess = std::move(hess);
  u.domain = std::move(domain);
  return u;
}

/// Scalar projection d^T u as an N=1 map (domain shared with u).
inline MapHandle project_scalar(const MapHandle& u, const Vec& d) {
  MapHandle s;
  s.n = u.n;
  s.N = 1;
  s.domain = u.domain;
  auto ueval = u.eval;
  Vec dir = d;
  s.eval = [ueval, dir](const Vec& x) { return Vec{dot(dir, ueval(x))}; };
  if (u.has_grad()) {
    auto ugrad = u.grad;
    s.grad = [ugrad, dir](const Vec& x) {
      Mat g = ugrad(x);
      Mat r(1, g.cols);
      for (int j = 0; j < g.cols; ++j) {
        double v = 0;
        for (int al = 0; al < g.rows; ++al) v += dir[al] * g(al, j);
        r(0, j) = v;
      }
      return r;
    };
  }
  if (u.has_hess()) {
    auto uhess = u.hess;
    s.hess = [uhess, dir](const Vec& x) {
      Hess H = uhess(x);
      Hess r(1, H.n);
      for (int i = 0; i < H.n; ++i)
        for (int j = 0; j < H.n; ++j) {
          double v = 0;
          for (int al = 0; al < H.N; ++al) v += dir[al] * H(al, i, j);
          r(0, i, j) = v;
        }
      return r;
    };
  }
  return s;
}

/// Projection E u of a map by a symmetric projector (e.g. e-perp u), keeping
/// values in R^N.
inline MapHandle project_map(const MapHandle& u, const SymMat& E) {
  if (E.dim != u.N) throw invalid_input("project_map: projector dimension");
  MapHandle s = u;
  auto ueval = u.eval;
  SymMat P = E;
  s.eval = [ueval, P](const Vec& x) { return P.apply(ueval(x)); };
  if (u.has_grad()) {
    auto ugrad = u.grad;
    s.grad = [ugrad, P](const Vec& x) {
      Mat g = ugrad(x);
      Mat r(g.rows, g.cols);
      for (int al = 0; al < g.rows; ++al)
        for (int j = 0; j < g.cols; ++j) {
          double v = 0;
          for (int be = 0; be < g.rows; ++be) v += P(al, be) * g(be, j);
          r(al, j) = v;
        }
      return r;
    };
  } else {
    s.grad = nullptr;
  }
  if (u.has_hess()) {
    auto uhess = u.hess;
    s.hess = [uhess, P](const Vec& x) {
      Hess H = uhess(x);
      Hess r(H.N, H.n);
      for (int al = 0; al < H.N; ++al)
        for (int i = 0; i < H.n; ++i)
          for (int j = 0; j < H.n; ++j) {
            double v = 0;
            for (int be = 0; be < H.N; ++be) v += P(al, be) * H(be, i, j);
            r(al, i, j) = v;
          }
      return r;
    };
  } else {
    s.hess = nullptr;
  }
  return s;
}

}  // namespace conjet
