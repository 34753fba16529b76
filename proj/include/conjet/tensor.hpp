#pragma once

// Dense multilinear algebra over R^n, R^N, R^{N x n}, R^N (x) R_s^{n x n} and
// R_s^{Nn x Nn}: contractions, symmetrised products, projections, spectra.
// Dimensions are runtime parameters, capped at 16; everything is stored dense.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace conjet {

inline constexpr int kMaxDim = 16;
inline constexpr double kUnitTol = 1e-12;
inline constexpr double kZeroVecTol = 1e-14;

/// Rejected caller input: dimension mismatch or violated type invariant.
struct invalid_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Disagreement between formulations that are provably equivalent.
/// Signals a bug in this library, never a property of the input.
struct diagnostic_error : std::logic_error {
  using std::logic_error::logic_error;
};

using Vec = std::vector<double>;

inline void check_dim(int d, const char* what) {
  if (d < 1 || d > kMaxDim)
    throw invalid_input(std::string(what) + " must be in [1, 16], got " +
                        std::to_string(d));
}

// ---------------------------------------------------------------------------
// vector helpers

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw invalid_input("dot: size mismatch");
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec scaled(const Vec& a, double c) {
  Vec r = a;
  for (double& x : r) x *= c;
  return r;
}

inline Vec add(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw invalid_input("add: size mismatch");
  Vec r = a;
  for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw invalid_input("sub: size mismatch");
  Vec r = a;
  for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  return r;
}

inline Vec basis_vec(int dim, int k) {
  Vec e(dim, 0.0);
  e[k] = 1.0;
  return e;
}

inline bool all_finite(const Vec& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

/// sgn(a) = a/|a|, with sgn(a) := 0 when |a| < 1e-14.
inline Vec sgn(const Vec& a) {
  double na = norm(a);
  if (na < kZeroVecTol) return Vec(a.size(), 0.0);
  return scaled(a, 1.0 / na);
}

inline double sgn(double a) {
  if (std::abs(a) < kZeroVecTol) return 0.0;
  return a > 0 ? 1.0 : -1.0;
}

// ---------------------------------------------------------------------------
// Direction: unit vector in R^N

class Direction {
 public:
  explicit Direction(Vec v) : v_(std::move(v)) {
    check_dim(static_cast<int>(v_.size()), "Direction dimension");
    double nv = norm(v_);
    if (std::abs(nv - 1.0) > kUnitTol)
      throw invalid_input("Direction must be unit within 1e-12, |v| = " +
                          std::to_string(nv));
  }

  /// Normalises v; rejects near-zero input.
  static Direction normalised(const Vec& v) {
    double nv = norm(v);
    if (nv < kZeroVecTol) throw invalid_input("Direction: zero vector");
    return Direction(scaled(v, 1.0 / nv));
  }

  int dim() const { return static_cast<int>(v_.size()); }
  double operator[](int k) const { return v_[static_cast<size_t>(k)]; }
  const Vec& vec() const { return v_; }
  Direction operator-() const {
    Vec w = v_;
    for (double& x : w) x = -x;
    return Direction(std::move(w));
  }

 private:
  Vec v_;
};

// ---------------------------------------------------------------------------
// Mat: N x n real matrix (the shape of gradient matrices P)

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {
    check_dim(r, "Mat rows");
    check_dim(c, "Mat cols");
  }
  static Mat from(int r, int c, std::vector<double> data) {
    Mat m(r, c);
    if (data.size() != m.a.size()) throw invalid_input("Mat: data size");
    m.a = std::move(data);
    return m;
  }

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  Vec row(int i) const {
    Vec r(cols);
    for (int j = 0; j < cols; ++j) r[j] = (*this)(i, j);
    return r;
  }
  /// Matrix-vector product.
  Vec apply(const Vec& x) const {
    if (static_cast<int>(x.size()) != cols) throw invalid_input("Mat::apply: size");
    Vec y(rows, 0.0);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }
  double frob_norm() const {
    double s = 0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
  }
  Mat& operator+=(const Mat& o) {
    if (rows != o.rows || cols != o.cols) throw invalid_input("Mat +=: shape");
    for (size_t k = 0; k < a.size(); ++k) a[k] += o.a[k];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    if (rows != o.rows || cols != o.cols) throw invalid_input("Mat -=: shape");
    for (size_t k = 0; k < a.size(); ++k) a[k] -= o.a[k];
    return *this;
  }
  Mat& operator*=(double c) {
    for (double& x : a) x *= c;
    return *this;
  }
};

inline Mat operator+(Mat a, const Mat& b) { return a += b; }
inline Mat operator-(Mat a, const Mat& b) { return a -= b; }
inline Mat operator*(double c, Mat a) { return a *= c; }

inline Mat outer(const Vec& a, const Vec& b) {
  Mat m(static_cast<int>(a.size()), static_cast<int>(b.size()));
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) m(i, j) = a[i] * b[j];
  return m;
}

/// Left action of an N x N matrix on the first index of P.
inline Mat matmul(const Mat& A, const Mat& P) {
  if (A.cols != P.rows) throw invalid_input("matmul: shape");
  Mat r(A.rows, P.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      double aik = A(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < P.cols; ++j) r(i, j) += aik * P(k, j);
    }
  return r;
}

// ---------------------------------------------------------------------------
// SymMat: symmetric square matrix, kept exactly symmetric in storage

struct SymMat {
  int dim = 0;
  std::vector<double> a;  // row-major full storage

  SymMat() = default;
  explicit SymMat(int d) : dim(d), a(static_cast<size_t>(d) * d, 0.0) {
    // Flattened bi-forms live in dimension N*n, so the cap is 16^2.
    if (d < 1 || d > kMaxDim * kMaxDim)
      throw invalid_input("SymMat dim must be in [1, 256]");
  }

  static SymMat identity(int d) {
    SymMat s(d);
    for (int i = 0; i < d; ++i) s(i, i) = 1.0;
    return s;
  }

  /// Builds from a general square matrix; rejects asymmetry beyond tol
  /// (relative to the max entry), then symmetrises exactly.
  static SymMat from(const Mat& m, double tol = 1e-14) {
    if (m.rows != m.cols) throw invalid_input("SymMat: not square");
    double scale = 0;
    for (double x : m.a) scale = std::max(scale, std::abs(x));
    SymMat s(m.rows);
    for (int i = 0; i < m.rows; ++i)
      for (int j = 0; j < m.cols; ++j) {
        if (std::abs(m(i, j) - m(j, i)) > tol * std::max(1.0, scale))
          throw invalid_input("SymMat: asymmetric input");
        s(i, j) = 0.5 * (m(i, j) + m(j, i));
      }
    return s;
  }

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * dim + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * dim + j]; }

  void set(int i, int j, double v) {
    (*this)(i, j) = v;
    (*this)(j, i) = v;
  }

  Vec apply(const Vec& x) const {
    if (static_cast<int>(x.size()) != dim) throw invalid_input("SymMat::apply: size");
    Vec y(dim, 0.0);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }

  /// Quadratic form x^T A x.
  double quad(const Vec& x) const { return dot(x, apply(x)); }

  double frob_norm() const {
    double s = 0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
  }

  SymMat& operator+=(const SymMat& o) {
    if (dim != o.dim) throw invalid_input("SymMat +=: shape");
    for (size_t k = 0; k < a.size(); ++k) a[k] += o.a[k];
    return *this;
  }
  SymMat& operator-=(const SymMat& o) {
    if (dim != o.dim) throw invalid_input("SymMat -=: shape");
    for (size_t k = 0; k < a.size(); ++k) a[k] -= o.a[k];
    return *this;
  }
  SymMat& operator*=(double c) {
    for (double& x : a) x *= c;
    return *this;
  }
};

inline SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
inline SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
inline SymMat operator*(double c, SymMat a) { return a *= c; }

/// Frobenius pairing A : X between symmetric matrices.
inline double frob_inner(const SymMat& A, const SymMat& X) {
  if (A.dim != X.dim) throw invalid_input("frob_inner: shape");
  double s = 0;
  for (size_t k = 0; k < A.a.size(); ++k) s += A.a[k] * X.a[k];
  return s;
}

// ---------------------------------------------------------------------------
// Hess: X in R^N (x) R_s^{n x n}, trailing indices exactly symmetric

struct Hess {
  int N = 0, n = 0;
  std::vector<double> a;          // (alpha, i, j) row-major
  double asymmetry_defect = 0.0;  // recorded at construction from raw data

  Hess() = default;
  Hess(int N_, int n_)
      : N(N_), n(n_), a(static_cast<size_t>(N_) * n_ * n_, 0.0) {
    check_dim(N_, "Hess N");
    check_dim(n_, "Hess n");
  }

  /// Symmetrises raw data by (X + X^T)/2 in the trailing indices and records
  /// the asymmetry defect; defect beyond 1e-10 (relative) is an error.
  static Hess from_raw(int N_, int n_, const std::vector<double>& data,
                       double tol = 1e-10) {
    Hess h(N_, n_);
    if (data.size() != h.a.size()) throw invalid_input("Hess: data size");
    double scale = 0;
    for (double x : data) scale = std::max(scale, std::abs(x));
    double defect = 0;
    for (int al = 0; al < N_; ++al)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          size_t ij = (static_cast<size_t>(al) * n_ + i) * n_ + j;
          size_t ji = (static_cast<size_t>(al) * n_ + j) * n_ + i;
          defect = std::max(defect, std::abs(data[ij] - data[ji]));
          h.a[ij] = 0.5 * (data[ij] + data[ji]);
        }
    h.asymmetry_defect = defect;
    if (defect > tol * std::max(1.0, scale))
      throw invalid_input("Hess: trailing-index asymmetry defect " +
                          std::to_string(defect));
    return h;
  }

  double& operator()(int al, int i, int j) {
    return a[(static_cast<size_t>(al) * n + i) * n + j];
  }
  double operator()(int al, int i, int j) const {
    return a[(static_cast<size_t>(al) * n + i) * n + j];
  }
  /// Writes entry (al,i,j) and its mirror (al,j,i).
  void set_sym(int al, int i, int j, double v) {
    (*this)(al, i, j) = v;
    (*this)(al, j, i) = v;
  }

  /// Component slice X_alpha as an n x n symmetric matrix.
  SymMat component(int al) const {
    SymMat s(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s(i, j) = (*this)(al, i, j);
    return s;
  }

  /// X : z (x) w, an N-vector.
  Vec contract_pair(const Vec& z, const Vec& w) const {
    if (static_cast<int>(z.size()) != n || static_cast<int>(w.size()) != n)
      throw invalid_input("Hess::contract_pair: size");
    Vec r(N, 0.0);
    for (int al = 0; al < N; ++al)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r[al] += (*this)(al, i, j) * z[i] * w[j];
    return r;
  }

  double frob_norm() const {
    double s = 0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
  }

  Hess& operator+=(const Hess& o) {
    if (N != o.N || n != o.n) throw invalid_input("Hess +=: shape");
    for (size_t k = 0; k < a.size(); ++k) a[k] += o.a[k];
    return *this;
  }
  Hess& operator-=(const Hess& o) {
    if (N != o.N || n != o.n) throw invalid_input("Hess -=: shape");
    for (size_t k = 0; k < a.size(); ++k) a[k] -= o.a[k];
    return *this;
  }
  Hess& operator*=(double c) {
    for (double& x : a) x *= c;
    return *this;
  }
};

inline Hess operator+(Hess a, const Hess& b) { return a += b; }
inline Hess operator-(Hess a, const Hess& b) { return a -= b; }
inline Hess operator*(double c, Hess a) { return a *= c; }

/// eta (x) A for eta in R^N, A symmetric n x n.
inline Hess tensor_dir(const Vec& eta, const SymMat& A) {
  Hess h(static_cast<int>(eta.size()), A.dim);
  for (int al = 0; al < h.N; ++al)
    for (int i = 0; i < h.n; ++i)
      for (int j = 0; j < h.n; ++j) h(al, i, j) = eta[al] * A(i, j);
  return h;
}

// ---------------------------------------------------------------------------
// BiForm: Xi in R_s^{Nn x Nn}, i.e. Xi_{ai,bj} = Xi_{bj,ai}

struct BiForm {
  int N = 0, n = 0;
  std::vector<double> a;  // (alpha, i, beta, j)

  BiForm() = default;
  BiForm(int N_, int n_)
      : N(N_), n(n_), a(static_cast<size_t>(N_) * n_ * N_ * n_, 0.0) {
    check_dim(N_, "BiForm N");
    check_dim(n_, "BiForm n");
  }

  static BiForm from_raw(int N_, int n_, const std::vector<double>& data,
                         double tol = 1e-10) {
    BiForm b(N_, n_);
    if (data.size() != b.a.size()) throw invalid_input("BiForm: data size");
    b.a = data;
    double scale = 0;
    for (double x : data) scale = std::max(scale, std::abs(x));
    for (int al = 0; al < N_; ++al)
      for (int i = 0; i < n_; ++i)
        for (int be = 0; be < N_; ++be)
          for (int j = 0; j < n_; ++j) {
            double d = b.at(al, i, be, j) - b.at(be, j, al, i);
            if (std::abs(d) > tol * std::max(1.0, scale))
              throw invalid_input("BiForm: missing Xi_{ai,bj} = Xi_{bj,ai} symmetry");
          }
    b.symmetrise_main();
    return b;
  }

  double& at(int al, int i, int be, int j) {
    return a[((static_cast<size_t>(al) * n + i) * N + be) * n + j];
  }
  double at(int al, int i, int be, int j) const {
    return a[((static_cast<size_t>(al) * n + i) * N + be) * n + j];
  }

  void symmetrise_main() {
    for (int al = 0; al < N; ++al)
      for (int i = 0; i < n; ++i)
        for (int be = 0; be < N; ++be)
          for (int j = 0; j < n; ++j) {
            if (al * n + i > be * n + j) continue;
            double v = 0.5 * (at(al, i, be, j) + at(be, j, al, i));
            at(al, i, be, j) = v;
            at(be, j, al, i) = v;
          }
  }

  /// Membership in the separately symmetric space of Eq. alpha<->beta swaps.
  bool separately_symmetric(double tol = 1e-12) const {
    double scale = 0;
    for (double x : a) scale = std::max(scale, std::abs(x));
    for (int al = 0; al < N; ++al)
      for (int i = 0; i < n; ++i)
        for (int be = 0; be < N; ++be)
          for (int j = 0; j < n; ++j)
            if (std::abs(at(al, i, be, j) - at(be, i, al, j)) >
                tol * std::max(1.0, scale))
              return false;
    return true;
  }

  /// Quadratic form Xi : P (x) P.
  double quad(const Mat& P) const {
    if (P.rows != N || P.cols != n) throw invalid_input("BiForm::quad: shape");
    double s = 0;
    for (int al = 0; al < N; ++al)
      for (int i = 0; i < n; ++i)
        for (int be = 0; be < N; ++be)
          for (int j = 0; j < n; ++j)
            s += at(al, i, be, j) * P(al, i) * P(be, j);
    return s;
  }

  /// Rank-one value Xi : (eta (x) w) (x) (eta (x) w).
  double rank_one_value(const Vec& eta, const Vec& w) const {
    return quad(outer(eta, w));
  }

  /// Nn x Nn flattening with row index alpha*n + i.
  SymMat flatten() const {
    SymMat s(N * n);
    for (int al = 0; al < N; ++al)
      for (int i = 0; i < n; ++i)
        for (int be = 0; be < N; ++be)
          for (int j = 0; j < n; ++j)
            s(al * n + i, be * n + j) = at(al, i, be, j);
    return s;
  }

  double frob_norm() const {
    double s = 0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
  }

  BiForm& operator+=(const BiForm& o) {
    if (N != o.N || n != o.n) throw invalid_input("BiForm +=: shape");
    for (size_t k = 0; k < a.size(); ++k) a[k] += o.a[k];
    return *this;
  }
  BiForm& operator-=(const BiForm& o) {
    if (N != o.N || n != o.n) throw invalid_input("BiForm -=: shape");
    for (size_t k = 0; k < a.size(); ++k) a[k] -= o.a[k];
    return *this;
  }
  BiForm& operator*=(double c) {
    for (double& x : a) x *= c;
    return *this;
  }
};

inline BiForm operator+(BiForm a, const BiForm& b) { return a += b; }
inline BiForm operator-(BiForm a, const BiForm& b) { return a -= b; }
inline BiForm operator*(double c, BiForm a) { return a *= c; }

// ---------------------------------------------------------------------------
// Symmetrised tensor products (the "vee" calculus)

/// a v b = (a (x) b + b (x) a) / 2.
inline SymMat vee(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw invalid_input("vee: size mismatch");
  SymMat s(static_cast<int>(a.size()));
  for (int i = 0; i < s.dim; ++i)
    for (int j = 0; j < s.dim; ++j) s(i, j) = 0.5 * (a[i] * b[j] + b[i] * a[j]);
  return s;
}

/// xi v X in R_s^{Nn x Nn}: (xi v X)_{ai,bj} = (xi_a X_{bij} + xi_b X_{aij})/2.
inline BiForm vee_hess(const Direction& xi, const Hess& X) {
  if (xi.dim() != X.N) throw invalid_input("vee_hess: dimension mismatch");
  BiForm b(X.N, X.n);
  for (int al = 0; al < X.N; ++al)
    for (int i = 0; i < X.n; ++i)
      for (int be = 0; be < X.N; ++be)
        for (int j = 0; j < X.n; ++j)
          b.at(al, i, be, j) = 0.5 * (xi[al] * X(be, i, j) + xi[be] * X(al, i, j));
  return b;
}

inline SymMat project_along(const Direction& xi) {
  return vee(xi.vec(), xi.vec());
}

inline SymMat project_perp(const Direction& xi) {
  SymMat p = SymMat::identity(xi.dim());
  for (int i = 0; i < p.dim; ++i)
    for (int j = 0; j < p.dim; ++j) p(i, j) -= xi[i] * xi[j];
  return p;
}

/// xi-perpendicular part v - (xi.v) xi.
inline Vec perp_part(const Direction& xi, const Vec& v) {
  double c = dot(xi.vec(), v);
  Vec r = v;
  for (size_t k = 0; k < r.size(); ++k) r[k] -= c * xi[static_cast<int>(k)];
  return r;
}

/// xi^T P, a row in R^n.
inline Vec axis_part(const Direction& xi, const Mat& P) {
  if (xi.dim() != P.rows) throw invalid_input("axis_part: dimension mismatch");
  Vec r(P.cols, 0.0);
  for (int j = 0; j < P.cols; ++j)
    for (int al = 0; al < P.rows; ++al) r[j] += xi[al] * P(al, j);
  return r;
}

/// xi^T X, a symmetric n x n matrix.
inline SymMat axis_part(const Direction& xi, const Hess& X) {
  if (xi.dim() != X.N) throw invalid_input("axis_part: dimension mismatch");
  SymMat s(X.n);
  for (int i = 0; i < X.n; ++i)
    for (int j = 0; j < X.n; ++j) {
      double v = 0;
      for (int al = 0; al < X.N; ++al) v += xi[al] * X(al, i, j);
      s(i, j) = v;
    }
  return s;
}

/// (I - xi (x) xi) P, applied to the first index.
inline Mat perp_part(const Direction& xi, const Mat& P) {
  Vec ax = axis_part(xi, P);
  Mat r = P;
  for (int al = 0; al < P.rows; ++al)
    for (int j = 0; j < P.cols; ++j) r(al, j) -= xi[al] * ax[j];
  return r;
}

/// (I - xi (x) xi) X, applied to the first index.
inline Hess perp_part(const Direction& xi, const Hess& X) {
  SymMat ax = axis_part(xi, X);
  Hess r = X;
  for (int al = 0; al < X.N; ++al)
    for (int i = 0; i < X.n; ++i)
      for (int j = 0; j < X.n; ++j) r(al, i, j) -= xi[al] * ax(i, j);
  return r;
}

/// Projection of a map value by a general symmetric N x N projector.
inline Vec project(const SymMat& E, const Vec& v) { return E.apply(v); }

// ---------------------------------------------------------------------------
// Generic dense tensors in (x)^q R^N (x)^s R^n and their contraction

struct Tensor {
  int q = 0, s = 0, N = 1, n = 1;
  std::vector<double> a;  // row-major, Greek indices first

  Tensor() = default;
  Tensor(int q_, int s_, int N_, int n_) : q(q_), s(s_), N(N_), n(n_) {
    if (q_ < 0 || s_ < 0) throw invalid_input("Tensor: negative order");
    if (q_ > 0) check_dim(N_, "Tensor N");
    if (s_ > 0) check_dim(n_, "Tensor n");
    size_t sz = 1;
    for (int k = 0; k < q_; ++k) sz *= static_cast<size_t>(N_);
    for (int k = 0; k < s_; ++k) sz *= static_cast<size_t>(n_);
    a.assign(sz, 0.0);
  }

  static Tensor from(const Mat& m) {
    Tensor t(1, 1, m.rows, m.cols);
    t.a = m.a;
    return t;
  }
  static Tensor from(const Hess& h) {
    Tensor t(1, 2, h.N, h.n);
    t.a = h.a;
    return t;
  }
  static Tensor from_vecN(const Vec& v) {
    Tensor t(1, 0, static_cast<int>(v.size()), 1);
    t.a = v;
    return t;
  }
  /// BiForm as an order-(2,2) tensor with index order (alpha, beta, i, j).
  static Tensor from(const BiForm& b) {
    Tensor t(2, 2, b.N, b.n);
    for (int al = 0; al < b.N; ++al)
      for (int be = 0; be < b.N; ++be)
        for (int i = 0; i < b.n; ++i)
          for (int j = 0; j < b.n; ++j)
            t.a[((static_cast<size_t>(al) * b.N + be) * b.n + i) * b.n + j] =
                b.at(al, i, be, j);
    return t;
  }

  size_t trailing_size(int p) const {
    size_t sz = 1;
    for (int k = 0; k < p; ++k) sz *= static_cast<size_t>(N);
    for (int k = 0; k < s; ++k) sz *= static_cast<size_t>(n);
    return sz;
  }
};

/// Contraction S : T of tensors S in (x)^q R^N (x)^s R^n and
/// T in (x)^p R^N (x)^s R^n with q >= p; the result has order (q - p, 0).
/// All of T's indices are contracted against the trailing indices of S.
inline Tensor contract(const Tensor& S, const Tensor& T) {
  if (S.s != T.s) throw invalid_input("contract: Latin orders differ");
  if (S.q < T.q) throw invalid_input("contract: need order(S) >= order(T)");
  if (T.q > 0 && S.N != T.N) throw invalid_input("contract: N mismatch");
  if (S.s > 0 && S.n != T.n) throw invalid_input("contract: n mismatch");
  int p = T.q;
  Tensor R(S.q - p, 0, S.N, S.n);
  size_t inner = S.trailing_size(p);
  if (inner != T.a.size()) throw invalid_input("contract: trailing size mismatch");
  for (size_t lead = 0; lead < R.a.size(); ++lead) {
    double acc = 0;
    const double* srow = S.a.data() + lead * inner;
    for (size_t k = 0; k < inner; ++k) acc += srow[k] * T.a[k];
    R.a[lead] = acc;
  }
  return R;
}

/// xi v P as an order-(2,1) tensor with entries (xi_a P_{bi} + xi_b P_{ai})/2.
inline Tensor vee_grad(const Direction& xi, const Mat& P) {
  if (xi.dim() != P.rows) throw invalid_input("vee_grad: dimension mismatch");
  Tensor t(2, 1, P.rows, P.cols);
  for (int al = 0; al < P.rows; ++al)
    for (int be = 0; be < P.rows; ++be)
      for (int i = 0; i < P.cols; ++i)
        t.a[(static_cast<size_t>(al) * P.rows + be) * P.cols + i] =
            0.5 * (xi[al] * P(be, i) + xi[be] * P(al, i));
  return t;
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver: cyclic Jacobi
//
// Off-diagonal threshold 1e-13 * ||A||_F, at most 100 sweeps.  Dimensions in
// this toolkit never exceed 16 per axis (Nn <= 256 flattened), where Jacobi is
// both robust and fast enough.

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  std::vector<Vec> eigenvectors;    // eigenvectors[k] matches eigenvalues[k]
};

inline Spectrum jacobi_eigensystem(SymMat A) {
  const int d = A.dim;
  std::vector<Vec> V(d, Vec(d, 0.0));
  for (int i = 0; i < d; ++i) V[i][i] = 1.0;  // V[k] holds eigenvector k

  const double thresh = 1e-13 * std::max(A.frob_norm(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) off = std::max(off, std::abs(A(i, j)));
    if (off <= thresh) break;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        double apq = A(p, q);
        if (std::abs(apq) <= thresh) continue;
        double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double tau = s / (1.0 + c);
        double app = A(p, p), aqq = A(q, q);
        A(p, p) = app - t * apq;
        A(q, q) = aqq + t * apq;
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        for (int k = 0; k < d; ++k) {
          if (k == p || k == q) continue;
          double akp = A(k, p), akq = A(k, q);
          A(k, p) = akp - s * (akq + tau * akp);
          A(p, k) = A(k, p);
          A(k, q) = akq + s * (akp - tau * akq);
          A(q, k) = A(k, q);
        }
        for (int k = 0; k < d; ++k) {
          double vkp = V[p][k], vkq = V[q][k];
          V[p][k] = vkp - s * (vkq + tau * vkp);
          V[q][k] = vkq + s * (vkp - tau * vkq);
        }
      }
  }

  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return A(i, i) < A(j, j); });
  Spectrum sp;
  sp.eigenvalues.resize(d);
  sp.eigenvectors.resize(d);
  for (int k = 0; k < d; ++k) {
    sp.eigenvalues[k] = A(order[k], order[k]);
    sp.eigenvectors[k] = V[order[k]];
  }
  return sp;
}

inline double min_eigenvalue(const SymMat& A) {
  return jacobi_eigensystem(A).eigenvalues.front();
}

inline double max_eigenvalue(const SymMat& A) {
  return jacobi_eigensystem(A).eigenvalues.back();
}

/// max over unit eta of |A : eta (x) eta| = spectral radius for symmetric A.
inline double numerical_radius(const SymMat& A) {
  Spectrum sp = jacobi_eigensystem(A);
  return std::max(std::abs(sp.eigenvalues.front()),
                  std::abs(sp.eigenvalues.back()));
}

/// Positive-semidefiniteness check with tolerance on the minimum eigenvalue.
inline bool is_psd(const SymMat& A, double tol = 1e-10) {
  return min_eigenvalue(A) >= -tol;
}

// ---------------------------------------------------------------------------
// Closed-form spectra of xi v R (rank <= 2 symmetric matrices)

/// max sigma(xi v R) = (|R| + xi^T R)/2, the lambda^+ of the closed form.
inline double max_sigma_vee(const Direction& xi, const Vec& R) {
  return 0.5 * (norm(R) + dot(xi.vec(), R));
}

/// Representation via the sign map: (xi^T R)^+ + |R|/4 |sgn(R) - s(R) xi|^2,
/// where s(R) = 2 (sgn(xi^T R))^+ - 1.
inline double max_sigma_vee_rep_sign(const Direction& xi, const Vec& R) {
  double xr = dot(xi.vec(), R);
  double s = (xr > 0) ? 1.0 : -1.0;  // 2 (sgn a)^+ - 1 maps {a > 0} -> 1, else -1
  Vec diff = sub(sgn(R), scaled(xi.vec(), s));
  return std::max(xr, 0.0) + 0.25 * norm(R) * dot(diff, diff);
}

/// Representation via the two-sided minimum: max{xi^T R, 0} + |R|/4 min |sgn(R) +- xi|^2.
inline double max_sigma_vee_rep_min(const Direction& xi, const Vec& R) {
  Vec plus = add(sgn(R), xi.vec());
  Vec minus = sub(sgn(R), xi.vec());
  double m = std::min(dot(plus, plus), dot(minus, minus));
  return std::max(dot(xi.vec(), R), 0.0) + 0.25 * norm(R) * m;
}

namespace detail {

/// Returns an orthonormal basis of the orthocomplement of span{seed vectors}.
inline std::vector<Vec> orthocomplement(const std::vector<Vec>& span, int dim) {
  std::vector<Vec> basis;  // orthonormalised span, then its completion
  for (Vec v : span) {
    for (const Vec& b : basis) {
      double proj = dot(b, v);
      for (int i = 0; i < dim; ++i) v[i] -= proj * b[i];
    }
    double nv = norm(v);
    if (nv > 1e-10) basis.push_back(scaled(v, 1.0 / nv));
  }
  std::vector<Vec> result;
  for (int k = 0; k < dim && static_cast<int>(basis.size()) < dim; ++k) {
    Vec c = basis_vec(dim, k);
    for (const Vec& b : basis) {
      double proj = dot(b, c);
      for (int i = 0; i < dim; ++i) c[i] -= proj * b[i];
    }
    double nc = norm(c);
    if (nc > 1e-8) {
      c = scaled(c, 1.0 / nc);
      basis.push_back(c);
      result.push_back(c);
    }
  }
  return result;
}

}  // namespace detail

/// Spectrum of xi v R by the closed form: eigenvalues
/// { -(|R| - xi^T R)/2, 0 (multiplicity N-2 for independent R, xi), (|R| + xi^T R)/2 }
/// with eigenvectors span[xi -+ sgn R] and the orthocomplement of span{xi, R}.
/// The maximum eigenvalue is cross-checked against both representation
/// formulas; any disagreement is an implementation bug.
inline Spectrum vee_spectrum(const Direction& xi, const Vec& R) {
  const int N = xi.dim();
  if (static_cast<int>(R.size()) != N)
    throw invalid_input("vee_spectrum: dimension mismatch");

  const double nR = norm(R);
  const double xr = dot(xi.vec(), R);
  Spectrum sp;

  if (nR < kZeroVecTol) {
    sp.eigenvalues.assign(N, 0.0);
    for (int k = 0; k < N; ++k) sp.eigenvectors.push_back(basis_vec(N, k));
  } else if (norm(perp_part(xi, R)) < kZeroVecTol * std::max(1.0, nR)) {
    // R colinear to xi: single nonzero eigenvalue xi^T R along xi.
    std::vector<std::pair<double, Vec>> pairs;
    pairs.emplace_back(xr, xi.vec());
    for (const Vec& v : detail::orthocomplement({xi.vec()}, N))
      pairs.emplace_back(0.0, v);
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [lam, v] : pairs) {
      sp.eigenvalues.push_back(lam);
      sp.eigenvectors.push_back(std::move(v));
    }
  } else {
    double lam_minus = -0.5 * (nR - xr);
    double lam_plus = 0.5 * (nR + xr);
    Vec sR = sgn(R);
    Vec vminus = sub(xi.vec(), sR);
    Vec vplus = add(xi.vec(), sR);
    std::vector<std::pair<double, Vec>> pairs;
    pairs.emplace_back(lam_minus, scaled(vminus, 1.0 / norm(vminus)));
    pairs.emplace_back(lam_plus, scaled(vplus, 1.0 / norm(vplus)));
    for (const Vec& v : detail::orthocomplement({xi.vec(), sR}, N))
      pairs.emplace_back(0.0, v);
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [lam, v] : pairs) {
      sp.eigenvalues.push_back(lam);
      sp.eigenvectors.push_back(std::move(v));
    }
  }

  double m0 = sp.eigenvalues.back();
  double m1 = max_sigma_vee_rep_sign(xi, R);
  double m2 = max_sigma_vee_rep_min(xi, R);
  double tol = 1e-12 * std::max(1.0, nR);
  if (std::abs(m0 - m1) > tol || std::abs(m0 - m2) > tol ||
      std::abs(m1 - m2) > tol)
    throw diagnostic_error("vee_spectrum: spectrum representations disagree");
  return sp;
}

// ---------------------------------------------------------------------------
// Non-orthonormal frame expansion a = lambda xi + mu eta + Pi a

struct FrameExpansion {
  double lambda = 0;
  double mu = 0;
  Vec pi_a;
};

/// Orthogonal projection onto (span{xi, eta})^perp.
inline SymMat span_perp_projector(const Direction& xi, const Direction& eta) {
  const int N = xi.dim();
  if (eta.dim() != N) throw invalid_input("span_perp_projector: dimension");
  // Gram-Schmidt the pair, then subtract both rank-one projectors.
  Vec e2 = perp_part(xi, eta.vec());
  SymMat P = SymMat::identity(N);
  P -= project_along(xi);
  double n2 = norm(e2);
  if (n2 > kZeroVecTol) {
    Direction d2 = Direction::normalised(e2);
    P -= project_along(d2);
  }
  return P;
}

/// Solves a = lambda xi + mu eta + Pi a for the frame {xi, eta, Pi} with
/// |xi^T eta| < 1; Pi must be the projection onto (span{xi, eta})^perp.
inline FrameExpansion frame_expand(const Vec& a, const Direction& xi,
                                   const Direction& eta, const SymMat& Pi) {
  const int N = xi.dim();
  if (static_cast<int>(a.size()) != N || eta.dim() != N || Pi.dim != N)
    throw invalid_input("frame_expand: dimension mismatch");
  const double g = dot(xi.vec(), eta.vec());
  if (std::abs(g) >= 1.0 - kUnitTol)
    throw invalid_input("frame_expand: degenerate frame |xi^T eta| = 1");
  const double denom = 1.0 - g * g;
  const double xa = dot(xi.vec(), a);
  const double ea = dot(eta.vec(), a);
  FrameExpansion f;
  f.lambda = (xa - g * ea) / denom;
  f.mu = (ea - g * xa) / denom;
  f.pi_a = Pi.apply(a);
  return f;
}

}  // namespace conjet
