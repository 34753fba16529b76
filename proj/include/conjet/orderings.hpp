#pragma once

// The positivity and rank-one positivity partial orderings on fourth-order
// tensors, with a multistart alternating-minimisation certifier for the
// rank-one quadratic form and the induced-ordering characterisations for
// vectors and hessian tensors.

#include <optional>
#include <vector>

#include "conjet/rng.hpp"
#include "conjet/tensor.hpp"

namespace conjet {

struct RankOneOptions {
  int multistarts = 64;
  int max_iters = 200;
  double converge_tol = 1e-12;  // stop when the objective improves less
  double tol = 1e-9;            // positivity margin
};

struct RankOneCertificate {
  enum class Outcome { positive, indefinite };
  Outcome verdict = Outcome::positive;
  double min_value = 0;
  Vec witness_eta, witness_w;  // unit vectors attaining min_value
  int multistart_count = 0;

  bool positive() const { return verdict == Outcome::positive; }
};

namespace detail {

/// M(w)_{ab} = Xi_{ai,bj} w_i w_j; symmetric by the BiForm symmetry.
inline SymMat eta_matrix(const BiForm& Xi, const Vec& w) {
  SymMat M(Xi.N);
  for (int al = 0; al < Xi.N; ++al)
    for (int be = 0; be < Xi.N; ++be) {
      double v = 0;
      for (int i = 0; i < Xi.n; ++i)
        for (int j = 0; j < Xi.n; ++j) v += Xi.at(al, i, be, j) * w[i] * w[j];
      M(al, be) = v;
    }
  return M;
}

/// K(eta)_{ij} = Xi_{ai,bj} eta_a eta_b.
inline SymMat w_matrix(const BiForm& Xi, const Vec& eta) {
  SymMat K(Xi.n);
  for (int i = 0; i < Xi.n; ++i)
    for (int j = 0; j < Xi.n; ++j) {
      double v = 0;
      for (int al = 0; al < Xi.N; ++al)
        for (int be = 0; be < Xi.N; ++be) v += Xi.at(al, i, be, j) * eta[al] * eta[be];
      K(i, j) = v;
    }
  return K;
}

inline Vec min_eigvec(const SymMat& A) {
  Spectrum sp = jacobi_eigensystem(A);
  return sp.eigenvectors.front();
}

}  // namespace detail

/// Approximates min over unit eta, w of Xi : (eta (x) w) (x) (eta (x) w) by
/// alternating minimisation from a deterministic multistart set.  The
/// certificate is one-sided: an indefinite verdict carries an exact witness,
/// a positive verdict is only as strong as the multistart coverage.
inline RankOneCertificate min_rank_one_value(const BiForm& Xi,
                                             const RankOneOptions& opts = {}) {
  const int N = Xi.N, n = Xi.n;

  // Seeds: low-discrepancy pairs plus all coordinate pairs.
  std::vector<std::pair<Vec, Vec>> seeds;
  {
    std::vector<Vec> etas = halton_sphere(N, opts.multistarts, 17);
    std::vector<Vec> ws = halton_sphere(n, opts.multistarts, 59);
    for (int k = 0; k < opts.multistarts; ++k) seeds.emplace_back(etas[k], ws[k]);
    for (int a = 0; a < N; ++a)
      for (int i = 0; i < n; ++i)
        seeds.emplace_back(basis_vec(N, a), basis_vec(n, i));
  }

  RankOneCertificate cert;
  cert.multistart_count = static_cast<int>(seeds.size());
  cert.min_value = std::numeric_limits<double>::infinity();

  for (auto& [eta0, w0] : seeds) {
    Vec eta = eta0, w = w0;
    double value = Xi.rank_one_value(eta, w);
    for (int it = 0; it < opts.max_iters; ++it) {
      eta = detail::min_eigvec(detail::eta_matrix(Xi, w));
      w = detail::min_eigvec(detail::w_matrix(Xi, eta));
      double next = Xi.rank_one_value(eta, w);
      if (value - next < opts.converge_tol) {
        value = std::min(value, next);
        break;
      }
      value = next;
    }
    if (value < cert.min_value) {
      cert.min_value = value;
      cert.witness_eta = eta;
      cert.witness_w = w;
    }
  }

  cert.verdict = cert.min_value >= -opts.tol ? RankOneCertificate::Outcome::positive
                                             : RankOneCertificate::Outcome::indefinite;
  return cert;
}

/// Xi >= 0 in the natural ordering: the Nn x Nn flattening is PSD.
inline bool is_positive(const BiForm& Xi, double tol = 1e-10) {
  return min_eigenvalue(Xi.flatten()) >= -tol;
}

// ---------------------------------------------------------------------------
// Induced orderings along a direction (the four-way and three-way
// equivalences).  Each route is evaluated independently; the routes are
// provably equivalent, so any disagreement is a diagnostic failure.

struct VeeNonposVector {
  bool holds = false;
  double decomposition = 0;  // xi^T v (the one-dimensional content of v)
};

/// xi v v <= 0, decided by four equivalent conditions evaluated independently:
/// max sigma(xi v v) <= tol; v = (xi^T v) xi with xi^T v <= 0; xi-perp v = 0
/// with xi^T v <= 0; v = -|v| xi.
inline VeeNonposVector vee_nonpos_vector(const Direction& xi, const Vec& v,
                                         double tol = 1e-9) {
  if (xi.dim() != static_cast<int>(v.size()))
    throw invalid_input("vee_nonpos_vector: dimension mismatch");
  const double scale = std::max(1.0, norm(v));
  const double xv = dot(xi.vec(), v);

  bool c1 = max_sigma_vee(xi, v) <= tol * scale;
  bool c2 = norm(sub(v, scaled(xi.vec(), xv))) <= tol * scale && xv <= tol * scale;
  bool c3 = norm(perp_part(xi, v)) <= tol * scale && xv <= tol * scale;
  bool c4 = norm(add(v, scaled(xi.vec(), norm(v)))) <= 2 * tol * scale;

  if (c1 != c2 || c1 != c3 || c1 != c4) {
    // Disagreements at the tolerance boundary are resolved by margin review;
    // a disagreement with a clear margin is a bug.
    double margin = std::abs(max_sigma_vee(xi, v)) / scale;
    if (std::abs(margin - tol) > 10 * tol)
      throw diagnostic_error("vee_nonpos_vector: equivalent conditions disagree");
  }
  return {c1, xv};
}

struct VeeNonposHess {
  bool holds = false;
};

/// xi v X <=_ox 0, decided by three equivalent routes: rank-one nonpositivity
/// of xi v X via the certifier; the decomposition xi-perp X = 0 with
/// xi^T X <= 0; and nonpositivity of the flattened xi v X.
inline VeeNonposHess vee_nonpos_hess(const Direction& xi, const Hess& X,
                                     double tol = 1e-9) {
  if (xi.dim() != X.N) throw invalid_input("vee_nonpos_hess: dimension mismatch");
  const double scale = std::max(1.0, X.frob_norm());
  BiForm vx = vee_hess(xi, X);

  // route 1: rank-one nonpositivity, i.e. -(xi v X) >=_ox 0
  RankOneCertificate cert = min_rank_one_value(-1.0 * vx);
  double m1 = cert.min_value / scale;  // >= -tol means nonpositive
  bool r1 = m1 >= -tol;

  // route 2: decomposition test
  Hess perp = perp_part(xi, X);
  SymMat ax = axis_part(xi, X);
  bool r2 = perp.frob_norm() <= tol * scale &&
            max_eigenvalue(ax) <= tol * scale;

  // route 3: flattened nonpositivity
  double m3 = -max_eigenvalue(vx.flatten()) / scale;
  bool r3 = m3 >= -tol;

  if (r1 != r2 || r1 != r3) {
    double worst = std::min(m1, m3);
    if (std::abs(worst + tol) > 10 * tol)
      throw diagnostic_error("vee_nonpos_hess: equivalent routes disagree");
  }
  return {r2};
}

// ---------------------------------------------------------------------------
// Reference bi-forms

/// The identity form: Xi : P (x) P = |P|^2.
inline BiForm identity_form(int N, int n) {
  BiForm b(N, n);
  for (int al = 0; al < N; ++al)
    for (int i = 0; i < n; ++i) b.at(al, i, al, i) = 1.0;
  return b;
}

/// The symmetrised determinant form on R^{2x2}: Xi : P (x) P = 2 det P.
/// Rank-one positive (det(eta (x) w) = 0) yet indefinite as a quadratic form.
inline BiForm determinant_form() {
  BiForm b(2, 2);
  b.at(0, 0, 1, 1) = 1.0;
  b.at(1, 1, 0, 0) = 1.0;
  b.at(0, 1, 1, 0) = -1.0;
  b.at(1, 0, 0, 1) = -1.0;
  return b;
}

}  // namespace conjet
