#pragma once

// Numerical membership tests for first and second contact xi-jets, their
// equivalent formulations, and the jet calculus for differentiable maps.

#include <functional>
#include <optional>
#include <vector>

#include "conjet/maps.hpp"
#include "conjet/schedule.hpp"
#include "conjet/tensor.hpp"

namespace conjet {

struct JetCandidate {
  Vec base_point;
  Direction direction;
  Mat P;
  std::optional<Hess> X;
  int order = 1;

  JetCandidate(Vec x, Direction xi, Mat P_)
      : base_point(std::move(x)), direction(std::move(xi)), P(std::move(P_)),
        order(1) {}
  JetCandidate(Vec x, Direction xi, Mat P_, Hess X_)
      : base_point(std::move(x)), direction(std::move(xi)), P(std::move(P_)),
        X(std::move(X_)), order(2) {}

  void validate(const MapHandle& u) const {
    if (order != 1 && order != 2) throw invalid_input("JetCandidate: order");
    if (order == 2 && !X) throw invalid_input("JetCandidate: order 2 needs X");
    if (static_cast<int>(base_point.size()) != u.n || direction.dim() != u.N ||
        P.rows != u.N || P.cols != u.n)
      throw invalid_input("JetCandidate: dimension mismatch");
    if (X && (X->N != u.N || X->n != u.n))
      throw invalid_input("JetCandidate: hessian dimension mismatch");
  }
};

struct JetVerdict {
  Verdict verdict = Verdict::inconclusive;
  DecayTable decay_table;
  double fitted_exponent = 0;

  bool member() const { return verdict == Verdict::member; }
};

/// Expansion residual Q(z) = u(x+z) - u(x) - Pz - X : z (x) z / 2
/// (the quadratic term is dropped at order 1).
inline Vec remainder(const MapHandle& u, const JetCandidate& c, const Vec& z) {
  Vec xz = add(c.base_point, z);
  if (!u.domain.contains(xz))
    throw invalid_input("remainder: evaluation outside the domain");
  Vec q = sub(u.eval(xz), u.eval(c.base_point));
  Vec pz = c.P.apply(z);
  q = sub(q, pz);
  if (c.order == 2) q = sub(q, scaled(c.X->contract_pair(z, z), 0.5));
  return q;
}

namespace detail {

/// Sweeps the schedule, recording max over surviving sphere samples of
/// quantity(z)/r^p per radius.  Returns false when any radius keeps fewer
/// than n+1 in-domain samples (boundary base point with too little room).
inline bool sweep_ratios(const MapHandle& u, const Vec& x,
                         const RadiiSchedule& s, int p,
                         const std::function<double(const Vec&)>& quantity,
                         DecayTable& table) {
  const std::vector<double> radii = s.radii();
  const std::vector<Vec> dirs = sphere_directions(u.n, s.sphere_samples);
  table.clear();
  for (double r : radii) {
    double worst = 0;
    int survivors = 0;
    for (const Vec& d : dirs) {
      Vec z = scaled(d, r);
      if (!u.domain.contains(add(x, z))) continue;
      ++survivors;
      double val = quantity(z);
      if (std::isnan(val))
        throw diagnostic_error("jet test: NaN in evaluation");
      worst = std::max(worst, val / std::pow(r, p));
    }
    if (survivors < u.n + 1) return false;
    table.push_back({r, worst});
  }
  return true;
}

}  // namespace detail

/// Membership test via the spectral formulation: member iff
/// max sigma(xi v Q(z)) = o(|z|^p) along the schedule.
inline JetVerdict test_membership(const MapHandle& u, const JetCandidate& c,
                                  const RadiiSchedule& s) {
  c.validate(u);
  JetVerdict v;
  const Direction& xi = c.direction;
  bool ok = detail::sweep_ratios(
      u, c.base_point, s, c.order,
      [&](const Vec& z) { return max_sigma_vee(xi, remainder(u, c, z)); },
      v.decay_table);
  if (!ok) return v;  // inconclusive
  DecayDecision d = decide_decay(v.decay_table, s.decay_tol);
  v.verdict = d.verdict;
  v.fitted_exponent = d.fitted_exponent;
  return v;
}

/// Structural test via the single scalar coupled inequality: with the fitted
/// modulus sigma, checks xi^T Q <= -|xi-perp Q|^2/(sigma(r) r^p) + sigma(r) r^p
/// at every sample point, and decides decay from the minimal pointwise
/// modulus s*(z) = (xi^T Q + sqrt((xi^T Q)^2 + 4 |xi-perp Q|^2))/2.
inline JetVerdict test_structural(const MapHandle& u, const JetCandidate& c,
                                  const RadiiSchedule& s) {
  c.validate(u);
  JetVerdict v;
  const Direction& xi = c.direction;
  auto sstar = [&](const Vec& z) {
    Vec q = remainder(u, c, z);
    double a = dot(xi.vec(), q);
    double b = norm(perp_part(xi, q));
    return 0.5 * (a + std::sqrt(a * a + 4 * b * b));
  };
  bool ok = detail::sweep_ratios(u, c.base_point, s, c.order, sstar,
                                 v.decay_table);
  if (!ok) return v;

  // pointwise inequality with the monotone envelope
  std::vector<double> sigma = modulus_envelope(v.decay_table);
  const std::vector<double> radii = s.radii();
  const std::vector<Vec> dirs = sphere_directions(u.n, s.sphere_samples);
  for (size_t k = 0; k < radii.size(); ++k) {
    double sr = sigma[k] * std::pow(radii[k], c.order);
    for (const Vec& d : dirs) {
      Vec z = scaled(d, radii[k]);
      if (!u.domain.contains(add(c.base_point, z))) continue;
      Vec q = remainder(u, c, z);
      double a = dot(xi.vec(), q);
      double b = norm(perp_part(xi, q));
      double slack = 1e-10 * std::max(1.0, std::abs(a) + b);
      if (a > -b * b / sr + sr + slack)
        throw diagnostic_error("test_structural: envelope inequality violated");
    }
  }

  DecayDecision d = decide_decay(v.decay_table, s.decay_tol);
  v.verdict = d.verdict;
  v.fitted_exponent = d.fitted_exponent;
  return v;
}

// ---------------------------------------------------------------------------
// The four equivalent formulations for a residual map R with R(0) = 0

struct Theorem31Forms {
  bool spectral = false;        // max sigma(xi v R) = o(|z|^p)
  bool split = false;           // xi^T R <= o(|z|^p) and |xi-perp R|^2/|R| = o(|z|^p)
  bool reconstruction = false;  // split decay plus the quadratic-root identity
  bool t_split = false;         // the {|xi-perp R| <= |xi^T R|} dichotomy

  bool unanimous() const {
    return spectral == split && split == reconstruction &&
           reconstruction == t_split;
  }
};

/// Evaluates conditions (i)-(iv) numerically for R : Omega -> R^N with
/// R(0) = 0; all four are provably equivalent and unanimity is an invariant
/// checked by the caller.
inline Theorem31Forms theorem31_forms(const MapHandle& R, const Direction& xi,
                                      int p, const RadiiSchedule& s) {
  if (p != 1 && p != 2) throw invalid_input("theorem31_forms: p must be 1 or 2");
  if (xi.dim() != R.N) throw invalid_input("theorem31_forms: dimension");
  Vec origin(R.n, 0.0);
  if (norm(R.eval(origin)) > 1e-12)
    throw invalid_input("theorem31_forms: R(0) must vanish");

  Theorem31Forms out;
  auto Rv = [&](const Vec& z) { return R.eval(z); };

  // (i) spectral
  DecayTable t1;
  detail::sweep_ratios(R, origin, s, p,
                       [&](const Vec& z) { return max_sigma_vee(xi, Rv(z)); }, t1);
  out.spectral = decide_decay(t1, s.decay_tol).verdict == Verdict::member;

  // (ii) split: xi^T R <= o and |xi-perp R|^2/|R| = o; terms at |R| < 1e-14
  // are defined as 0, matching sgn(0) = 0
  DecayTable t2a, t2b;
  detail::sweep_ratios(R, origin, s, p,
                       [&](const Vec& z) { return std::max(dot(xi.vec(), Rv(z)), 0.0); },
                       t2a);
  auto perp_sq_over_R = [&](const Vec& z) {
    Vec r = Rv(z);
    double nr = norm(r);
    if (nr < kZeroVecTol) return 0.0;
    double b = norm(perp_part(xi, r));
    return b * b / nr;
  };
  detail::sweep_ratios(R, origin, s, p, perp_sq_over_R, t2b);
  bool split_a = decide_decay(t2a, s.decay_tol).verdict == Verdict::member;
  bool split_b = decide_decay(t2b, s.decay_tol).verdict == Verdict::member;
  out.split = split_a && split_b;

  // (iii) the constructive form: sigma := (xi^T R)^+, rho := xi-perp R |R|^{-1/2},
  // with |R| reconstructed as the positive root of t^2 - |rho|^2 t - |xi^T R|^2
  bool identity_ok = true;
  {
    const std::vector<double> radii = s.radii();
    const std::vector<Vec> dirs = sphere_directions(R.n, s.sphere_samples);
    for (double r : radii)
      for (const Vec& d : dirs) {
        Vec z = scaled(d, r);
        if (!R.domain.contains(z)) continue;
        Vec val = Rv(z);
        double nr = norm(val);
        if (nr < kZeroVecTol) continue;
        double rho_sq = norm(perp_part(xi, val));
        rho_sq = rho_sq * rho_sq / nr;
        double ax = std::abs(dot(xi.vec(), val));
        double recon = 0.5 * rho_sq + std::sqrt(0.25 * rho_sq * rho_sq + ax * ax);
        if (std::abs(recon - nr) > 1e-10 * std::max(1.0, nr)) identity_ok = false;
      }
  }
  out.reconstruction = out.split && identity_ok;

  // (iv) dichotomy along T = {|xi-perp R| <= |xi^T R|}
  auto on_T = [&](const Vec& z) {
    Vec r = Rv(z);
    double a = dot(xi.vec(), r);
    double b = norm(perp_part(xi, r));
    if (b > std::abs(a)) return 0.0;  // off T
    double first = std::max(a, 0.0);
    double second = std::abs(a) < kZeroVecTol ? 0.0 : b * b / std::abs(a);
    return std::max(first, second);
  };
  auto off_T = [&](const Vec& z) {
    Vec r = Rv(z);
    double a = dot(xi.vec(), r);
    double b = norm(perp_part(xi, r));
    if (b <= std::abs(a)) return 0.0;  // on T
    return norm(r);
  };
  DecayTable t4a, t4b;
  detail::sweep_ratios(R, origin, s, p, on_T, t4a);
  detail::sweep_ratios(R, origin, s, p, off_T, t4b);
  out.t_split = decide_decay(t4a, s.decay_tol).verdict == Verdict::member &&
                decide_decay(t4b, s.decay_tol).verdict == Verdict::member;
  return out;
}

// ---------------------------------------------------------------------------
// Jet calculus for twice differentiable maps

/// The full second contact jet of a twice differentiable map at x:
/// { (Du(x), D^2 u(x) + xi (x) A) : A >= 0 }.
struct SmoothJetFamily {
  Vec base_point;
  Direction direction;
  Mat Du;
  Hess D2u;

  /// The classical pair (A = 0).
  JetCandidate classical() const {
    return JetCandidate(base_point, direction, Du, D2u);
  }

  /// The ray element for a caller-supplied PSD perturbation A.
  JetCandidate candidate(const SymMat& A) const {
    if (A.dim != D2u.n) throw invalid_input("SmoothJetFamily: A dimension");
    if (!is_psd(A, 1e-10))
      throw invalid_input("SmoothJetFamily: A must be positive semidefinite");
    Hess shifted = D2u + tensor_dir(direction.vec(), A);
    return JetCandidate(base_point, direction, Du, shifted);
  }

  JetCandidate first_order() const {
    return JetCandidate(base_point, direction, Du);
  }
};

inline SmoothJetFamily jet_enumerate_smooth(const MapHandle& u, const Vec& x,
                                            const Direction& xi) {
  if (!u.has_grad() || !u.has_hess())
    throw invalid_input("jet_enumerate_smooth: derivatives required");
  return SmoothJetFamily{x, xi, u.grad(x), u.hess(x)};
}

// ---------------------------------------------------------------------------
// Perpendicular modification (stiffness of the xi-perp projection)

struct PerpModifyResult {
  bool hypothesis_ok = false;   // (eta^T P, eta^T X - A/2) in J^{2,+}(eta^T u)(x)
  JetVerdict hypothesis;        // scalar semijet verdict backing the hypothesis
  JetVerdict modified;          // verdict for (P, X - eta (x) A)
};

/// Tests the candidate (P, X - eta (x) A) for eta perpendicular to xi and
/// A >= 0, after checking the scalar superjet hypothesis on eta^T u.
inline PerpModifyResult perp_modify(const MapHandle& u, const JetCandidate& c,
                                    const Direction& eta, const SymMat& A,
                                    const RadiiSchedule& s) {
  c.validate(u);
  if (c.order != 2) throw invalid_input("perp_modify: order-2 candidate required");
  if (std::abs(dot(eta.vec(), c.direction.vec())) > 1e-12)
    throw invalid_input("perp_modify: eta must be perpendicular to xi");
  if (!is_psd(A, 1e-10)) throw invalid_input("perp_modify: A must be PSD");

  PerpModifyResult out;

  // scalar reduction: J^{2,+} is the xi = +1 contact jet of the projection
  MapHandle scalar = project_scalar(u, eta.vec());
  Mat Ps(1, u.n);
  for (int j = 0; j < u.n; ++j) {
    double v = 0;
    for (int al = 0; al < u.N; ++al) v += eta[al] * c.P(al, j);
    Ps(0, j) = v;
  }
  SymMat etaX = axis_part(eta, *c.X);
  Hess Xs(1, u.n);
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j) Xs(0, i, j) = etaX(i, j) - 0.5 * A(i, j);
  JetCandidate hyp(c.base_point, Direction(Vec{1.0}), Ps, Xs);
  out.hypothesis = test_membership(scalar, hyp, s);
  out.hypothesis_ok = out.hypothesis.member();

  JetCandidate modified(c.base_point, c.direction, c.P,
                        *c.X - tensor_dir(eta.vec(), A));
  out.modified = test_membership(u, modified, s);
  return out;
}

}  // namespace conjet
