#pragma once

// Contact maps: smooth test maps touching a continuous map at a point along a
// direction, characterised by the cone-controlled coupled inequality.  This is
// the extremality notion behind contact jets; the two views are equivalent and
// the conversions both ways live here.

#include <functional>
#include <optional>
#include <vector>

#include "conjet/fixtures.hpp"
#include "conjet/jets.hpp"
#include "conjet/maps.hpp"
#include "conjet/schedule.hpp"

namespace conjet {

struct ContactCandidate {
  MapHandle psi;  // C^2 test map with analytic derivatives
  Vec base_point;
  Direction direction;
  int order = 2;

  void validate() const {
    if (order != 1 && order != 2) throw invalid_input("ContactCandidate: order");
    if (!psi.has_grad() || (order == 2 && !psi.has_hess()))
      throw invalid_input("ContactCandidate: psi needs derivatives");
  }
};

struct ConeSchedule {
  std::vector<double> slopes;            // strictly decreasing, positive
  std::vector<double> radius_per_slope;  // search radius cap per slope

  static ConeSchedule defaults(double r0 = 0.1) {
    ConeSchedule c;
    c.slopes = {1.0, 0.5, 0.25, 0.125, 0.0625};
    c.radius_per_slope.assign(c.slopes.size(), r0);
    return c;
  }

  void validate() const {
    if (slopes.empty() || slopes.size() != radius_per_slope.size())
      throw invalid_input("ConeSchedule: slopes/radii length mismatch");
    for (size_t k = 0; k < slopes.size(); ++k) {
      if (!(slopes[k] > 0) || !(radius_per_slope[k] > 0))
        throw invalid_input("ConeSchedule: entries must be positive");
      if (k > 0 && slopes[k] >= slopes[k - 1])
        throw invalid_input("ConeSchedule: slopes must strictly decrease");
    }
  }
};

struct ContactVerdict {
  bool contact = false;
  Verdict status = Verdict::inconclusive;
  std::vector<double> passing_radius;  // per slope; 0 when the slope failed
  double finest_slope_passed = 0;
};

/// Cone-controlled touching test: for every slope L there must be a radius
/// within which |xi-perp (u - psi)|^2 <= (L |y-x|)^p [-xi^T (u - psi)] holds at
/// every sample point (p = order).
inline ContactVerdict is_contact_map(const MapHandle& u,
                                     const ContactCandidate& c,
                                     const ConeSchedule& cones,
                                     const RadiiSchedule& s) {
  c.validate();
  cones.validate();
  const Direction& xi = c.direction;
  const Vec& x = c.base_point;
  if (norm(sub(u.eval(x), c.psi.eval(x))) >
      1e-10 * std::max(1.0, norm(u.eval(x))))
    throw invalid_input("is_contact_map: psi(x) must equal u(x)");

  const std::vector<double> radii = s.radii();
  const std::vector<Vec> dirs = sphere_directions(u.n, s.sphere_samples);

  // Per radius, the smallest slope budget L^p that satisfies the inequality
  // at every sample; infinity marks a decisive violation (perp residual with
  // a nonnegative xi-projection of u - psi).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> required(radii.size(), inf);
  std::vector<bool> sampled(radii.size(), false);
  for (size_t k = 0; k < radii.size(); ++k) {
    double r = radii[k];
    double rp = std::pow(r, c.order);
    int survivors = 0;
    double worst = 0;
    for (const Vec& d : dirs) {
      Vec y = add(x, scaled(d, r));
      if (!u.domain.contains(y)) continue;
      ++survivors;
      Vec diff = sub(u.eval(y), c.psi.eval(y));
      double a = dot(xi.vec(), diff);
      double perp = norm(perp_part(xi, diff));
      double lhs = perp * perp;
      double round_off = 1e-13 * std::max(1e-300, norm(diff));
      if (perp <= round_off) continue;       // no perp residual: free for any L
      if (-a <= round_off) {                 // no budget at all
        worst = inf;
        break;
      }
      worst = std::max(worst, lhs / (rp * (-a)));
    }
    if (survivors < u.n + 1) continue;  // not enough room at this radius
    sampled[k] = true;
    required[k] = worst;
  }

  ContactVerdict v;
  v.passing_radius.assign(cones.slopes.size(), 0.0);
  if (std::none_of(sampled.begin(), sampled.end(), [](bool b) { return b; }))
    return v;  // inconclusive: the domain never offered enough samples

  bool all = true;
  for (size_t si = 0; si < cones.slopes.size(); ++si) {
    double budget = std::pow(cones.slopes[si], c.order);
    bool found = false;
    for (size_t k = 0; k < radii.size() && !found; ++k) {
      if (radii[k] > cones.radius_per_slope[si]) continue;
      bool ok = true;  // this radius and every finer one must satisfy the bound
      for (size_t j = k; j < radii.size(); ++j)
        if (!sampled[j] || required[j] > budget * (1 + 1e-12)) {
          ok = false;
          break;
        }
      if (ok) {
        found = true;
        v.passing_radius[si] = radii[k];
        v.finest_slope_passed = cones.slopes[si];
      }
    }
    all = all && found;
  }
  v.contact = all;
  v.status = all ? Verdict::member : Verdict::non_member;
  return v;
}

/// Derivatives of the test map at the touching point.
inline JetCandidate jet_from_contact_map(const ContactCandidate& c) {
  c.validate();
  if (c.order == 1)
    return JetCandidate(c.base_point, c.direction, c.psi.grad(c.base_point));
  return JetCandidate(c.base_point, c.direction, c.psi.grad(c.base_point),
                      c.psi.hess(c.base_point));
}

namespace detail {

/// Radial bump b(r) = coef * r^{power} (power > 2 keeps it C^2 at the origin),
/// added along a fixed direction.
inline MapHandle add_radial_bump(const MapHandle& base, const Vec& center,
                                 const Vec& axis, double coef, double power) {
  MapHandle m = base;
  auto beval = base.eval;
  auto bgrad = base.grad;
  auto bhess = base.hess;
  Vec x0 = center, dir = axis;
  m.eval = [beval, x0, dir, coef, power](const Vec& y) {
    Vec z = sub(y, x0);
    double r = norm(z);
    Vec v = beval(y);
    double b = r > 0 ? coef * std::pow(r, power) : 0.0;
    for (size_t k = 0; k < v.size(); ++k) v[k] += b * dir[k];
    return v;
  };
  if (bgrad) {
    m.grad = [bgrad, x0, dir, coef, power](const Vec& y) {
      Mat g = bgrad(y);
      Vec z = sub(y, x0);
      double r = norm(z);
      if (r > 0) {
        double db = coef * power * std::pow(r, power - 2);  // d/dz of r^p is p r^{p-2} z
        for (int al = 0; al < g.rows; ++al)
          for (int j = 0; j < g.cols; ++j) g(al, j) += dir[al] * db * z[j];
      }
      return g;
    };
  }
  if (bhess) {
    m.hess = [bhess, x0, dir, coef, power](const Vec& y) {
      Hess h = bhess(y);
      Vec z = sub(y, x0);
      double r = norm(z);
      if (r > 0) {
        double c1 = coef * power * std::pow(r, power - 2);
        double c2 = coef * power * (power - 2) * std::pow(r, power - 4);
        for (int al = 0; al < h.N; ++al)
          for (int i = 0; i < h.n; ++i)
            for (int j = 0; j < h.n; ++j) {
              double v = c2 * z[i] * z[j];
              if (i == j) v += c1;
              h(al, i, j) += dir[al] * v;
            }
      }
      return h;
    };
  }
  return m;
}

}  // namespace detail

/// Builds the touching test map from a verified jet: the Taylor data plus a
/// fitted-modulus bump along xi.  The bump is a smooth power law dominating
/// the observed remainder ratios, so the derivatives at the base point are
/// exactly (P, X).
inline ContactCandidate contact_map_from_jet(const MapHandle& u,
                                             const JetCandidate& jc,
                                             const RadiiSchedule& s) {
  JetVerdict verdict = test_membership(u, jc, s);
  if (!verdict.member())
    throw invalid_input("contact_map_from_jet: jet candidate not verified");

  std::vector<double> env = modulus_envelope(verdict.decay_table);
  PowerModulus pm = fit_power_modulus(s.radii(), env);

  const int p = jc.order;
  Hess X = jc.X ? *jc.X : Hess(u.N, u.n);
  MapHandle taylor = quadratic_map(jc.base_point, u.eval(jc.base_point), jc.P, X,
                                   Domain::ball(jc.base_point, 8.0));
  // remainder bound: sigma(r) r^p, realised as pm.c r^{pm.q + p}
  MapHandle psi = detail::add_radial_bump(taylor, jc.base_point,
                                          jc.direction.vec(), pm.c, pm.q + p);
  ContactCandidate c{psi, jc.base_point, jc.direction, jc.order};
  return c;
}

struct AbsorbReport {
  ContactCandidate psi_hat;
  double fd_value_error = 0;     // |(psi_hat - psi)(x)|
  double fd_gradient_error = 0;  // central differences at the check step
  double hessian_identity_error = 0;  // analytic second-order agreement
};

/// Replaces psi by its second Taylor polynomial plus a xi-directed majorant of
/// the remainder: the perp projection of the new remainder vanishes
/// identically and the jet data is unchanged.
inline AbsorbReport absorb_remainder(const MapHandle& u,
                                     const ContactCandidate& c,
                                     const ConeSchedule& cones,
                                     const RadiiSchedule& s) {
  c.validate();
  ContactVerdict cv = is_contact_map(u, c, cones, s);
  if (!cv.contact) throw invalid_input("absorb_remainder: unverified input");

  const Vec& x = c.base_point;
  const Direction& xi = c.direction;
  MapHandle taylor = quadratic_map(x, c.psi.eval(x), c.psi.grad(x), c.psi.hess(x),
                                   c.psi.domain);

  // majorant of (xi^T remainder)^+ as a smooth power law
  DecayTable table;
  const std::vector<Vec> dirs = sphere_directions(u.n, s.sphere_samples);
  for (double r : s.radii()) {
    double worst = 0;
    for (const Vec& d : dirs) {
      Vec y = add(x, scaled(d, r));
      Vec rem = sub(c.psi.eval(y), taylor.eval(y));
      worst = std::max(worst, std::max(dot(xi.vec(), rem), 0.0) / (r * r));
    }
    table.push_back({r, worst});
  }
  PowerModulus rho = fit_power_modulus(s.radii(), modulus_envelope(table));

  auto psi_eval = c.psi.eval;
  auto t_eval = taylor.eval;
  auto t_grad = taylor.grad;
  auto t_hess = taylor.hess;
  auto psi_grad = c.psi.grad;
  auto psi_hess = c.psi.hess;
  Vec xivec = xi.vec();
  Vec x0 = x;
  double rc = rho.c, rq = rho.q;

  MapHandle psi_hat;
  psi_hat.n = u.n;
  psi_hat.N = u.N;
  psi_hat.domain = c.psi.domain;
  psi_hat.eval = [psi_eval, t_eval, xivec, x0, rc, rq](const Vec& y) {
    Vec t = t_eval(y);
    Vec rem = sub(psi_eval(y), t);
    double r = norm(sub(y, x0));
    double bump = (r > 0 ? rc * std::pow(r, rq + 2.0) : 0.0);
    // perp projection of the remainder, taken in magnitude
    double axis = dot(xivec, rem);
    Vec perp = rem;
    for (size_t k = 0; k < perp.size(); ++k) perp[k] -= axis * xivec[k];
    double m = 2.0 * (bump + norm(perp));
    for (size_t k = 0; k < t.size(); ++k) t[k] += m * xivec[k];
    return t;
  };
  psi_hat.grad = [psi_grad, t_grad, psi_eval, t_eval, xivec, x0, rc,
                  rq](const Vec& y) {
    Mat g = t_grad(y);
    Vec z = sub(y, x0);
    double r = norm(z);
    if (r > 0) {
      double db = rc * (rq + 2.0) * std::pow(r, rq);
      Vec rem = sub(psi_eval(y), t_eval(y));
      double axis = dot(xivec, rem);
      Vec perp = rem;
      for (size_t k = 0; k < perp.size(); ++k) perp[k] -= axis * xivec[k];
      double np = norm(perp);
      Mat dr = psi_grad(y);
      Mat dt = t_grad(y);
      for (int al = 0; al < g.rows; ++al)
        for (int j = 0; j < g.cols; ++j) {
          double term = db * z[j];  // d(c r^{q+2})/dz_j = c (q+2) r^q z_j
          if (np > 1e-14) {
            // d|perp|: chain rule through the perp projection of D(psi - T)
            double acc = 0;
            for (int be = 0; be < g.rows; ++be) {
              double dperp = dr(be, j) - dt(be, j);
              double ax = 0;
              for (int ga = 0; ga < g.rows; ++ga)
                ax += xivec[ga] * (dr(ga, j) - dt(ga, j));
              dperp -= xivec[be] * ax;
              acc += perp[be] * dperp;
            }
            term += acc / np;
          }
          g(al, j) += 2.0 * xivec[al] * term;
        }
    }
    return g;
  };
  psi_hat.hess = t_hess;  // exact at x; the bump terms vanish to second order

  AbsorbReport rep{ContactCandidate{psi_hat, x, xi, c.order}, 0, 0, 0};
  rep.fd_value_error = norm(sub(psi_hat.eval(x), c.psi.eval(x)));

  const double h = 1e-4;
  for (int j = 0; j < u.n; ++j) {
    Vec yp = x, ym = x;
    yp[j] += h;
    ym[j] -= h;
    Vec dp = sub(psi_hat.eval(yp), psi_eval(yp));
    Vec dm = sub(psi_hat.eval(ym), psi_eval(ym));
    rep.fd_gradient_error =
        std::max(rep.fd_gradient_error, norm(sub(dp, dm)) / (2 * h));
  }
  Hess dh = psi_hat.hess(x) - c.psi.hess(x);
  rep.hessian_identity_error = dh.frob_norm();
  if (rep.fd_value_error > 1e-8 || rep.fd_gradient_error > 1e-8 ||
      rep.hessian_identity_error > 1e-8)
    throw diagnostic_error("absorb_remainder: second-order agreement failed");
  return rep;
}

// ---------------------------------------------------------------------------
// The contact calculus (nonlinear passage of derivatives)

struct ContactCalculusReport {
  bool contact = false;
  bool gradient_match = false;        // D(u - psi)(x) = 0
  bool hessian_nonpos = false;        // xi v D^2(u - psi)(x) <=ox 0
  bool grad_rank_one = false;         // D(u-psi) = xi (x) D(xi^T(u-psi))
  bool hess_rank_one = false;         // D^2(u-psi) = xi (x) D^2(xi^T(u-psi))
  bool scalar_grad_zero = false;      // D(xi^T(u-psi))(x) = 0
  bool scalar_hess_nonpos = false;    // D^2(xi^T(u-psi))(x) <= 0
  bool forward_ok = false;            // contact implies all of the above
  bool strict_converse_applicable = false;
  bool converse_ok = false;
};

/// Forward direction: a contact map of a twice differentiable u satisfies the
/// maximum-principle calculus (vanishing relative gradient, rank-one
/// decompositions, nonpositive scalar hessian).  Converse: those conditions
/// with a strictly negative scalar hessian force the contact property.
inline ContactCalculusReport contact_calculus_check(const MapHandle& u,
                                                    const ContactCandidate& c,
                                                    const ConeSchedule& cones,
                                                    const RadiiSchedule& s) {
  c.validate();
  if (!u.has_grad() || !u.has_hess())
    throw invalid_input("contact_calculus_check: u needs derivatives");
  const Vec& x = c.base_point;
  const Direction& xi = c.direction;

  ContactCalculusReport rep;
  rep.contact = is_contact_map(u, c, cones, s).contact;

  Mat dG = u.grad(x);
  dG -= c.psi.grad(x);
  Hess dH = u.hess(x) - c.psi.hess(x);
  double gscale = std::max(1.0, dG.frob_norm());
  double hscale = std::max(1.0, dH.frob_norm());

  rep.gradient_match = dG.frob_norm() <= 1e-8 * gscale;
  rep.hessian_nonpos = vee_nonpos_hess(xi, dH).holds;

  // rank-one decompositions of the relative derivatives
  Vec sgrad = axis_part(xi, dG);          // D(xi^T(u-psi))
  SymMat shess = axis_part(xi, dH);       // D^2(xi^T(u-psi))
  Mat grad_rec(u.N, u.n);
  for (int al = 0; al < u.N; ++al)
    for (int j = 0; j < u.n; ++j) grad_rec(al, j) = xi[al] * sgrad[j];
  rep.grad_rank_one = (dG - grad_rec).frob_norm() <= 1e-8 * gscale;
  rep.hess_rank_one =
      (dH - tensor_dir(xi.vec(), shess)).frob_norm() <= 1e-8 * hscale;
  rep.scalar_grad_zero = norm(sgrad) <= 1e-8 * gscale;
  rep.scalar_hess_nonpos = max_eigenvalue(shess) <= 1e-9 * hscale;

  rep.forward_ok = !rep.contact ||
                   (rep.gradient_match && rep.hessian_nonpos &&
                    rep.grad_rank_one && rep.hess_rank_one &&
                    rep.scalar_grad_zero && rep.scalar_hess_nonpos);

  rep.strict_converse_applicable =
      rep.gradient_match && rep.hessian_nonpos &&
      max_eigenvalue(shess) < -1e-6;
  rep.converse_ok = !rep.strict_converse_applicable || rep.contact;
  return rep;
}

// ---------------------------------------------------------------------------
// Rigidity of the perpendicular projection under quadratic perturbations

struct RigidityReport {
  double l_minus = 0;  // liminf estimate of -xi^T(u-psi)(y)/|y-x|^2
  double l_plus = 0;   // limsup estimate
  bool perturbed_still_contact = false;
};

/// Perturbs psi by half the xi-perp part of a quadratic form and reports
/// whether the contact property survives; when the liminf estimate diverges
/// every such perturbation must remain a contact map.
inline RigidityReport rigidity_dichotomy(const MapHandle& u,
                                         const ContactCandidate& c,
                                         const Hess& X,
                                         const ConeSchedule& cones,
                                         const RadiiSchedule& s) {
  c.validate();
  ContactVerdict cv = is_contact_map(u, c, cones, s);
  if (!cv.contact) throw invalid_input("rigidity_dichotomy: unverified input");
  const Vec& x = c.base_point;
  const Direction& xi = c.direction;

  // liminf/limsup from the finest three radii only; coarse radii reflect
  // transient geometry, not the limit
  std::vector<double> radii = s.radii();
  const std::vector<Vec> dirs = sphere_directions(u.n, s.sphere_samples);
  RigidityReport rep;
  rep.l_minus = std::numeric_limits<double>::infinity();
  rep.l_plus = -std::numeric_limits<double>::infinity();
  size_t from = radii.size() >= 3 ? radii.size() - 3 : 0;
  for (size_t k = from; k < radii.size(); ++k) {
    double r = radii[k];
    for (const Vec& d : dirs) {
      Vec y = add(x, scaled(d, r));
      if (!u.domain.contains(y)) continue;
      double val = -dot(xi.vec(), sub(u.eval(y), c.psi.eval(y))) / (r * r);
      rep.l_minus = std::min(rep.l_minus, val);
      rep.l_plus = std::max(rep.l_plus, val);
    }
  }

  // psi_hat = psi + (xi-perp X) : (y-x) (x) (y-x) / 2
  Hess perpX = perp_part(xi, X);
  MapHandle bump = quadratic_map(x, Vec(u.N, 0.0), Mat(u.N, u.n), perpX,
                                 c.psi.domain);
  MapHandle psi_hat = c.psi;
  auto pe = c.psi.eval;
  auto be = bump.eval;
  psi_hat.eval = [pe, be](const Vec& y) { return add(pe(y), be(y)); };
  auto pg = c.psi.grad;
  auto bg = bump.grad;
  psi_hat.grad = [pg, bg](const Vec& y) { return pg(y) + bg(y); };
  auto ph = c.psi.hess;
  auto bh = bump.hess;
  psi_hat.hess = [ph, bh](const Vec& y) { return ph(y) + bh(y); };

  ContactCandidate chat{psi_hat, x, xi, c.order};
  rep.perturbed_still_contact = is_contact_map(u, chat, cones, s).contact;
  if (rep.l_minus > 1e6 && !rep.perturbed_still_contact)
    throw diagnostic_error(
        "rigidity_dichotomy: divergent liminf but perturbation rejected");
  return rep;
}

}  // namespace conjet
