#include <catch2/catch_amalgamated.hpp>

#include "conjet/rng.hpp"
#include "conjet/tensor.hpp"

using namespace conjet;
using Catch::Approx;

namespace {

// Independent naive-loop contraction oracle: contracts all of T's indices
// against the trailing indices of S using explicit multi-index arithmetic.
double oracle_contract_entry(const Tensor& S, const Tensor& T, size_t lead) {
  size_t inner = 1;
  for (int k = 0; k < T.q; ++k) inner *= static_cast<size_t>(T.N);
  for (int k = 0; k < T.s; ++k) inner *= static_cast<size_t>(T.n);
  double acc = 0;
  for (size_t j = 0; j < inner; ++j) acc += S.a[lead * inner + j] * T.a[j];
  return acc;
}

Tensor random_tensor(Rng& rng, int q, int s, int N, int n) {
  Tensor t(q, s, N, n);
  for (double& x : t.a) x = rng.normal();
  return t;
}

}  // namespace

TEST_CASE("contraction reduces to the Frobenius inner product") {
  // S = T = identity on R^{2x2} viewed as order-(1,1): S:T = tr I_2 = 2
  Mat id = Mat::from(2, 2, {1, 0, 0, 1});
  Tensor S = Tensor::from(id), T = Tensor::from(id);
  Tensor r = contract(S, T);
  REQUIRE(r.q == 0);
  REQUIRE(r.a.size() == 1);
  CHECK(r.a[0] == Approx(2.0));
}

TEST_CASE("vector Laplacian contraction of u(x) = |x|^2 per component") {
  // A = delta_ab delta_ij acting on D^2 u with u_al(x) = |x|^2, n = 2:
  // D^2 u = 2 I per component, so (A : D^2 u)_al = 4.
  const int N = 2, n = 2;
  BiForm A = BiForm(N, n);
  for (int al = 0; al < N; ++al)
    for (int i = 0; i < n; ++i) A.at(al, i, al, i) = 1.0;
  Hess D2u(N, n);
  for (int al = 0; al < N; ++al)
    for (int i = 0; i < n; ++i) D2u(al, i, i) = 2.0;
  Tensor r = contract(Tensor::from(A), Tensor::from(D2u));
  REQUIRE(r.a.size() == 2);
  CHECK(r.a[0] == Approx(4.0));
  CHECK(r.a[1] == Approx(4.0));
}

TEST_CASE("contraction matches the naive loop oracle on random tensors") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    int N = rng.uniform_int(1, 4), n = rng.uniform_int(1, 4);
    Tensor S = random_tensor(rng, 2, 2, N, n);
    Tensor T = random_tensor(rng, 1, 2, N, n);
    Tensor r = contract(S, T);
    REQUIRE(static_cast<int>(r.a.size()) == N);
    for (size_t lead = 0; lead < r.a.size(); ++lead)
      CHECK(r.a[lead] == Approx(oracle_contract_entry(S, T, lead)).margin(1e-12));
  }
}

TEST_CASE("contraction rejects dimension mismatches") {
  Rng rng(7);
  Tensor S = random_tensor(rng, 1, 1, 2, 3);
  Tensor T = random_tensor(rng, 1, 1, 2, 2);
  CHECK_THROWS_AS(contract(S, T), invalid_input);
  Tensor U = random_tensor(rng, 2, 1, 2, 3);
  CHECK_THROWS_AS(contract(S, U), invalid_input);  // order(S) < order(T)
}

TEST_CASE("vee of a vector with itself is the outer product") {
  Vec e1{1.0, 0.0};
  SymMat m = vee(e1, e1);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(0, 1) == 0.0);
  CHECK(m(1, 1) == 0.0);
}

TEST_CASE("|a v b|^2 = (|a|^2 |b|^2 + (a.b)^2) / 2") {
  Vec a{1.0, 0.0}, b{0.0, 2.0};
  SymMat m = vee(a, b);
  double fro2 = 0;
  for (double x : m.a) fro2 += x * x;
  CHECK(fro2 == Approx(2.0));  // (1*4 + 0)/2

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    int N = rng.uniform_int(1, 5);
    Vec u = rng.normal_vec(N), v = rng.normal_vec(N);
    SymMat s = vee(u, v);
    double f2 = 0;
    for (double x : s.a) f2 += x * x;
    double expect = 0.5 * (dot(u, u) * dot(v, v) + dot(u, v) * dot(u, v));
    CHECK(f2 == Approx(expect).margin(1e-12 * std::max(1.0, expect)));
    // |a (x) b|^2 = |a|^2 |b|^2
    Mat o = outer(u, v);
    CHECK(o.frob_norm() * o.frob_norm() ==
          Approx(dot(u, u) * dot(v, v)).margin(1e-10));
  }
}

TEST_CASE("(a v b) : X = a^T X b for symmetric X") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    int N = rng.uniform_int(2, 5);
    Vec a = rng.normal_vec(N), b = rng.normal_vec(N);
    SymMat X = rng.sym(N);
    double lhs = frob_inner(vee(a, b), X);
    double rhs = dot(a, X.apply(b));
    CHECK(lhs == Approx(rhs).margin(1e-12 * std::max(1.0, std::abs(rhs))));
  }
}

TEST_CASE("vee_hess has the bi-form symmetry exactly and acts pointwise") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    int N = rng.uniform_int(2, 4), n = rng.uniform_int(1, 4);
    Direction xi = rng.direction(N);
    Hess X = rng.hess(N, n);
    BiForm b = vee_hess(xi, X);
    for (int al = 0; al < N; ++al)
      for (int i = 0; i < n; ++i)
        for (int be = 0; be < N; ++be)
          for (int j = 0; j < n; ++j)
            REQUIRE(b.at(al, i, be, j) == b.at(be, j, al, i));

    // (xi v X) : (w (x) v) = xi v (X : w (x) v), both sides by explicit loops
    Vec w = rng.normal_vec(n), v = rng.normal_vec(n);
    SymMat lhs(N);
    for (int al = 0; al < N; ++al)
      for (int be = 0; be < N; ++be) {
        double s = 0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) s += b.at(al, i, be, j) * w[i] * v[j];
        lhs(al, be) = s;
      }
    SymMat rhs = vee(xi.vec(), X.contract_pair(w, v));
    for (int al = 0; al < N; ++al)
      for (int be = 0; be < N; ++be)
        CHECK(lhs(al, be) == Approx(rhs(al, be)).margin(1e-12));
  }
}

TEST_CASE("projections along and perpendicular to a direction") {
  Direction e1(Vec{1.0, 0.0});
  SymMat along = project_along(e1), perp = project_perp(e1);
  CHECK(along(0, 0) == 1.0);
  CHECK(along(1, 1) == 0.0);
  CHECK(perp(0, 0) == 0.0);
  CHECK(perp(1, 1) == 1.0);

  Direction diag = Direction::normalised(Vec{1.0, 1.0});
  SymMat d = project_along(diag);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(d(i, j) == Approx(0.5));

  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    int N = rng.uniform_int(2, 6);
    Direction xi = rng.direction(N);
    SymMat a = project_along(xi), p = project_perp(xi);
    // idempotent, complementary, and perp annihilates xi
    CHECK(norm(p.apply(xi.vec())) < 1e-12);
    for (int i = 0; i < N; ++i) {
      Vec ei = basis_vec(N, i);
      Vec aa = a.apply(a.apply(ei)), a1 = a.apply(ei);
      Vec pp = p.apply(p.apply(ei)), p1 = p.apply(ei);
      CHECK(norm(sub(aa, a1)) < 1e-12);
      CHECK(norm(sub(pp, p1)) < 1e-12);
      CHECK(norm(sub(add(a1, p1), ei)) < 1e-12);
    }
  }
}

TEST_CASE("closed-form spectrum of xi v R") {
  SECTION("xi = e1, R = e2: eigenvalues -1/2 and 1/2") {
    Direction xi(Vec{1.0, 0.0});
    Vec R{0.0, 1.0};
    Spectrum sp = vee_spectrum(xi, R);
    REQUIRE(sp.eigenvalues.size() == 2);
    CHECK(sp.eigenvalues[0] == Approx(-0.5));
    CHECK(sp.eigenvalues[1] == Approx(0.5));
    // eigenvectors span [e1 - e2] and [e1 + e2]
    Vec vm = sp.eigenvectors[0], vp = sp.eigenvectors[1];
    CHECK(std::abs(vm[0] + vm[1]) < 1e-12);
    CHECK(std::abs(vp[0] - vp[1]) < 1e-12);
  }
  SECTION("R colinear with xi") {
    Direction xi(Vec{1.0, 0.0});
    Spectrum sp = vee_spectrum(xi, Vec{3.0, 0.0});
    CHECK(sp.eigenvalues.front() == Approx(0.0));
    CHECK(sp.eigenvalues.back() == Approx(3.0));
    Spectrum sn = vee_spectrum(xi, Vec{-2.0, 0.0});
    CHECK(sn.eigenvalues.front() == Approx(-2.0));
    CHECK(sn.eigenvalues.back() == Approx(0.0));
    CHECK(max_sigma_vee_rep_sign(xi, Vec{-2.0, 0.0}) == Approx(0.0));
  }
  SECTION("R = 0 gives the zero spectrum") {
    Direction xi(Vec{0.0, 1.0});
    Spectrum sp = vee_spectrum(xi, Vec{0.0, 0.0});
    CHECK(sp.eigenvalues.front() == 0.0);
    CHECK(sp.eigenvalues.back() == 0.0);
  }
}

TEST_CASE("closed-form spectrum matches the Jacobi eigensolver") {
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    int N = rng.uniform_int(2, 6);
    Direction xi = rng.direction(N);
    Vec R = scaled(rng.normal_vec(N), rng.uniform(0.1, 3.0));
    Spectrum closed = vee_spectrum(xi, R);
    Spectrum iter = jacobi_eigensystem(vee(xi.vec(), R));
    double scale = std::max(1.0, norm(R));
    for (int k = 0; k < N; ++k)
      REQUIRE(closed.eigenvalues[k] ==
              Approx(iter.eigenvalues[k]).margin(1e-10 * scale));
    // eigen-equation residual and orthonormality
    SymMat A = vee(xi.vec(), R);
    for (int k = 0; k < N; ++k) {
      Vec res = sub(A.apply(closed.eigenvectors[k]),
                    scaled(closed.eigenvectors[k], closed.eigenvalues[k]));
      REQUIRE(norm(res) < 1e-10 * scale);
      for (int l = k + 1; l < N; ++l)
        REQUIRE(std::abs(dot(closed.eigenvectors[k], closed.eigenvectors[l])) <
                1e-10);
    }
  }
}

TEST_CASE("spectrum representation formulas agree") {
  Rng rng(37);
  for (int trial = 0; trial < 2000; ++trial) {
    int N = rng.uniform_int(2, 5);
    Direction xi = rng.direction(N);
    Vec R = scaled(rng.normal_vec(N), std::pow(10.0, rng.uniform(-2, 1)));
    double m0 = max_sigma_vee(xi, R);
    double m1 = max_sigma_vee_rep_sign(xi, R);
    double m2 = max_sigma_vee_rep_min(xi, R);
    double tol = 1e-12 * std::max(1.0, norm(R));
    REQUIRE(std::abs(m0 - m1) <= tol);
    REQUIRE(std::abs(m0 - m2) <= tol);
  }
}

TEST_CASE("numerical radius equals the largest absolute eigenvalue") {
  CHECK(numerical_radius(SymMat::identity(3)) == Approx(1.0));
  SymMat d(2);
  d(0, 0) = 2.0;
  d(1, 1) = -3.0;
  CHECK(numerical_radius(d) == Approx(3.0));

  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    int N = rng.uniform_int(1, 8);
    SymMat A = rng.sym(N);
    Spectrum sp = jacobi_eigensystem(A);
    double expect = 0;
    for (double lam : sp.eigenvalues) expect = std::max(expect, std::abs(lam));
    CHECK(numerical_radius(A) == Approx(expect).margin(1e-10));
    // Rayleigh quotients never exceed it
    for (int probe = 0; probe < 10; ++probe) {
      Vec eta = rng.on_sphere(N);
      CHECK(std::abs(A.quad(eta)) <= numerical_radius(A) + 1e-10);
    }
  }
}

TEST_CASE("hessian construction symmetrises and records the defect") {
  std::vector<double> raw = {1.0, 2.0 + 5e-12, 2.0, 4.0};  // N=1, n=2
  Hess h = Hess::from_raw(1, 2, raw);
  CHECK(h(0, 0, 1) == h(0, 1, 0));
  CHECK(h.asymmetry_defect == Approx(5e-12));

  std::vector<double> bad = {1.0, 2.5, 2.0, 4.0};
  CHECK_THROWS_AS(Hess::from_raw(1, 2, bad), invalid_input);
}

TEST_CASE("direction validation") {
  CHECK_THROWS_AS(Direction(Vec{1.0, 1.0}), invalid_input);
  CHECK_NOTHROW(Direction(Vec{1.0, 0.0}));
  CHECK_THROWS_AS(Direction::normalised(Vec{0.0, 0.0}), invalid_input);
  CHECK(sgn(Vec{0.0, 1e-15}) == Vec{0.0, 0.0});
}

TEST_CASE("frame expansion solves the non-orthonormal system") {
  SECTION("a = xi gives (1, 0, 0)") {
    Direction xi(Vec{1.0, 0.0, 0.0});
    Direction eta = Direction::normalised(Vec{1.0, 1.0, 0.0});
    SymMat Pi = span_perp_projector(xi, eta);
    FrameExpansion f = frame_expand(xi.vec(), xi, eta, Pi);
    CHECK(f.lambda == Approx(1.0));
    CHECK(f.mu == Approx(0.0).margin(1e-14));
    CHECK(norm(f.pi_a) < 1e-14);
  }
  SECTION("hand-solved 2x2 system") {
    // xi = e1, eta = (e1+e2)/sqrt2, a = e2: lambda = -1, mu = sqrt 2
    Direction xi(Vec{1.0, 0.0});
    Direction eta = Direction::normalised(Vec{1.0, 1.0});
    SymMat Pi = span_perp_projector(xi, eta);
    FrameExpansion f = frame_expand(Vec{0.0, 1.0}, xi, eta, Pi);
    CHECK(f.lambda == Approx(-1.0));
    CHECK(f.mu == Approx(std::sqrt(2.0)));
    CHECK(norm(f.pi_a) < 1e-14);
  }
  SECTION("random frames reconstruct the input") {
    Rng rng(43);
    for (int trial = 0; trial < 200; ++trial) {
      int N = 4;
      Direction xi = rng.direction(N);
      Direction eta = rng.direction(N);
      if (std::abs(dot(xi.vec(), eta.vec())) > 0.999) continue;
      SymMat Pi = span_perp_projector(xi, eta);
      Vec a = scaled(rng.normal_vec(N), rng.uniform(0.1, 5.0));
      FrameExpansion f = frame_expand(a, xi, eta, Pi);
      Vec rec = add(add(scaled(xi.vec(), f.lambda), scaled(eta.vec(), f.mu)),
                    f.pi_a);
      REQUIRE(norm(sub(rec, a)) < 1e-12 * std::max(1.0, norm(a)));
    }
  }
  SECTION("degenerate frame is rejected") {
    Direction xi(Vec{1.0, 0.0});
    CHECK_THROWS_AS(
        frame_expand(Vec{1.0, 1.0}, xi, xi, span_perp_projector(xi, xi)),
        invalid_input);
  }
}

TEST_CASE("dimension caps") {
  CHECK_THROWS_AS(Mat(17, 2), invalid_input);
  CHECK_THROWS_AS(Hess(2, 17), invalid_input);
  CHECK_NOTHROW(Mat(16, 16));
}
