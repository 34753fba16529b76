#include <catch2/catch_amalgamated.hpp>

#include "conjet/orderings.hpp"
#include "conjet/rng.hpp"

using namespace conjet;
using Catch::Approx;

namespace {

// Brute-force oracle for N = n = 2: minimum of the rank-one quadratic form
// over a 1-degree product grid on both circles.
double grid_min_rank_one(const BiForm& Xi) {
  const double deg = 3.14159265358979323846 / 180.0;
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 360; ++a)
    for (int b = 0; b < 360; ++b) {
      Vec eta{std::cos(a * deg), std::sin(a * deg)};
      Vec w{std::cos(b * deg), std::sin(b * deg)};
      best = std::min(best, Xi.rank_one_value(eta, w));
    }
  return best;
}

BiForm random_separately_symmetric(Rng& rng, int N, int n, double scale) {
  // Xi_{ai,bj} = Xi_{bj,ai} = Xi_{bi,aj}: draw on canonical representatives.
  BiForm b(N, n);
  for (int al = 0; al < N; ++al)
    for (int be = al; be < N; ++be)
      for (int i = 0; i < n; ++i)
        for (int j = (al == be ? i : 0); j < n; ++j) {
          double v = scale * rng.normal();
          b.at(al, i, be, j) = v;
          b.at(be, j, al, i) = v;
          b.at(be, i, al, j) = v;
          b.at(al, j, be, i) = v;
        }
  return b;
}

}  // namespace

TEST_CASE("identity form is positive and rank-one positive") {
  BiForm id = identity_form(2, 2);
  RankOneCertificate c = min_rank_one_value(id);
  CHECK(c.positive());
  CHECK(c.min_value == Approx(1.0).margin(1e-9));
  CHECK(is_positive(id));
}

TEST_CASE("negated identity form has minimum -1 with a unit witness") {
  BiForm neg = -1.0 * identity_form(2, 2);
  RankOneCertificate c = min_rank_one_value(neg);
  CHECK_FALSE(c.positive());
  CHECK(c.min_value == Approx(-1.0).margin(1e-9));
  CHECK(norm(c.witness_eta) == Approx(1.0));
  CHECK(norm(c.witness_w) == Approx(1.0));
  // the witness re-evaluates to the reported minimum
  CHECK(neg.rank_one_value(c.witness_eta, c.witness_w) ==
        Approx(c.min_value).margin(1e-12));
  CHECK_FALSE(is_positive(neg));
}

TEST_CASE("determinant form separates the two orderings") {
  BiForm det = determinant_form();
  // quadratic form value is 2 det P
  Mat P = Mat::from(2, 2, {1.0, 2.0, 3.0, 4.0});
  CHECK(det.quad(P) == Approx(2.0 * (1.0 * 4.0 - 2.0 * 3.0)));

  // rank-one positive: det(eta (x) w) = 0, certified by the optimizer and by
  // the 1-degree product grid
  RankOneCertificate c = min_rank_one_value(det);
  CHECK(c.positive());
  CHECK(std::abs(c.min_value) < 1e-9);
  CHECK(grid_min_rank_one(det) >= -1e-9);

  // yet indefinite as a quadratic form: flattening has eigenvalues +-1
  CHECK_FALSE(is_positive(det));
  Spectrum sp = jacobi_eigensystem(det.flatten());
  CHECK(sp.eigenvalues.front() == Approx(-1.0));
  CHECK(sp.eigenvalues.back() == Approx(1.0));
}

TEST_CASE("alternating certifier matches the grid oracle on random forms") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    BiForm Xi = rng.biform(2, 2);
    RankOneCertificate c = min_rank_one_value(Xi);
    double oracle = grid_min_rank_one(Xi);
    // the optimizer refines grid minima; allow the grid's resolution error
    CHECK(c.min_value <= oracle + 1e-6);
    CHECK(c.min_value >= oracle - 0.05 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("positivity implies rank-one positivity") {
  Rng rng(103);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int N = rng.uniform_int(1, 3), n = rng.uniform_int(1, 3);
    BiForm Xi = rng.biform(N, n);
    if (!is_positive(Xi)) {
      // shift by the most negative eigenvalue to manufacture a PSD form
      double lam = min_eigenvalue(Xi.flatten());
      BiForm shift = identity_form(N, n);
      Xi += (-lam + 0.01) * shift;
    }
    REQUIRE(is_positive(Xi));
    RankOneCertificate c = min_rank_one_value(Xi);
    REQUIRE(c.min_value >= -1e-9);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("rank-one convexity along rank-one lines (second differences)") {
  Rng rng(107);
  BiForm forms[] = {identity_form(2, 2), determinant_form()};
  for (const BiForm& Xi : forms) {
    for (int trial = 0; trial < 100; ++trial) {
      Mat P = rng.mat(2, 2);
      Vec eta = rng.on_sphere(2), w = rng.on_sphere(2);
      double t = rng.uniform(-2, 2), h = rng.uniform(0.01, 1.0);
      auto f = [&](double tt) {
        Mat Q = P;
        Mat step = outer(eta, w);
        step *= tt;
        Q += step;
        return Xi.quad(Q);
      };
      CHECK(f(t + h) - 2 * f(t) + f(t - h) >= -1e-10);
    }
  }
}

TEST_CASE("antisymmetry on the separately symmetric subspace") {
  Rng rng(109);
  const double tol = 1e-9;
  for (double scale : {0.0, 1e-12, 1e-10, 1e-4, 1.0}) {
    BiForm Xi = random_separately_symmetric(rng, 2, 2, scale);
    RankOneCertificate plus = min_rank_one_value(Xi);
    RankOneCertificate minus = min_rank_one_value(-1.0 * Xi);
    bool both_nonneg = plus.min_value >= -tol && minus.min_value >= -tol;
    double sym_norm = 0;  // the symmetrisation (Xi_{ai,bj} + Xi_{bj,ai}) = 2 Xi here
    for (double x : Xi.a) sym_norm = std::max(sym_norm, 2.0 * std::abs(x));
    if (both_nonneg) CHECK(sym_norm <= 10 * tol);
    if (sym_norm > 10 * tol) CHECK_FALSE(both_nonneg);
  }
}

TEST_CASE("transitivity of the rank-one ordering at the certificate level") {
  Rng rng(113);
  for (int trial = 0; trial < 20; ++trial) {
    int N = rng.uniform_int(2, 3), n = rng.uniform_int(1, 3);
    // nonpositive parts: negated sums of squares of rank-one forms
    auto nonpos_part = [&]() {
      BiForm d(N, n);
      for (int k = 0; k < 3; ++k) {
        Vec eta = rng.on_sphere(N), w = rng.on_sphere(n);
        double c = rng.uniform(0.1, 2.0);
        Mat r = outer(eta, w);
        for (int al = 0; al < N; ++al)
          for (int i = 0; i < n; ++i)
            for (int be = 0; be < N; ++be)
              for (int j = 0; j < n; ++j)
                d.at(al, i, be, j) -= c * r(al, i) * r(be, j);
      }
      return d;
    };
    BiForm Xi = rng.biform(N, n);
    BiForm d1 = nonpos_part(), d2 = nonpos_part();
    BiForm Theta = Xi - d1;   // Xi - Theta = d1 <=ox 0
    BiForm H = Theta - d2;    // Theta - H = d2 <=ox 0
    CHECK(min_rank_one_value(-1.0 * (Xi - Theta)).min_value >= -1e-9);
    CHECK(min_rank_one_value(-1.0 * (Theta - H)).min_value >= -1e-9);
    CHECK(min_rank_one_value(-1.0 * (Xi - H)).min_value >= -1e-9);
  }
}

TEST_CASE("vee_nonpos_vector evaluates the four-way equivalence") {
  Direction xi = Direction::normalised(Vec{3.0, 4.0});

  SECTION("v = -3 xi holds") {
    VeeNonposVector r = vee_nonpos_vector(xi, scaled(xi.vec(), -3.0));
    CHECK(r.holds);
    CHECK(r.decomposition == Approx(-3.0));
  }
  SECTION("v = +xi fails") {
    CHECK_FALSE(vee_nonpos_vector(xi, xi.vec()).holds);
  }
  SECTION("nonzero perpendicular part fails") {
    Direction e1(Vec{1.0, 0.0});
    CHECK_FALSE(vee_nonpos_vector(e1, Vec{-1.0, 0.1}).holds);
  }
  SECTION("v = 0 holds") {
    CHECK(vee_nonpos_vector(xi, Vec{0.0, 0.0}).holds);
  }
  SECTION("constructed positive and negative batteries agree across routes") {
    Rng rng(127);
    for (int trial = 0; trial < 500; ++trial) {
      int N = rng.uniform_int(2, 5);
      Direction d = rng.direction(N);
      Vec good = scaled(d.vec(), -rng.uniform(0.0, 4.0));
      CHECK(vee_nonpos_vector(d, good).holds);
      Vec bad = rng.uniform() < 0.5
                    ? scaled(d.vec(), rng.uniform(0.1, 4.0))
                    : add(scaled(d.vec(), -1.0),
                          scaled(perp_part(d, rng.normal_vec(N)), 0.5));
      if (norm(perp_part(d, bad)) > 1e-6 || dot(d.vec(), bad) > 1e-6)
        CHECK_FALSE(vee_nonpos_vector(d, bad).holds);
    }
  }
}

TEST_CASE("vee_nonpos_hess evaluates the three-route equivalence") {
  const int n = 2;
  Direction xi = Direction::normalised(Vec{1.0, 2.0});
  Direction eta = Direction::normalised(perp_part(xi, Vec{1.0, 0.0}));

  SECTION("X = xi (x) (-I) holds") {
    SymMat negI = -1.0 * SymMat::identity(n);
    CHECK(vee_nonpos_hess(xi, tensor_dir(xi.vec(), negI)).holds);
  }
  SECTION("X = eta (x) (-I) with eta perp xi fails") {
    SymMat negI = -1.0 * SymMat::identity(n);
    CHECK_FALSE(vee_nonpos_hess(xi, tensor_dir(eta.vec(), negI)).holds);
  }
  SECTION("X = xi (x) I fails") {
    CHECK_FALSE(vee_nonpos_hess(xi, tensor_dir(xi.vec(), SymMat::identity(n))).holds);
  }
  SECTION("constructed batteries agree across routes") {
    Rng rng(131);
    for (int trial = 0; trial < 100; ++trial) {
      int N = rng.uniform_int(2, 3), nn = rng.uniform_int(1, 3);
      Direction d = rng.direction(N);
      SymMat M = rng.psd(nn);
      CHECK(vee_nonpos_hess(d, tensor_dir(d.vec(), -1.0 * M)).holds);
      // positive axis part, or a perpendicular component: both must fail
      Hess bad = rng.uniform() < 0.5
                     ? tensor_dir(d.vec(), M + 0.5 * SymMat::identity(nn))
                     : tensor_dir(d.vec(), -1.0 * M) +
                           tensor_dir(perp_part(d, rng.on_sphere(N)),
                                      SymMat::identity(nn));
      if (perp_part(d, bad).frob_norm() > 1e-6 ||
          max_eigenvalue(axis_part(d, bad)) > 1e-6)
        CHECK_FALSE(vee_nonpos_hess(d, bad).holds);
    }
  }
}

TEST_CASE("orderings coincide on the cone of vee products") {
  Rng rng(137);
  for (int trial = 0; trial < 200; ++trial) {
    int N = rng.uniform_int(2, 3), n = rng.uniform_int(1, 3);
    Vec eta = rng.normal_vec(N);
    double ne = norm(eta);
    if (ne < 1e-6) continue;
    // half the battery lies on the nonpositive part of the cone
    Hess Y = rng.uniform() < 0.5
                 ? rng.hess(N, n)
                 : tensor_dir(scaled(eta, 1.0 / ne), -1.0 * rng.psd(n));
    BiForm Z = vee_hess(Direction::normalised(eta), Y);
    Z *= ne;  // eta v Y for non-unit eta
    bool natural = max_eigenvalue(Z.flatten()) <= 1e-9 * std::max(1.0, Z.frob_norm());
    bool rank_one =
        min_rank_one_value(-1.0 * Z).min_value >= -1e-9 * std::max(1.0, Z.frob_norm());
    CHECK(natural == rank_one);
  }
}

TEST_CASE("non-symmetric input is rejected") {
  std::vector<double> raw(16, 0.0);
  raw[1] = 1.0;  // Xi_{0,0,0,1} without its mirror
  CHECK_THROWS_AS(BiForm::from_raw(2, 2, raw), invalid_input);
}
