#include <catch2/catch_amalgamated.hpp>

#include "spinflow/geometry.hpp"

using namespace spinflow;

namespace {

Sym2Field flat_metric(const Grid& g) {
  Sym2Field m(g);
  for (int i = 0; i < g.n; ++i)
    for (std::size_t p = 0; p < m.points(); ++p) m.at(i, i, p) = 1.0;
  return m;
}

struct Conformal {
  ScalarField u;
  Sym2Field g;
};

Conformal conformal_metric(const Grid& gr, std::uint64_t seed, double amp) {
  ScalarField u = random_scalar(gr, seed, 3, amp);
  Sym2Field g(gr);
  for (std::size_t p = 0; p < g.points(); ++p) {
    double e2u = std::exp(2.0 * u[p]);
    for (int i = 0; i < gr.n; ++i) g.at(i, i, p) = e2u;
  }
  return {u, g};
}

}  // namespace

TEST_CASE("flat metric gives trivial geometry") {
  Grid gr(2, 16);
  GeometryCache geo(flat_metric(gr));
  REQUIRE(geo.christoffel().max_abs() == 0.0);
  REQUIRE(geo.omega().max_abs() == 0.0);
  REQUIRE(geo.ric().max_abs() <= 1e-14);
  REQUIRE(geo.scalar_curvature().max_abs() <= 1e-14);
  for (std::size_t p = 0; p < gr.points(); ++p)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        REQUIRE(geo.frame().at(i, j, p) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-14));
}

TEST_CASE("constant rectangular metric frame") {
  Grid gr(2, 16);
  Sym2Field m(gr);
  for (std::size_t p = 0; p < m.points(); ++p) {
    m.at(0, 0, p) = 4.0;
    m.at(1, 1, p) = 1.0;
  }
  GeometryCache geo(m);
  REQUIRE(geo.frame().at(0, 0, 0) == Catch::Approx(0.5));
  REQUIRE(geo.frame().at(1, 1, 0) == Catch::Approx(1.0));
  REQUIRE(geo.frame().at(0, 1, 0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("frame orthonormality for random SPD metrics") {
  Grid gr(2, 16);
  Sym2Field m = random_metric(gr, 31, 3, 0.2);
  GeometryCache geo(m);
  for (std::size_t p = 0; p < gr.points(); p += 7) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double v = 0.0;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            v += m.at(i, j, p) * geo.frame().at(a, i, p) * geo.frame().at(b, j, p);
        REQUIRE(v == Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-12));
      }
    // frame/coframe duality
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double v = 0.0;
        for (int i = 0; i < 2; ++i)
          v += geo.coframe().at(a, i, p) * geo.frame().at(b, i, p);
        REQUIRE(v == Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-12));
      }
  }
}

TEST_CASE("conformal metric oracles on T^2") {
  Grid gr(2, 64);
  auto [u, g] = conformal_metric(gr, 17, 0.1);
  GeometryCache geo(g);
  ScalarField du0 = partial_derivative(u, 0);
  ScalarField du1 = partial_derivative(u, 1);

  SECTION("Christoffel symbols: Gamma^1_{11} = d_1 u") {
    double worst = 0.0;
    for (std::size_t p = 0; p < gr.points(); ++p)
      worst = std::max(worst, std::abs(geo.christoffel().at(0, 0, 0, p) - du0[p]));
    REQUIRE(worst <= 1e-8);
    REQUIRE(geo.christoffel().at(0, 0, 1, 5) == geo.christoffel().at(0, 1, 0, 5));
  }

  SECTION("scalar curvature R = -2 e^{-2u} Delta_flat u") {
    ScalarField lap = partial_derivative(du0, 0) + partial_derivative(du1, 1);
    double worst = 0.0;
    for (std::size_t p = 0; p < gr.points(); ++p)
      worst = std::max(worst,
                       std::abs(geo.scalar_curvature()[p] + 2.0 * std::exp(-2.0 * u[p]) * lap[p]));
    REQUIRE(worst <= 1e-7);
  }

  SECTION("Ricci = (R/2) g in two dimensions") {
    double worst = 0.0;
    for (std::size_t p = 0; p < gr.points(); ++p)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          worst = std::max(worst, std::abs(geo.ric().at(i, j, p) -
                                           0.5 * geo.scalar_curvature()[p] * g.at(i, j, p)));
    REQUIRE(worst <= 1e-7);
  }

  SECTION("spin connection: omega_{iab} = d_a u delta_{ib} - delta_{ia} d_b u") {
    const ScalarField* du[2] = {&du0, &du1};
    double worst = 0.0;
    for (std::size_t p = 0; p < gr.points(); ++p)
      for (int i = 0; i < 2; ++i)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            double expect = (*du[a])[p] * (i == b ? 1.0 : 0.0) -
                            (i == a ? 1.0 : 0.0) * (*du[b])[p];
            worst = std::max(worst, std::abs(geo.omega().at(i, a, b, p) - expect));
          }
    REQUIRE(worst <= 1e-8);
  }

  SECTION("Gauss-Bonnet: integral of R vanishes on the torus") {
    MeasureField m = weighted_measure(g, ScalarField(gr, 0.0), 1.0 / (4.0 * kPi));
    REQUIRE(std::abs(integrate(geo.scalar_curvature(), m)) <= 1e-7);
  }
}

TEST_CASE("omega antisymmetry and Gauss-Bonnet for generic metrics") {
  Grid gr(2, 64);
  Sym2Field g = random_metric(gr, 23, 3, 0.15);
  GeometryCache geo(g);
  double worst = 0.0;
  for (std::size_t p = 0; p < gr.points(); ++p)
    for (int i = 0; i < 2; ++i)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          worst = std::max(worst, std::abs(geo.omega().at(i, a, b, p) +
                                           geo.omega().at(i, b, a, p)));
  REQUIRE(worst <= 1e-10);

  MeasureField m = weighted_measure(g, ScalarField(gr, 0.0), 1.0 / (4.0 * kPi));
  REQUIRE(std::abs(integrate(geo.scalar_curvature(), m)) <= 1e-7);
}

TEST_CASE("weighted scalar operators") {
  Grid gr(2, 64);

  SECTION("flat background analytic R_f") {
    GeometryCache geo(flat_metric(gr));
    ScalarField f(gr);
    int idx[3];
    for (std::size_t p = 0; p < f.size(); ++p) {
      detail::unflatten(gr, p, idx);
      f[p] = std::sin(2.0 * kPi * gr.coord(idx[0]));
    }
    ScalarField rf = r_f(geo, f);
    double worst = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) {
      detail::unflatten(gr, p, idx);
      double x = gr.coord(idx[0]);
      double expect = -8.0 * kPi * kPi * std::sin(2.0 * kPi * x) -
                      4.0 * kPi * kPi * std::cos(2.0 * kPi * x) * std::cos(2.0 * kPi * x);
      worst = std::max(worst, std::abs(rf[p] - expect));
    }
    REQUIRE(worst <= 1e-9);
  }

  SECTION("R_f = R + |grad f|^2 + 2 Delta_f f on random data") {
    // NB: with Delta_f f = Delta f - |grad f|^2, the weighted-Laplacian form
    // of R_f carries a plus sign: R + 2 Delta f - |grad f|^2
    //                           = R + |grad f|^2 + 2 Delta_f f.
    Sym2Field g = random_metric(gr, 41, 3, 0.1);
    ScalarField f = random_scalar(gr, 43, 3, 0.3);
    GeometryCache geo(g);
    ScalarField lhs = r_f(geo, f);
    ScalarField rhs = geo.scalar_curvature() + grad_inner(geo, f, f) +
                      2.0 * laplacian_f(geo, f, f);
    REQUIRE((lhs - rhs).max_abs() <= 1e-10 * (1.0 + lhs.max_abs()));
  }

  SECTION("constant f reduces weighted ops to unweighted") {
    Sym2Field g = random_metric(gr, 47, 3, 0.1);
    ScalarField f(gr, 1.7);
    GeometryCache geo(g);
    ScalarField phi = random_scalar(gr, 48, 3, 0.2);
    REQUIRE((laplacian_f(geo, f, phi) - laplacian(geo, phi)).max_abs() <= 1e-12);
    REQUIRE((ric_f(geo, f) - geo.ric()).max_abs() <= 1e-9);
    REQUIRE((r_f(geo, f) - geo.scalar_curvature()).max_abs() <= 1e-9);
  }

  SECTION("integral of Delta_f phi against dOmega vanishes") {
    Sym2Field g = random_metric(gr, 51, 3, 0.1);
    ScalarField f = random_scalar(gr, 52, 3, 0.3);
    ScalarField phi = random_scalar(gr, 53, 3, 0.5);
    GeometryCache geo(g);
    MeasureField m = weighted_measure(g, f, 0.7);
    double val = integrate(laplacian_f(geo, f, phi), m);
    REQUIRE(std::abs(val) <= 1e-8 * (1.0 + phi.max_abs()));
  }
}

TEST_CASE("Lie derivative of the metric") {
  Grid gr(2, 32);

  SECTION("flat space: L_{grad f} g = 2 Hess f") {
    GeometryCache geo(flat_metric(gr));
    ScalarField f = random_scalar(gr, 61, 3, 0.4);
    VectorField X = gradient(geo, f);
    Sym2Field lie = lie_derivative_metric(geo, X);
    Sym2Field hess2 = hessian(geo, f);
    hess2 *= 2.0;
    REQUIRE((lie - hess2).max_abs() <= 1e-10);
  }

  SECTION("trace identity tr L_X g = 2 div X") {
    Sym2Field g = random_metric(gr, 63, 3, 0.1);
    GeometryCache geo(g);
    VectorField X = random_vector(gr, 64, 3, 0.5);
    ScalarField tr = trace(geo, lie_derivative_metric(geo, X));
    ScalarField dv = divergence(geo, X);
    dv *= 2.0;
    REQUIRE((tr - dv).max_abs() <= 1e-10 * (1.0 + tr.max_abs()));
  }
}

TEST_CASE("DeTurck vector field") {
  Grid gr(2, 32);
  Sym2Field g = random_metric(gr, 71, 3, 0.1);
  GeometryCache geo(g);
  REQUIRE(deturck_vector(geo, geo).max_abs() <= 1e-14);

  // constant-coefficient backgrounds have vanishing Christoffel symbols
  Sym2Field g0(gr);
  for (std::size_t p = 0; p < g0.points(); ++p) {
    g0.at(0, 0, p) = 2.0;
    g0.at(1, 1, p) = 3.0;
    g0.at(0, 1, p) = g0.at(1, 0, p) = 0.5;
  }
  GeometryCache geo0(g0);
  GeometryCache geo_flat(flat_metric(gr));
  REQUIRE(deturck_vector(geo_flat, geo0).max_abs() <= 1e-14);
}

TEST_CASE("frame-gauge invariance of curvature and weighted operators") {
  Grid gr(2, 32);
  Sym2Field g = random_metric(gr, 81, 3, 0.15);
  GeometryCache sym(g, Scheme::spectral, FrameGauge::symmetric_sqrt);
  GeometryCache chol(g, Scheme::spectral, FrameGauge::cholesky);
  REQUIRE((sym.ric() - chol.ric()).max_abs() <= 1e-9);
  REQUIRE((sym.scalar_curvature() - chol.scalar_curvature()).max_abs() <= 1e-9);
  // both frames are orthonormal
  for (std::size_t p = 0; p < gr.points(); p += 13)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double v = 0.0;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            v += g.at(i, j, p) * chol.frame().at(a, i, p) * chol.frame().at(b, j, p);
        REQUIRE(v == Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-12));
      }
}

TEST_CASE("metric compatibility: nabla g = 0 discretely") {
  Grid gr(2, 32);
  Sym2Field g = random_metric(gr, 91, 3, 0.1);
  GeometryCache geo(g);
  double worst = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (std::size_t p = 0; p < gr.points(); ++p) {
          double v = geo.dg().at(k, i, j, p);
          for (int m = 0; m < 2; ++m)
            v -= geo.christoffel().at(m, k, i, p) * g.at(m, j, p) +
                 geo.christoffel().at(m, k, j, p) * g.at(i, m, p);
          worst = std::max(worst, std::abs(v));
        }
  REQUIRE(worst <= 1e-10);
}

TEST_CASE("3d geometry sanity") {
  Grid gr(3, 32);
  Sym2Field g = random_metric(gr, 101, 2, 0.08);
  GeometryCache geo(g);
  // omega antisymmetry
  double worst = 0.0;
  for (std::size_t p = 0; p < gr.points(); p += 11)
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          worst = std::max(worst, std::abs(geo.omega().at(i, a, b, p) +
                                           geo.omega().at(i, b, a, p)));
  REQUIRE(worst <= 1e-10);

  // conformal Ricci oracle in 3d:
  // Ric_ij = -(n-2)(u_ij - u_i u_j) - (Lap u + (n-2)|du|^2) delta_ij, flat derivatives
  auto [u, cg] = [&] {
    ScalarField uu = random_scalar(gr, 103, 2, 0.05);
    Sym2Field m(gr);
    for (std::size_t p = 0; p < m.points(); ++p) {
      double e2u = std::exp(2.0 * uu[p]);
      for (int i = 0; i < 3; ++i) m.at(i, i, p) = e2u;
    }
    return std::pair<ScalarField, Sym2Field>(uu, m);
  }();
  GeometryCache cgeo(cg);
  ScalarField du[3] = {partial_derivative(u, 0), partial_derivative(u, 1),
                       partial_derivative(u, 2)};
  ScalarField lap = partial_derivative(du[0], 0) + partial_derivative(du[1], 1) +
                    partial_derivative(du[2], 2);
  ScalarField ddu[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) ddu[i][j] = partial_derivative(du[i], j);
  double worst2 = 0.0;
  for (std::size_t p = 0; p < gr.points(); ++p) {
    double gradsq = du[0][p] * du[0][p] + du[1][p] * du[1][p] + du[2][p] * du[2][p];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double expect = -(ddu[i][j][p] - du[i][p] * du[j][p]) -
                        (lap[p] + gradsq) * (i == j ? 1.0 : 0.0);
        worst2 = std::max(worst2, std::abs(cgeo.ric().at(i, j, p) - expect));
      }
  }
  REQUIRE(worst2 <= 1e-7);
}
