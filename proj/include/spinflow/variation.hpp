#pragma once

// First-variation formula of W_lambda, central-difference oracles, integral
// evolution checks, Euler-Lagrange residuals, critical-point identities, and
// the parabolic regime classification.

#include <string>
#include <vector>

#include "spinflow/functionals.hpp"

namespace spinflow {

struct VariationDirection {
  Sym2Field g_dot;
  ScalarField f_dot;
  SpinorField psi_dot;
  double tau_dot = 0.0;
};

inline VariationDirection random_direction(const Grid& g, std::uint64_t seed,
                                           int kmax, double amp,
                                           double tau_dot = 0.0) {
  VariationDirection d;
  d.g_dot = random_sym2(g, detail::mix_seed(seed, 0xd1), kmax, amp);
  d.f_dot = random_scalar(g, detail::mix_seed(seed, 0xd2), kmax, amp);
  d.psi_dot = random_spinor(g, detail::mix_seed(seed, 0xd3), kmax, amp);
  d.tau_dot = tau_dot;
  return d;
}

// (1/2) tr_g g_dot - f_dot - n tau_dot / (2 tau)
inline ScalarField measure_rate(const GeometryCache& geo,
                                const VariationDirection& dir,
                                const FlowConstants& k) {
  const int n = geo.grid().n;
  ScalarField out = trace(geo, dir.g_dot);
  out *= 0.5;
  out -= dir.f_dot;
  const double shift = n * dir.tau_dot / (2.0 * k.tau);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] -= shift;
  return out;
}

// d/dt W_lambda along (g_dot, f_dot, psi_dot, tau_dot), assembled from the
// closed-form first variation:
//   int { <tau g_dot - tau_dot g, Ric_f - (lambda/2tau) g> - <g_dot, L_V g + 2S>
//         + 8 Re<D_f^2 psi, psi_dot>
//         + ((1/2)tr g_dot - f_dot - n tau_dot/2tau)
//           (4 Re<D_f^2 psi, psi> - tau R_f - lambda(f-n-1)) } dOmega
inline double first_variation_rhs(const GeometryCache& geo, const ScalarField& f,
                                  const SpinorField& psi, const CliffordRep& rep,
                                  const FlowConstants& k,
                                  const VariationDirection& dir) {
  k.validate();
  const int n = geo.grid().n;
  const Grid& grid = geo.grid();

  SpinorJet jet = covariant_derivative_spinor(psi, geo, rep);
  SpinorTensors st = spinor_tensors(jet, geo, rep, f);
  Sym2Field ricf = ric_f(geo, f);
  ScalarField Rf = r_f(geo, f);
  SpinorField Df2 = dirac_f(dirac_f(jet, geo, rep, f), geo, rep, f);

  // Ric_f - (lambda/2tau) g
  Sym2Field target = ricf;
  {
    Sym2Field lam = geo.g();
    lam *= k.lambda / (2.0 * k.tau);
    target -= lam;
  }
  // tau g_dot - tau_dot g
  Sym2Field a = dir.g_dot;
  a *= k.tau;
  {
    Sym2Field b = geo.g();
    b *= dir.tau_dot;
    a -= b;
  }
  ScalarField term1 = tensor_inner(geo, a, target);

  Sym2Field lvs = lie_derivative_metric(geo, st.V);
  lvs += 2.0 * st.S;
  ScalarField term2 = tensor_inner(geo, dir.g_dot, lvs);

  ScalarField term3 = 8.0 * re_inner_field(Df2, dir.psi_dot);

  ScalarField fac = measure_rate(geo, dir, k);
  ScalarField bracket = 4.0 * re_inner_field(Df2, psi);
  for (std::size_t p = 0; p < grid.points(); ++p)
    bracket[p] -= k.tau * Rf[p] + k.lambda * (f[p] - n - 1);

  ScalarField integrand = term1 - term2 + term3 + multiply(fac, bracket);
  return integrate(integrand, weighted_measure(geo.g(), f, k.tau));
}

// Spinor compensation for the metric path. The variational psi_dot is taken
// through the Bourguignon-Gauduchon identification of spinor bundles, under
// which the orthonormal frame g^{-1/2} acquires no rotation. Holding spinor
// components fixed while g moves along g_dot rotates the frame by the
// antisymmetric part of A = -S^{-1} S_dot (S = g^{1/2}, S S_dot + S_dot S =
// g_dot), so a component-represented path must carry the generator
// (1/4) A^-_{ab} gamma_a gamma_b psi to realize a given BG-derivative.
inline SpinorField bg_rotation(const Sym2Field& g, const Sym2Field& g_dot,
                               const SpinorField& psi, const CliffordRep& rep) {
  const int n = g.grid().n;
  SpinorField out(g.grid());
  Eigen::MatrixXd gp(n, n), hp(n, n);
  for (std::size_t p = 0; p < g.points(); ++p) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        gp(i, j) = g.at(i, j, p);
        hp(i, j) = g_dot.at(i, j, p);
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gp);
    Eigen::MatrixXd Q = es.eigenvectors();
    Eigen::VectorXd lam = es.eigenvalues();
    // S_dot in the eigenbasis of g: (Q^T g_dot Q)_{ij} / (sqrt(l_i)+sqrt(l_j))
    Eigen::MatrixXd hb = Q.transpose() * hp * Q;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        hb(i, j) /= std::sqrt(lam(i)) + std::sqrt(lam(j));
    Eigen::MatrixXd Sdot = Q * hb * Q.transpose();
    Eigen::MatrixXd A = -es.operatorInverseSqrt() * Sdot;
    Eigen::MatrixXd Am = 0.5 * (A - A.transpose());
    SpinorValue v = SpinorValue::Zero();
    SpinorValue base = spinor_at(psi, p);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) v += 0.25 * Am(a, b) * (rep.gamma[a] * (rep.gamma[b] * base));
    spinor_set(out, p, v);
  }
  return out;
}

// central-difference derivative of W_lambda along the linear path
inline double w_lambda_central_difference(const Sym2Field& g,
                                          const ScalarField& f,
                                          const SpinorField& psi,
                                          const CliffordRep& rep,
                                          const FlowConstants& k,
                                          const VariationDirection& dir,
                                          double eps) {
  SpinorField rot = bg_rotation(g, dir.g_dot, psi, rep);
  auto eval = [&](double t) {
    Sym2Field gt = g + t * dir.g_dot;
    ScalarField ft = f + t * dir.f_dot;
    SpinorField pt = psi + t * dir.psi_dot - t * rot;
    FlowConstants kt = k;
    kt.tau += t * dir.tau_dot;
    GeometryCache geo(gt);
    return w_lambda(geo, ft, pt, rep, kt);
  };
  return (eval(eps) - eval(-eps)) / (2.0 * eps);
}

// ---------------------------------------------------------------------------
// Integral evolution formulas
// ---------------------------------------------------------------------------

struct EvolutionResidual {
  std::string name;
  double numeric;  // central-difference path derivative
  double formula;  // closed-form RHS
  double residual() const { return std::abs(numeric - formula); }
};

// residuals of the four displayed integral evolution equations plus the two
// constraint-integral derivatives, all along the linear path
inline std::vector<EvolutionResidual> integral_evolution_check(
    const Sym2Field& g, const ScalarField& f, const SpinorField& psi,
    const CliffordRep& rep, const FlowConstants& k,
    const VariationDirection& dir, double eps = 1e-3) {
  const Grid& grid = g.grid();
  const int n = grid.n;

  // path evaluation of the six monitored integrals (see bg_rotation)
  SpinorField rot = bg_rotation(g, dir.g_dot, psi, rep);
  auto integrals = [&](double t) {
    Sym2Field gt = g + t * dir.g_dot;
    ScalarField ft = f + t * dir.f_dot;
    SpinorField pt = psi + t * dir.psi_dot - t * rot;
    const double taut = k.tau + t * dir.tau_dot;
    GeometryCache geo(gt);
    MeasureField m = weighted_measure(gt, ft, taut);
    SpinorJet jet = covariant_derivative_spinor(pt, geo, rep);
    ScalarField Rf = r_f(geo, ft);
    ScalarField n2 = norm_sq(pt);
    ScalarField fshift = ft;
    for (std::size_t p = 0; p < grid.points(); ++p) fshift[p] -= n;
    ScalarField one(grid, 1.0);
    return std::array<double, 6>{
        integrate(Rf, m),
        integrate(multiply(Rf, n2), m),
        integrate(grad_norm_sq(jet), m),
        integrate(fshift, m),
        integrate(one, m),
        integrate(n2, m)};
  };
  std::array<double, 6> plus = integrals(eps), minus = integrals(-eps);

  // closed-form right-hand sides at t = 0
  GeometryCache geo(g);
  MeasureField m = weighted_measure(g, f, k.tau);
  SpinorJet jet = covariant_derivative_spinor(psi, geo, rep);
  Sym2Field ricf = ric_f(geo, f);
  ScalarField Rf = r_f(geo, f);
  ScalarField n2 = norm_sq(psi);
  ScalarField fac = measure_rate(geo, dir, k);
  SpinorField Df2 = dirac_f(dirac_f(jet, geo, rep, f), geo, rep, f);
  SpinorTensors st = spinor_tensors(jet, geo, rep, f);
  ScalarField gdot_ricf = tensor_inner(geo, dir.g_dot, ricf);

  // (eq:ev_R_f)
  ScalarField i1 = multiply(fac, Rf) - gdot_ricf;

  // (eq:ev_R_f|psi|^2): div_f div_f g_dot enters weighted by |psi|^2
  ScalarField divdiv = divergence_f_covector(geo, f, divergence_f(geo, f, dir.g_dot));
  ScalarField i2(grid);
  {
    ScalarField gn = grad_norm_sq(jet);
    ScalarField bochner = re_inner_field(Df2, psi) - gn;
    ScalarField cross = re_inner_field(dir.psi_dot, psi);
    for (std::size_t p = 0; p < grid.points(); ++p)
      i2[p] = -gdot_ricf[p] * n2[p] + n2[p] * divdiv[p] +
              2.0 * cross[p] * Rf[p] + 4.0 * fac[p] * bochner[p];
  }

  // (eq:ev_|nabla_psi|^2)
  ScalarField i3(grid);
  {
    Sym2Field pair = divergence_f(geo, f, st.T);
    pair *= 0.5;
    pair += st.P;
    ScalarField gterm = tensor_inner(geo, dir.g_dot, pair);
    ScalarField lap = re_inner_field(dir.psi_dot,
                                     laplacian_f_spinor(jet, geo, rep, f));
    ScalarField gn = grad_norm_sq(jet);
    for (std::size_t p = 0; p < grid.points(); ++p)
      i3[p] = fac[p] * gn[p] - 2.0 * lap[p] - gterm[p];
  }

  // (eq:ev_f)
  ScalarField i4 = dir.f_dot;
  for (std::size_t p = 0; p < grid.points(); ++p)
    i4[p] += fac[p] * (f[p] - n);

  // (eq:dI/dt) and (eq:dJ/dt)
  ScalarField i5 = fac;
  ScalarField i6 = 2.0 * re_inner_field(dir.psi_dot, psi) + multiply(fac, n2);

  const char* names[6] = {"ev_R_f", "ev_R_f_psi2", "ev_grad_psi2",
                          "ev_f", "dI_dt", "dJ_dt"};
  const ScalarField* rhs[6] = {&i1, &i2, &i3, &i4, &i5, &i6};
  std::vector<EvolutionResidual> out;
  for (int q = 0; q < 6; ++q)
    out.push_back({names[q], (plus[q] - minus[q]) / (2.0 * eps),
                   integrate(*rhs[q], m)});
  return out;
}

// ---------------------------------------------------------------------------
// Euler-Lagrange residuals
// ---------------------------------------------------------------------------

struct ELReport {
  Sym2Field metric_residual;    // Ric + L_{(1/2)grad f - V/tau} g - (2/tau)S - (lambda/2tau) g
  SpinorField spinor_residual;  // Delta_f psi + (|grad psi|^2/c) psi
  SpinorField spinor_residual_eigen;  // D_f^2 psi - (beta/4) psi
  ScalarField scalar_residual;        // tau R_f + lambda(f-n) - (lambda - alpha)
  double beta = 0.0;
  double alpha = 0.0;
  Sym2Field soliton_residual;  // (1-c/tau)Ric_f - (lambda/2tau)g - (2/tau)div_f T - (4/tau)P
};

inline ELReport el_residuals(const GeometryCache& geo, const ScalarField& f,
                             const SpinorField& psi, const CliffordRep& rep,
                             const FlowConstants& k) {
  k.validate();
  const Grid& grid = geo.grid();
  const int n = grid.n;
  ELReport r;

  SpinorJet jet = covariant_derivative_spinor(psi, geo, rep);
  SpinorTensors st = spinor_tensors(jet, geo, rep, f);
  MeasureField m = weighted_measure(geo.g(), f, k.tau);
  SpinorField Dfpsi = dirac_f(jet, geo, rep, f);

  // beta = (4/c) int |D_f psi|^2 dOmega
  ScalarField d2(grid);
  for (std::size_t p = 0; p < grid.points(); ++p) d2[p] = Dfpsi.norm_sq(p);
  r.beta = 4.0 / k.c * integrate(d2, m);

  // metric residual
  VectorField X = gradient(geo, f);
  X *= 0.5;
  X -= (1.0 / k.tau) * st.V;
  r.metric_residual = geo.ric() + lie_derivative_metric(geo, X);
  r.metric_residual -= (2.0 / k.tau) * st.S;
  {
    Sym2Field lam = geo.g();
    lam *= k.lambda / (2.0 * k.tau);
    r.metric_residual -= lam;
  }

  // spinor residuals
  ScalarField gn = grad_norm_sq(jet);
  r.spinor_residual = laplacian_f_spinor(jet, geo, rep, f);
  for (std::size_t p = 0; p < grid.points(); ++p) {
    SpinorValue v = spinor_at(r.spinor_residual, p) +
                    (gn[p] / k.c) * spinor_at(jet.value, p);
    spinor_set(r.spinor_residual, p, v);
  }
  SpinorField Df2 = dirac_f(Dfpsi, geo, rep, f);
  r.spinor_residual_eigen = Df2 - (0.25 * r.beta) * psi;

  // scalar residual with alpha fitted as the dOmega-mean of the equation
  ScalarField Rf = r_f(geo, f);
  ScalarField scalar(grid);
  for (std::size_t p = 0; p < grid.points(); ++p)
    scalar[p] = k.tau * Rf[p] + k.lambda * (f[p] - n);
  ScalarField one(grid, 1.0);
  const double mass = integrate(one, m);
  r.alpha = k.lambda - integrate(scalar, m) / mass;
  r.scalar_residual = scalar;
  for (std::size_t p = 0; p < grid.points(); ++p)
    r.scalar_residual[p] -= k.lambda - r.alpha;

  // stationary ("twisted" Ricci soliton) equation residual
  r.soliton_residual = ric_f(geo, f);
  r.soliton_residual *= 1.0 - k.c / k.tau;
  {
    Sym2Field lam = geo.g();
    lam *= k.lambda / (2.0 * k.tau);
    r.soliton_residual -= lam;
  }
  r.soliton_residual -= (2.0 / k.tau) * divergence_f(geo, f, st.T);
  r.soliton_residual -= (4.0 / k.tau) * st.P;
  return r;
}

// both sides of the two critical-point integral identities:
//   int R_f dOmega = n lambda/2tau + (4/tau) int |D_f psi|^2 dOmega
//   (1 - c/tau) int |D_f psi|^2 dOmega = nc lambda/8tau + int |grad psi|^2 dOmega
struct CriticalIdentities {
  double lhs1, rhs1, lhs2, rhs2;
};

inline CriticalIdentities critical_identities(const GeometryCache& geo,
                                              const ScalarField& f,
                                              const SpinorField& psi,
                                              const CliffordRep& rep,
                                              const FlowConstants& k) {
  k.validate();
  const int n = geo.grid().n;
  MeasureField m = weighted_measure(geo.g(), f, k.tau);
  SpinorJet jet = covariant_derivative_spinor(psi, geo, rep);
  SpinorField Dfpsi = dirac_f(jet, geo, rep, f);
  ScalarField d2(geo.grid());
  for (std::size_t p = 0; p < d2.size(); ++p) d2[p] = Dfpsi.norm_sq(p);
  const double intRf = integrate(r_f(geo, f), m);
  const double intD = integrate(d2, m);
  const double intG = integrate(grad_norm_sq(jet), m);
  CriticalIdentities out;
  out.lhs1 = intRf;
  out.rhs1 = n * k.lambda / (2.0 * k.tau) + 4.0 / k.tau * intD;
  out.lhs2 = (1.0 - k.c / k.tau) * intD;
  out.rhs2 = n * k.c * k.lambda / (8.0 * k.tau) + intG;
  return out;
}

// ---------------------------------------------------------------------------
// Regime classification
// ---------------------------------------------------------------------------

enum class Regime { fully_forward, degenerate, backward_forward };

struct RegimeReport {
  Regime regime;
  bool lambda_admissible;     // necessary sign condition on lambda
  double bound_value;         // regime-specific bound (see below)
};

// c > tau: fully_forward, critical points require lambda <= 0 (bound unused).
// c = tau: degenerate, int |grad psi|^2 dOmega = -n lambda / 8 (bound_value).
// c < tau: backward_forward; if lambda > 0 then
//          int |D_f psi|^2 dOmega >= nc lambda / (8(tau - c)) (bound_value).
inline RegimeReport regime_classify(int n, const FlowConstants& k) {
  k.validate();
  RegimeReport r{};
  if (k.c > k.tau) {
    r.regime = Regime::fully_forward;
    r.lambda_admissible = k.lambda <= 0.0;
    r.bound_value = 0.0;
  } else if (k.c == k.tau) {
    r.regime = Regime::degenerate;
    r.lambda_admissible = k.lambda <= 0.0;
    r.bound_value = -n * k.lambda / 8.0;
  } else {
    r.regime = Regime::backward_forward;
    r.lambda_admissible = true;
    r.bound_value =
        k.lambda > 0.0 ? n * k.c * k.lambda / (8.0 * (k.tau - k.c)) : 0.0;
  }
  return r;
}

}  // namespace spinflow
