#pragma once

// The entropy functional W_lambda (definition and Dirac forms), the classical
// functionals F, W, E, the constraint integrals, and a dense Dirac
// ground-eigenvalue estimate with the Friedrich-inequality check.

#include <algorithm>
#include <vector>

#include "spinflow/spinor_ops.hpp"

namespace spinflow {

struct FlowConstants {
  double tau;     // > 0
  double lambda;  // any real
  double c;       // > 0, target |psi|^2

  void validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("FlowConstants: tau must be > 0");
    if (!(c > 0.0)) throw std::invalid_argument("FlowConstants: c must be > 0");
  }
};

struct FunctionalReport {
  double W_lambda = 0.0;
  double W_lambda_dirac_form = 0.0;
  double perelman_F = 0.0;
  double perelman_W = 0.0;
  double bo_E = 0.0;
  double mass = 0.0;         // integral of dOmega
  double spinor_mass = 0.0;  // integral of |psi|^2 dOmega
};

// W_lambda = int { 4|nabla psi|^2 + R_f(|psi|^2 - tau) - lambda(f - n) } dOmega
inline double w_lambda(const GeometryCache& geo, const ScalarField& f,
                       const SpinorField& psi, const CliffordRep& rep,
                       const FlowConstants& k) {
  k.validate();
  const int n = geo.grid().n;
  SpinorJet jet = covariant_derivative_spinor(psi, geo, rep);
  ScalarField Rf = r_f(geo, f);
  ScalarField n2 = norm_sq(psi);
  ScalarField gn = grad_norm_sq(jet);
  ScalarField integrand(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p)
    integrand[p] = 4.0 * gn[p] + Rf[p] * (n2[p] - k.tau) - k.lambda * (f[p] - n);
  return integrate(integrand, weighted_measure(geo.g(), f, k.tau));
}

// Dirac form: int { 4|D_f psi|^2 - tau(R + |grad f|^2) - lambda(f - n) } dOmega
inline double w_lambda_dirac_form(const GeometryCache& geo, const ScalarField& f,
                                  const SpinorField& psi, const CliffordRep& rep,
                                  const FlowConstants& k) {
  k.validate();
  const int n = geo.grid().n;
  SpinorField Df = dirac_f(psi, geo, rep, f);
  ScalarField gf2 = grad_inner(geo, f, f);
  const ScalarField& R = geo.scalar_curvature();
  ScalarField integrand(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p)
    integrand[p] = 4.0 * Df.norm_sq(p) - k.tau * (R[p] + gf2[p]) -
                   k.lambda * (f[p] - n);
  return integrate(integrand, weighted_measure(geo.g(), f, k.tau));
}

// unnormalized weighted measure e^{-f} dmu (no (4 pi tau)^{-n/2} factor):
// realized by choosing tau so the normalization constant equals one
inline MeasureField plain_weighted_measure(const Sym2Field& g,
                                           const ScalarField& f) {
  return weighted_measure(g, f, 1.0 / (4.0 * kPi));
}

// F(g,f) = int R_f e^{-f} dmu,
// W(g,f,tau) = (4 pi tau)^{-n/2} int { tau(R + |grad f|^2) + f - n } e^{-f} dmu
inline std::pair<double, double> classical_functionals(const GeometryCache& geo,
                                                       const ScalarField& f,
                                                       double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("classical_functionals: tau <= 0");
  const int n = geo.grid().n;
  ScalarField Rf = r_f(geo, f);
  double F = integrate(Rf, plain_weighted_measure(geo.g(), f));
  ScalarField gf2 = grad_inner(geo, f, f);
  const ScalarField& R = geo.scalar_curvature();
  ScalarField integrand(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p)
    integrand[p] = tau * (R[p] + gf2[p]) + f[p] - n;
  double W = integrate(integrand, weighted_measure(geo.g(), f, tau));
  return {F, W};
}

// E(g,f,psi) = int { 4|nabla psi|^2 + R_f(|psi|^2 - 1) } e^{-f} dmu
inline double bo_energy(const GeometryCache& geo, const ScalarField& f,
                        const SpinorField& psi, const CliffordRep& rep) {
  SpinorJet jet = covariant_derivative_spinor(psi, geo, rep);
  ScalarField Rf = r_f(geo, f);
  ScalarField n2 = norm_sq(psi);
  ScalarField gn = grad_norm_sq(jet);
  ScalarField integrand(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p)
    integrand[p] = 4.0 * gn[p] + Rf[p] * (n2[p] - 1.0);
  return integrate(integrand, plain_weighted_measure(geo.g(), f));
}

// (mass, spinor_mass) = (int dOmega, int |psi|^2 dOmega)
inline std::pair<double, double> constraint_integrals(const GeometryCache& geo,
                                                      const ScalarField& f,
                                                      const SpinorField& psi,
                                                      const FlowConstants& k) {
  k.validate();
  MeasureField m = weighted_measure(geo.g(), f, k.tau);
  ScalarField one(f.grid(), 1.0);
  return {integrate(one, m), integrate(norm_sq(psi), m)};
}

inline FunctionalReport functional_report(const GeometryCache& geo,
                                          const ScalarField& f,
                                          const SpinorField& psi,
                                          const CliffordRep& rep,
                                          const FlowConstants& k) {
  FunctionalReport r;
  r.W_lambda = w_lambda(geo, f, psi, rep, k);
  r.W_lambda_dirac_form = w_lambda_dirac_form(geo, f, psi, rep, k);
  auto [F, W] = classical_functionals(geo, f, k.tau);
  r.perelman_F = F;
  r.perelman_W = W;
  r.bo_E = bo_energy(geo, f, psi, rep);
  auto [mass, smass] = constraint_integrals(geo, f, psi, k);
  r.mass = mass;
  r.spinor_mass = smass;
  return r;
}

// ---------------------------------------------------------------------------
// Dense Dirac spectrum
// ---------------------------------------------------------------------------

// All eigenvalues of the discrete Dirac operator, sorted ascending. D is
// self-adjoint in L^2(dmu); we assemble the matrix column by column,
// symmetrize with the measure weight (B = M^{1/2} D M^{-1/2} with
// M = sqrt(det g) pointwise), and solve the Hermitian problem. Intended for
// modest resolutions (dense assembly).
inline std::vector<double> dirac_spectrum(const GeometryCache& geo,
                                          const CliffordRep& rep) {
  const Grid& g = geo.grid();
  const std::size_t P = g.points();
  const std::size_t dim = 2 * P;
  if (dim > 4096)
    throw std::invalid_argument("dirac_spectrum: grid too large for dense assembly");

  ScalarField f0(g, 0.0);
  MeasureField m = plain_weighted_measure(geo.g(), f0);

  Eigen::MatrixXcd A(dim, dim);
  SpinorField basis(g);
  for (std::size_t col = 0; col < dim; ++col) {
    const int comp = static_cast<int>(col / P);
    const std::size_t point = col % P;
    basis.at(comp, point) = 1.0;
    SpinorField out = dirac(basis, geo, rep);
    basis.at(comp, point) = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      A(p, col) = out.at(0, p);
      A(P + p, col) = out.at(1, p);
    }
  }

  // similarity transform to a Hermitian matrix
  Eigen::VectorXd w(dim);
  for (std::size_t p = 0; p < P; ++p)
    w(p) = w(P + p) = std::sqrt(m.density[p]);
  Eigen::MatrixXcd B = w.asDiagonal() * A * w.cwiseInverse().asDiagonal();
  B = 0.5 * (B + B.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + dim);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// smallest |eigenvalue| of D (equal to that of D_f for any f, since
// D_f = e^{f/2} D e^{-f/2} is a similarity transformation)
inline double dirac_lambda1(const GeometryCache& geo, const CliffordRep& rep) {
  std::vector<double> ev = dirac_spectrum(geo, rep);
  double best = std::abs(ev.front());
  for (double v : ev) best = std::min(best, std::abs(v));
  return best;
}

// Friedrich bound lambda_1(D)^2 >= n/(4(n-1)) * min R_f; returns
// (lhs, rhs) for reporting
inline std::pair<double, double> friedrich_check(const GeometryCache& geo,
                                                 const ScalarField& f,
                                                 const CliffordRep& rep) {
  const int n = geo.grid().n;
  double l1 = dirac_lambda1(geo, rep);
  ScalarField Rf = r_f(geo, f);
  double minRf = Rf[0];
  for (std::size_t p = 0; p < Rf.size(); ++p) minRf = std::min(minRf, Rf[p]);
  return {l1 * l1, double(n) / (4.0 * (n - 1)) * minRf};
}

}  // namespace spinflow
