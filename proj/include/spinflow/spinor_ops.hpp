#pragma once

// Spinor differential operators and auxiliary tensors: covariant derivative,
// Dirac and weighted Dirac, spinor Laplacian, Kosmann Lie derivative, and the
// tensors T_psi, <grad psi x grad psi>, S, V, U, V_f.

#include "spinflow/clifford.hpp"
#include "spinflow/geometry.hpp"
#include "spinflow/grid.hpp"

namespace spinflow {

inline SpinorValue spinor_at(const SpinorField& psi, std::size_t p) {
  return SpinorValue(psi.at(0, p), psi.at(1, p));
}

inline void spinor_set(SpinorField& psi, std::size_t p, const SpinorValue& v) {
  psi.at(0, p) = v(0);
  psi.at(1, p) = v(1);
}

inline ScalarField norm_sq(const SpinorField& psi) {
  ScalarField out(psi.grid());
  for (std::size_t p = 0; p < psi.points(); ++p) out[p] = psi.norm_sq(p);
  return out;
}

inline ScalarField re_inner_field(const SpinorField& a, const SpinorField& b) {
  require_same_grid(a.grid(), b.grid());
  ScalarField out(a.grid());
  for (std::size_t p = 0; p < a.points(); ++p)
    out[p] = re_inner(spinor_at(a, p), spinor_at(b, p));
  return out;
}

struct SpinorJet {
  SpinorField value;
  std::vector<SpinorField> nabla_coord;  // nabla_i psi, coordinate index
  std::vector<SpinorField> nabla_frame;  // nabla_a psi, frame index
};

// nabla_i psi = d_i psi + (1/4) omega_{iab} gamma_a gamma_b psi
inline SpinorJet covariant_derivative_spinor(const SpinorField& psi,
                                             const GeometryCache& geo,
                                             const CliffordRep& rep) {
  const int n = geo.grid().n;
  const std::size_t P = psi.points();
  SpinorJet jet;
  jet.value = psi;
  jet.nabla_coord.resize(n, SpinorField(psi.grid()));
  jet.nabla_frame.resize(n, SpinorField(psi.grid()));
  std::array<std::array<SpinorMatrix, 3>, 3> gg;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) gg[a][b] = rep.gamma[a] * rep.gamma[b];
  for (int i = 0; i < n; ++i) {
    SpinorField d = partial_derivative(psi, i, geo.scheme());
    for (std::size_t p = 0; p < P; ++p) {
      SpinorValue v = spinor_at(d, p);
      SpinorValue base = spinor_at(psi, p);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double w = geo.omega().at(i, a, b, p);
          if (w != 0.0) v += 0.25 * w * (gg[a][b] * base);
        }
      spinor_set(jet.nabla_coord[i], p, v);
    }
  }
  for (int a = 0; a < n; ++a)
    for (std::size_t p = 0; p < P; ++p) {
      SpinorValue v = SpinorValue::Zero();
      for (int i = 0; i < n; ++i)
        v += geo.frame().at(a, i, p) * spinor_at(jet.nabla_coord[i], p);
      spinor_set(jet.nabla_frame[a], p, v);
    }
  return jet;
}

inline ScalarField grad_norm_sq(const SpinorJet& jet) {
  const int n = static_cast<int>(jet.nabla_frame.size());
  ScalarField out(jet.value.grid());
  for (std::size_t p = 0; p < out.size(); ++p) {
    double v = 0.0;
    for (int a = 0; a < n; ++a) v += jet.nabla_frame[a].norm_sq(p);
    out[p] = v;
  }
  return out;
}

// frame components of grad f: (grad f)_a = e_a^i d_i f
inline VectorField grad_frame(const GeometryCache& geo, const ScalarField& f) {
  const int n = geo.grid().n;
  VectorField df = differential(geo, f);
  VectorField out(f.grid());
  for (int a = 0; a < n; ++a)
    for (std::size_t p = 0; p < f.size(); ++p) {
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += geo.frame().at(a, i, p) * df.at(i, p);
      out.at(a, p) = v;
    }
  return out;
}

inline SpinorField dirac(const SpinorJet& jet, const CliffordRep& rep) {
  SpinorField out(jet.value.grid());
  for (std::size_t p = 0; p < out.points(); ++p) {
    SpinorValue v = SpinorValue::Zero();
    for (int a = 0; a < rep.n; ++a)
      v += rep.gamma[a] * spinor_at(jet.nabla_frame[a], p);
    spinor_set(out, p, v);
  }
  return out;
}

inline SpinorField dirac(const SpinorField& psi, const GeometryCache& geo,
                         const CliffordRep& rep) {
  return dirac(covariant_derivative_spinor(psi, geo, rep), rep);
}

// D_f psi = D psi - (1/2) grad f . psi
inline SpinorField dirac_f(const SpinorJet& jet, const GeometryCache& geo,
                           const CliffordRep& rep, const ScalarField& f) {
  SpinorField out = dirac(jet, rep);
  VectorField gf = grad_frame(geo, f);
  double v[3];
  for (std::size_t p = 0; p < out.points(); ++p) {
    for (int a = 0; a < rep.n; ++a) v[a] = gf.at(a, p);
    SpinorValue w = spinor_at(out, p) -
                    0.5 * clifford_vector(rep, v, spinor_at(jet.value, p));
    spinor_set(out, p, w);
  }
  return out;
}

inline SpinorField dirac_f(const SpinorField& psi, const GeometryCache& geo,
                           const CliffordRep& rep, const ScalarField& f) {
  return dirac_f(covariant_derivative_spinor(psi, geo, rep), geo, rep, f);
}

// rough Laplacian trace g^{ij}(nabla_i nabla_j - Gamma^k_{ij} nabla_k) psi
inline SpinorField laplacian_spinor(const SpinorJet& jet,
                                    const GeometryCache& geo,
                                    const CliffordRep& rep) {
  const int n = geo.grid().n;
  const std::size_t P = jet.value.points();
  std::array<std::array<SpinorMatrix, 3>, 3> gg;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) gg[a][b] = rep.gamma[a] * rep.gamma[b];
  SpinorField out(jet.value.grid());
  for (int j = 0; j < n; ++j) {
    const SpinorField& Phi = jet.nabla_coord[j];
    for (int i = 0; i < n; ++i) {
      SpinorField dPhi = partial_derivative(Phi, i, geo.scheme());
      for (std::size_t p = 0; p < P; ++p) {
        SpinorValue v = spinor_at(dPhi, p);
        SpinorValue base = spinor_at(Phi, p);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            double w = geo.omega().at(i, a, b, p);
            if (w != 0.0) v += 0.25 * w * (gg[a][b] * base);
          }
        for (int k = 0; k < n; ++k)
          v -= geo.christoffel().at(k, i, j, p) * spinor_at(jet.nabla_coord[k], p);
        SpinorValue acc = spinor_at(out, p) + geo.g_inv().at(i, j, p) * v;
        spinor_set(out, p, acc);
      }
    }
  }
  return out;
}

// Delta_f psi = -nabla* nabla psi - nabla_{grad f} psi (trace form minus transport)
inline SpinorField laplacian_f_spinor(const SpinorJet& jet,
                                      const GeometryCache& geo,
                                      const CliffordRep& rep,
                                      const ScalarField& f) {
  const int n = geo.grid().n;
  SpinorField out = laplacian_spinor(jet, geo, rep);
  VectorField gf = gradient(geo, f);
  for (std::size_t p = 0; p < out.points(); ++p) {
    SpinorValue v = spinor_at(out, p);
    for (int i = 0; i < n; ++i)
      v -= gf.at(i, p) * spinor_at(jet.nabla_coord[i], p);
    spinor_set(out, p, v);
  }
  return out;
}

inline SpinorField laplacian_f_spinor(const SpinorField& psi,
                                      const GeometryCache& geo,
                                      const CliffordRep& rep,
                                      const ScalarField& f) {
  return laplacian_f_spinor(covariant_derivative_spinor(psi, geo, rep), geo, rep, f);
}

// directional covariant derivative nabla_X psi, X contravariant
inline SpinorField directional_derivative(const SpinorJet& jet,
                                          const VectorField& X) {
  const int n = X.grid().n;
  SpinorField out(jet.value.grid());
  for (std::size_t p = 0; p < out.points(); ++p) {
    SpinorValue v = SpinorValue::Zero();
    for (int i = 0; i < n; ++i) v += X.at(i, p) * spinor_at(jet.nabla_coord[i], p);
    spinor_set(out, p, v);
  }
  return out;
}

// Kosmann Lie derivative: nabla_X psi - (1/4) sum_{a<b} (nabla_a X_b -
// nabla_b X_a) gamma_a gamma_b psi, curl in orthonormal-frame indices.
// The curl normalization (sum over unordered pairs) is the one under which
// the entropy functional is invariant along gauge directions
// (L_X g, X f, L^spin_X psi); the double normalization breaks invariance.
inline SpinorField kosmann_lie(const VectorField& X, const SpinorJet& jet,
                               const GeometryCache& geo, const CliffordRep& rep) {
  const int n = geo.grid().n;
  const std::size_t P = X.points();
  // coordinate covariant derivative of the lowered X
  VectorField Xlow(X.grid());
  for (int j = 0; j < n; ++j)
    for (std::size_t p = 0; p < P; ++p) {
      double v = 0.0;
      for (int k = 0; k < n; ++k) v += geo.g().at(j, k, p) * X.at(k, p);
      Xlow.at(j, p) = v;
    }
  std::vector<VectorField> dX(n);
  for (int i = 0; i < n; ++i) dX[i] = partial_derivative(Xlow, i, geo.scheme());
  std::array<std::array<SpinorMatrix, 3>, 3> gg;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) gg[a][b] = rep.gamma[a] * rep.gamma[b];

  SpinorField out = directional_derivative(jet, X);
  for (std::size_t p = 0; p < P; ++p) {
    double cov[3][3];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = dX[i].at(j, p);
        for (int k = 0; k < n; ++k)
          v -= geo.christoffel().at(k, i, j, p) * Xlow.at(k, p);
        cov[i][j] = v;
      }
    // frame components A_{ab} = e_a^i e_b^j cov_{ij}
    double A[3][3];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            v += geo.frame().at(a, i, p) * geo.frame().at(b, j, p) * cov[i][j];
        A[a][b] = v;
      }
    SpinorValue base = spinor_at(jet.value, p);
    SpinorValue v = spinor_at(out, p);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) v -= 0.125 * (A[a][b] - A[b][a]) * (gg[a][b] * base);
    spinor_set(out, p, v);
  }
  return out;
}

inline SpinorField kosmann_lie(const VectorField& X, const SpinorField& psi,
                               const GeometryCache& geo, const CliffordRep& rep) {
  return kosmann_lie(X, covariant_derivative_spinor(psi, geo, rep), geo, rep);
}

struct SpinorTensors {
  ThreeTensorField T;  // T_psi, covariant, symmetric in slots (2,3)
  Sym2Field P;         // <grad psi x grad psi>
  Sym2Field S;
  VectorField V;   // contravariant
  VectorField U;   // contravariant
  VectorField Vf;  // contravariant; equals V, also U + (|psi|^2/2) grad f
};

inline SpinorTensors spinor_tensors(const SpinorJet& jet,
                                    const GeometryCache& geo,
                                    const CliffordRep& rep,
                                    const ScalarField& f) {
  const int n = geo.grid().n;
  const std::size_t P = jet.value.points();
  SpinorField Dpsi = dirac(jet, rep);
  SpinorField Dfpsi = dirac_f(jet, geo, rep, f);
  std::array<std::array<SpinorMatrix, 3>, 3> gg;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) gg[a][b] = rep.gamma[a] * rep.gamma[b];

  SpinorTensors out{ThreeTensorField(jet.value.grid()), Sym2Field(jet.value.grid()),
                    Sym2Field(jet.value.grid()), VectorField(jet.value.grid()),
                    VectorField(jet.value.grid()), VectorField(jet.value.grid())};

  for (std::size_t p = 0; p < P; ++p) {
    SpinorValue psi = spinor_at(jet.value, p);
    SpinorValue grads[3];
    for (int a = 0; a < n; ++a) grads[a] = spinor_at(jet.nabla_frame[a], p);
    SpinorValue Dp = spinor_at(Dpsi, p), Dfp = spinor_at(Dfpsi, p);

    // frame components
    double Tf[3][3][3], Pf[3][3], Sf[3][3], Vfr[3], Ufr[3];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Pf[a][b] = re_inner(grads[a], grads[b]);
        Sf[a][b] = re_inner(Dfp, rep.gamma[a] * grads[b] + rep.gamma[b] * grads[a]);
      }
    for (int a = 0; a < n; ++a) {
      Vfr[a] = re_inner(psi, rep.gamma[a] * Dfp);
      Ufr[a] = re_inner(psi, rep.gamma[a] * Dp);
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          SpinorValue ab = (a == b) ? SpinorValue(SpinorValue::Zero())
                                    : SpinorValue(gg[a][b] * psi);
          SpinorValue ac = (a == c) ? SpinorValue(SpinorValue::Zero())
                                    : SpinorValue(gg[a][c] * psi);
          Tf[a][b][c] =
              0.5 * (re_inner(ab, grads[c]) + re_inner(ac, grads[b]));
        }

    // convert to coordinate components
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double pv = 0.0, sv = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            double w = geo.coframe().at(a, i, p) * geo.coframe().at(b, j, p);
            pv += w * Pf[a][b];
            sv += w * Sf[a][b];
          }
        out.P.at(i, j, p) = pv;
        out.S.at(i, j, p) = sv;
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double tv = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c)
                tv += geo.coframe().at(a, i, p) * geo.coframe().at(b, j, p) *
                      geo.coframe().at(c, k, p) * Tf[a][b][c];
          out.T.at(i, j, k, p) = tv;
        }
    for (int i = 0; i < n; ++i) {
      double vv = 0.0, uv = 0.0;
      for (int a = 0; a < n; ++a) {
        vv += Vfr[a] * geo.frame().at(a, i, p);
        uv += Ufr[a] * geo.frame().at(a, i, p);
      }
      out.V.at(i, p) = vv;
      out.U.at(i, p) = uv;
      out.Vf.at(i, p) = vv;  // V_f = V = U + (|psi|^2/2) grad f pointwise
    }
  }
  return out;
}

inline SpinorTensors spinor_tensors(const SpinorField& psi,
                                    const GeometryCache& geo,
                                    const CliffordRep& rep,
                                    const ScalarField& f) {
  return spinor_tensors(covariant_derivative_spinor(psi, geo, rep), geo, rep, f);
}

// LHS - RHS of the div_f T identity:
// div_f T(X,Y) = -1/2 Ric_f |psi|^2 + 1/2 HessXY |psi|^2 - 2P + S + 1/2 L_V g
inline Sym2Field div_f_T_identity_residual(const SpinorField& psi,
                                           const GeometryCache& geo,
                                           const CliffordRep& rep,
                                           const ScalarField& f) {
  SpinorJet jet = covariant_derivative_spinor(psi, geo, rep);
  SpinorTensors st = spinor_tensors(jet, geo, rep, f);
  Sym2Field lhs = divergence_f(geo, f, st.T);
  ScalarField n2 = norm_sq(psi);
  Sym2Field rhs = scale(ric_f(geo, f), n2);
  rhs *= -0.5;
  Sym2Field hn = hessian(geo, n2);
  hn *= 0.5;
  rhs += hn;
  rhs += -2.0 * st.P;
  rhs += st.S;
  Sym2Field lv = lie_derivative_metric(geo, st.V);
  lv *= 0.5;
  rhs += lv;
  return lhs - rhs;
}

}  // namespace spinflow
