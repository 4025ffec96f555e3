#pragma once

// Metric-derived data on the torus: orthonormal frame (symmetric square-root
// gauge), Christoffel symbols, spin connection, Ricci/scalar curvature,
// weighted operators of the form div_f / Delta_f / Ric_f / R_f, metric Lie
// derivatives, and the DeTurck vector field.

#include <Eigen/Dense>

#include "spinflow/grid.hpp"

namespace spinflow {

enum class FrameGauge { symmetric_sqrt, cholesky };

class GeometryCache {
 public:
  GeometryCache(const Sym2Field& g, Scheme scheme = Scheme::spectral,
                FrameGauge gauge = FrameGauge::symmetric_sqrt)
      : grid_(g.grid()), scheme_(scheme), g_(g) {
    build_pointwise_algebra(gauge);
    build_derivatives();
  }

  const Grid& grid() const { return grid_; }
  Scheme scheme() const { return scheme_; }

  const Sym2Field& g() const { return g_; }
  const Sym2Field& g_inv() const { return g_inv_; }
  // e_a^i: frame index a, coordinate index i
  const TensorField<2>& frame() const { return frame_; }
  // E^a_i = (g^{1/2})_{ai}: coframe components
  const TensorField<2>& coframe() const { return coframe_; }
  // partial_k g_ij at (k,i,j)
  const ThreeTensorField& dg() const { return dg_; }
  // Gamma^k_{ij} at (k,i,j)
  const ThreeTensorField& christoffel() const { return christoffel_; }
  // omega_{iab} at (i,a,b)
  const ThreeTensorField& omega() const { return omega_; }
  const Sym2Field& ric() const { return ric_; }
  const ScalarField& scalar_curvature() const { return R_; }

 private:
  void build_pointwise_algebra(FrameGauge gauge) {
    const int n = grid_.n;
    g_inv_ = Sym2Field(grid_);
    frame_ = TensorField<2>(grid_);
    coframe_ = TensorField<2>(grid_);
    Eigen::MatrixXd gp(n, n);
    for (std::size_t p = 0; p < grid_.points(); ++p) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gp(i, j) = g_.at(i, j, p);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gp);
      if (es.eigenvalues().minCoeff() <= 1e-6)
        throw std::domain_error("GeometryCache: metric not SPD (min eig <= 1e-6)");
      Eigen::MatrixXd ginv = es.operatorInverseSqrt() * es.operatorInverseSqrt();
      Eigen::MatrixXd e, E;
      if (gauge == FrameGauge::symmetric_sqrt) {
        e = es.operatorInverseSqrt();  // e_a^i = (g^{-1/2})_{ai}
        E = es.operatorSqrt();
      } else {
        // g = L L^T  =>  e = L^{-1} gives (e g e^T)_{ab} = delta_ab
        Eigen::LLT<Eigen::MatrixXd> llt(gp);
        Eigen::MatrixXd L = llt.matrixL();
        e = L.inverse();
        E = L.transpose();
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          g_inv_.at(i, j, p) = ginv(i, j);
          frame_.at(i, j, p) = e(i, j);
          coframe_.at(i, j, p) = E(i, j);
        }
    }
  }

  void build_derivatives() {
    const int n = grid_.n;
    const std::size_t P = grid_.points();
    dg_ = ThreeTensorField(grid_);
    for (int k = 0; k < n; ++k) {
      Sym2Field dk = partial_derivative(g_, k, scheme_);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (std::size_t p = 0; p < P; ++p) dg_.at(k, i, j, p) = dk.at(i, j, p);
    }

    christoffel_ = ThreeTensorField(grid_);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (std::size_t p = 0; p < P; ++p) {
            double s = 0.0;
            for (int m = 0; m < n; ++m)
              s += g_inv_.at(k, m, p) *
                   (dg_.at(i, m, j, p) + dg_.at(j, m, i, p) - dg_.at(m, i, j, p));
            christoffel_.at(k, i, j, p) = 0.5 * s;
          }

    // Ric_{lj} = d_i Gamma^i_{jl} - d_j Gamma^i_{il} + G^i_{im}G^m_{jl} - G^i_{jm}G^m_{il}
    // d_l Gamma^k_{ij}, one 3-tensor per derivative direction l
    std::vector<ThreeTensorField> dG(n);
    for (int l = 0; l < n; ++l) dG[l] = partial_derivative(christoffel_, l, scheme_);

    ric_ = Sym2Field(grid_);
    for (int l = 0; l < n; ++l)
      for (int j = 0; j < n; ++j)
        for (std::size_t p = 0; p < P; ++p) {
          double v = 0.0;
          for (int i = 0; i < n; ++i) {
            v += dG[i].at(i, j, l, p) - dG[j].at(i, i, l, p);
            for (int m = 0; m < n; ++m)
              v += christoffel_.at(i, i, m, p) * christoffel_.at(m, j, l, p) -
                   christoffel_.at(i, j, m, p) * christoffel_.at(m, i, l, p);
          }
          ric_.at(l, j, p) = v;
        }
    symmetrize(ric_);

    R_ = ScalarField(grid_);
    for (std::size_t p = 0; p < P; ++p) {
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v += g_inv_.at(i, j, p) * ric_.at(i, j, p);
      R_[p] = v;
    }

    // omega_{iab} = g_{mn} (d_i e_a^m + Gamma^m_{ij} e_a^j) e_b^n
    omega_ = ThreeTensorField(grid_);
    std::vector<TensorField<2>> dframe(n);
    for (int i = 0; i < n; ++i) dframe[i] = partial_derivative(frame_, i, scheme_);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (std::size_t p = 0; p < P; ++p) {
            double v = 0.0;
            for (int m = 0; m < n; ++m) {
              double cov = dframe[i].at(a, m, p);
              for (int j = 0; j < n; ++j)
                cov += christoffel_.at(m, i, j, p) * frame_.at(a, j, p);
              for (int nn = 0; nn < n; ++nn)
                v += g_.at(m, nn, p) * cov * frame_.at(b, nn, p);
            }
            omega_.at(i, a, b, p) = v;
          }
  }

  Grid grid_;
  Scheme scheme_;
  Sym2Field g_;
  Sym2Field g_inv_;
  TensorField<2> frame_, coframe_;
  ThreeTensorField dg_, christoffel_, omega_;
  Sym2Field ric_;
  ScalarField R_;
};

// ---------------------------------------------------------------------------
// Scalar / vector / tensor calculus against a GeometryCache
// ---------------------------------------------------------------------------

// contravariant gradient (nabla f)^i = g^{ij} d_j f
inline VectorField gradient(const GeometryCache& geo, const ScalarField& f) {
  const int n = geo.grid().n;
  VectorField df(f.grid());
  for (int j = 0; j < n; ++j) {
    ScalarField d = partial_derivative(f, j, geo.scheme());
    for (std::size_t p = 0; p < f.size(); ++p) df.at(j, p) = d[p];
  }
  VectorField out(f.grid());
  for (int i = 0; i < n; ++i)
    for (std::size_t p = 0; p < f.size(); ++p) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += geo.g_inv().at(i, j, p) * df.at(j, p);
      out.at(i, p) = v;
    }
  return out;
}

// covariant differential d f
inline VectorField differential(const GeometryCache& geo, const ScalarField& f) {
  VectorField out(f.grid());
  for (int j = 0; j < geo.grid().n; ++j) {
    ScalarField d = partial_derivative(f, j, geo.scheme());
    for (std::size_t p = 0; p < f.size(); ++p) out.at(j, p) = d[p];
  }
  return out;
}

inline Sym2Field hessian(const GeometryCache& geo, const ScalarField& f) {
  const int n = geo.grid().n;
  VectorField df = differential(geo, f);
  Sym2Field out(f.grid());
  for (int i = 0; i < n; ++i) {
    VectorField ddf = partial_derivative(df, i, geo.scheme());
    for (int j = 0; j < n; ++j)
      for (std::size_t p = 0; p < f.size(); ++p) {
        double v = ddf.at(j, p);
        for (int k = 0; k < n; ++k)
          v -= geo.christoffel().at(k, i, j, p) * df.at(k, p);
        out.at(i, j, p) = v;
      }
  }
  symmetrize(out);
  return out;
}

inline ScalarField grad_inner(const GeometryCache& geo, const ScalarField& f,
                              const ScalarField& phi) {
  const int n = geo.grid().n;
  VectorField df = differential(geo, f), dphi = differential(geo, phi);
  ScalarField out(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        v += geo.g_inv().at(i, j, p) * df.at(i, p) * dphi.at(j, p);
    out[p] = v;
  }
  return out;
}

inline ScalarField laplacian(const GeometryCache& geo, const ScalarField& phi) {
  const int n = geo.grid().n;
  Sym2Field h = hessian(geo, phi);
  ScalarField out(phi.grid());
  for (std::size_t p = 0; p < phi.size(); ++p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += geo.g_inv().at(i, j, p) * h.at(i, j, p);
    out[p] = v;
  }
  return out;
}

// Delta_f phi = Delta phi - <grad f, grad phi>
inline ScalarField laplacian_f(const GeometryCache& geo, const ScalarField& f,
                               const ScalarField& phi) {
  return laplacian(geo, phi) - grad_inner(geo, f, phi);
}

inline Sym2Field ric_f(const GeometryCache& geo, const ScalarField& f) {
  return geo.ric() + hessian(geo, f);
}

// R_f = R + 2 Delta f - |grad f|^2
inline ScalarField r_f(const GeometryCache& geo, const ScalarField& f) {
  return geo.scalar_curvature() + 2.0 * laplacian(geo, f) - grad_inner(geo, f, f);
}

// divergence of a contravariant vector: d_i X^i + Gamma^i_{ik} X^k
inline ScalarField divergence(const GeometryCache& geo, const VectorField& X) {
  const int n = geo.grid().n;
  ScalarField out(X.grid());
  for (int i = 0; i < n; ++i) {
    VectorField dX = partial_derivative(X, i, geo.scheme());
    for (std::size_t p = 0; p < out.size(); ++p) {
      double v = dX.at(i, p);
      for (int k = 0; k < n; ++k)
        v += geo.christoffel().at(i, i, k, p) * X.at(k, p);
      out[p] += v;
    }
  }
  return out;
}

inline ScalarField divergence_f(const GeometryCache& geo, const ScalarField& f,
                                const VectorField& X) {
  const int n = geo.grid().n;
  VectorField df = differential(geo, f);
  ScalarField out = divergence(geo, X);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += df.at(i, p) * X.at(i, p);
    out[p] -= v;
  }
  return out;
}

// first-slot divergence of a covariant 2-tensor: (div a)_j = g^{ik} nabla_i a_{kj}
inline VectorField divergence(const GeometryCache& geo, const Sym2Field& a) {
  const int n = geo.grid().n;
  VectorField out(a.grid());
  std::vector<Sym2Field> da(n);
  for (int i = 0; i < n; ++i) da[i] = partial_derivative(a, i, geo.scheme());
  for (int j = 0; j < n; ++j)
    for (std::size_t p = 0; p < a.points(); ++p) {
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          double cov = da[i].at(k, j, p);
          for (int m = 0; m < n; ++m)
            cov -= geo.christoffel().at(m, i, k, p) * a.at(m, j, p) +
                   geo.christoffel().at(m, i, j, p) * a.at(k, m, p);
          v += geo.g_inv().at(i, k, p) * cov;
        }
      out.at(j, p) = v;
    }
  return out;
}

// div_f a = div a - i_{grad f} a (covariant output)
inline VectorField divergence_f(const GeometryCache& geo, const ScalarField& f,
                                const Sym2Field& a) {
  const int n = geo.grid().n;
  VectorField out = divergence(geo, a);
  VectorField gf = gradient(geo, f);
  for (int j = 0; j < n; ++j)
    for (std::size_t p = 0; p < a.points(); ++p) {
      double v = 0.0;
      for (int k = 0; k < n; ++k) v += gf.at(k, p) * a.at(k, j, p);
      out.at(j, p) -= v;
    }
  return out;
}

// divergence of a covariant vector field: g^{ij} nabla_i alpha_j
inline ScalarField divergence_covector(const GeometryCache& geo,
                                       const VectorField& alpha) {
  const int n = geo.grid().n;
  ScalarField out(alpha.grid());
  std::vector<VectorField> da(n);
  for (int i = 0; i < n; ++i) da[i] = partial_derivative(alpha, i, geo.scheme());
  for (std::size_t p = 0; p < out.size(); ++p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double cov = da[i].at(j, p);
        for (int k = 0; k < n; ++k)
          cov -= geo.christoffel().at(k, i, j, p) * alpha.at(k, p);
        v += geo.g_inv().at(i, j, p) * cov;
      }
    out[p] = v;
  }
  return out;
}

inline ScalarField divergence_f_covector(const GeometryCache& geo,
                                         const ScalarField& f,
                                         const VectorField& alpha) {
  const int n = geo.grid().n;
  ScalarField out = divergence_covector(geo, alpha);
  VectorField gf = gradient(geo, f);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += gf.at(i, p) * alpha.at(i, p);
    out[p] -= v;
  }
  return out;
}

// first-slot divergence of a covariant 3-tensor: (div T)_{jk} = g^{il} nabla_i T_{ljk}
inline Sym2Field divergence(const GeometryCache& geo, const ThreeTensorField& T) {
  const int n = geo.grid().n;
  Sym2Field out(T.grid());
  std::vector<ThreeTensorField> dT(n);
  for (int i = 0; i < n; ++i) dT[i] = partial_derivative(T, i, geo.scheme());
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (std::size_t p = 0; p < T.points(); ++p) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
          for (int l = 0; l < n; ++l) {
            double cov = dT[i].at(l, j, k, p);
            for (int m = 0; m < n; ++m)
              cov -= geo.christoffel().at(m, i, l, p) * T.at(m, j, k, p) +
                     geo.christoffel().at(m, i, j, p) * T.at(l, m, k, p) +
                     geo.christoffel().at(m, i, k, p) * T.at(l, j, m, p);
            v += geo.g_inv().at(i, l, p) * cov;
          }
        out.at(j, k, p) = v;
      }
  return out;
}

inline Sym2Field divergence_f(const GeometryCache& geo, const ScalarField& f,
                              const ThreeTensorField& T) {
  const int n = geo.grid().n;
  Sym2Field out = divergence(geo, T);
  VectorField gf = gradient(geo, f);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (std::size_t p = 0; p < T.points(); ++p) {
        double v = 0.0;
        for (int l = 0; l < n; ++l) v += gf.at(l, p) * T.at(l, j, k, p);
        out.at(j, k, p) -= v;
      }
  return out;
}

// (L_X g)_{ij} = nabla_i X_j + nabla_j X_i, X contravariant
inline Sym2Field lie_derivative_metric(const GeometryCache& geo,
                                       const VectorField& X) {
  const int n = geo.grid().n;
  VectorField Xlow(X.grid());
  for (int j = 0; j < n; ++j)
    for (std::size_t p = 0; p < X.points(); ++p) {
      double v = 0.0;
      for (int k = 0; k < n; ++k) v += geo.g().at(j, k, p) * X.at(k, p);
      Xlow.at(j, p) = v;
    }
  Sym2Field out(X.grid());
  std::vector<VectorField> dX(n);
  for (int i = 0; i < n; ++i) dX[i] = partial_derivative(Xlow, i, geo.scheme());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (std::size_t p = 0; p < X.points(); ++p) {
        double nij = dX[i].at(j, p), nji = dX[j].at(i, p);
        for (int k = 0; k < n; ++k) {
          nij -= geo.christoffel().at(k, i, j, p) * Xlow.at(k, p);
          nji -= geo.christoffel().at(k, j, i, p) * Xlow.at(k, p);
        }
        out.at(i, j, p) = nij + nji;
      }
  symmetrize(out);
  return out;
}

// W(g,g0)^k = g^{ij} (Gamma^k_{ij}(g) - Gamma^k_{ij}(g0))
inline VectorField deturck_vector(const GeometryCache& geo,
                                  const GeometryCache& geo0) {
  const int n = geo.grid().n;
  VectorField out(geo.g().grid());
  for (int k = 0; k < n; ++k)
    for (std::size_t p = 0; p < out.points(); ++p) {
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          v += geo.g_inv().at(i, j, p) * (geo.christoffel().at(k, i, j, p) -
                                          geo0.christoffel().at(k, i, j, p));
      out.at(k, p) = v;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Pointwise tensor algebra helpers
// ---------------------------------------------------------------------------

// <A,B>_g = g^{ik} g^{jl} A_{ij} B_{kl}
inline ScalarField tensor_inner(const GeometryCache& geo, const Sym2Field& A,
                                const Sym2Field& B) {
  const int n = geo.grid().n;
  ScalarField out(A.grid());
  for (std::size_t p = 0; p < A.points(); ++p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            v += geo.g_inv().at(i, k, p) * geo.g_inv().at(j, l, p) *
                 A.at(i, j, p) * B.at(k, l, p);
    out[p] = v;
  }
  return out;
}

inline ScalarField trace(const GeometryCache& geo, const Sym2Field& A) {
  const int n = geo.grid().n;
  ScalarField out(A.grid());
  for (std::size_t p = 0; p < A.points(); ++p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += geo.g_inv().at(i, j, p) * A.at(i, j, p);
    out[p] = v;
  }
  return out;
}

// <X,Y>_g for contravariant X, Y
inline ScalarField vector_inner(const GeometryCache& geo, const VectorField& X,
                                const VectorField& Y) {
  const int n = geo.grid().n;
  ScalarField out(X.grid());
  for (std::size_t p = 0; p < X.points(); ++p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += geo.g().at(i, j, p) * X.at(i, p) * Y.at(j, p);
    out[p] = v;
  }
  return out;
}

// pointwise scalar multiplication helpers
inline Sym2Field scale(const Sym2Field& A, const ScalarField& s) {
  Sym2Field out = A;
  const int nc = out.ncomp();
  for (int c = 0; c < nc; ++c) {
    double* d = out.comp(c);
    for (std::size_t p = 0; p < out.points(); ++p) d[p] *= s[p];
  }
  return out;
}

inline ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  for (std::size_t p = 0; p < out.size(); ++p) out[p] *= b[p];
  return out;
}

}  // namespace spinflow
