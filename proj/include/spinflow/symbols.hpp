#pragma once

// Principal symbols of the linearized operators at the flat background,
// both as closed-form algebra (gridless) and as numeric probes that
// central-difference the actual grid operators against a high-frequency
// plane-wave perturbation.

#include "spinflow/flow.hpp"

namespace spinflow {

// All quantities in orthonormal-frame components at the flat background
// (frame = coordinates). xi is the wave covector (typically an integer
// lattice vector; the numeric probe multiplies it by 2 pi N internally and
// divides the extracted coefficient by (2 pi N)^2, so closed forms are
// evaluated at xi directly).
struct SymbolProbe {
  int n = 2;
  Eigen::Vector3d xi = Eigen::Vector3d::Zero();   // wave covector
  Eigen::Matrix3d eta = Eigen::Matrix3d::Zero();  // symmetric metric direction
  SpinorValue s = SpinorValue::Zero();            // spinor direction
  double h = 0.0;                                 // scalar pairing weight
  SpinorValue psi = SpinorValue(1.0, 0.0);        // background spinor
  double tau = 1.0;
};

// container for the three possible value types of a symbol
struct SymbolValue {
  Eigen::Matrix3d metric = Eigen::Matrix3d::Zero();
  double scalar = 0.0;
  SpinorValue spinor = SpinorValue::Zero();
};

enum class OperatorTag {
  Ric,           // g -> Ric(g)
  R,             // g -> R(g)
  LieW,          // g -> L_{W(g,g0)} g
  KosmannU,      // (g,psi) -> L^spin_{U(psi)} psi
  KosmannW,      // (g,psi) -> L^spin_{W(g,g0)} psi
  LapSpinor,     // (g,psi) -> Delta psi
  DivU,          // (g,psi) -> div U(psi)
  GaugedMetric,     // full gauged metric RHS (lambda = 0)
  GaugedSpinor,     // full gauged spinor RHS (lambda = 0, f = 0)
  LowerOrderSpinor  // gauged spinor RHS minus A(psi)^{kl} hat-nabla_k hat-nabla_l psi
};

namespace detail {

inline double xi_norm_sq(const SymbolProbe& pr) {
  double v = 0.0;
  for (int i = 0; i < pr.n; ++i) v += pr.xi(i) * pr.xi(i);
  return v;
}

inline double eta_xi_xi(const SymbolProbe& pr) {
  double v = 0.0;
  for (int i = 0; i < pr.n; ++i)
    for (int j = 0; j < pr.n; ++j) v += pr.eta(i, j) * pr.xi(i) * pr.xi(j);
  return v;
}

inline double tr_eta(const SymbolProbe& pr) {
  double v = 0.0;
  for (int i = 0; i < pr.n; ++i) v += pr.eta(i, i);
  return v;
}

// c(eta(xi,.) ^ xi) psi, the two-form action of eta(xi,.) wedge xi
inline SpinorValue eta_xi_wedge_xi(const CliffordRep& rep, const SymbolProbe& pr,
                                   const SpinorValue& psi) {
  double v[3] = {0, 0, 0}, w[3] = {0, 0, 0};
  for (int i = 0; i < pr.n; ++i) {
    w[i] = pr.xi(i);
    for (int j = 0; j < pr.n; ++j) v[i] += pr.eta(i, j) * pr.xi(j);
  }
  return two_form_action(rep, v, w, psi);
}

inline SpinorValue clifford_xi(const CliffordRep& rep, const SymbolProbe& pr,
                               const SpinorValue& psi) {
  double v[3] = {0, 0, 0};
  for (int i = 0; i < pr.n; ++i) v[i] = pr.xi(i);
  return clifford_vector(rep, v, psi);
}

}  // namespace detail

// sigma(D Ric)_{ab} = 1/2 |xi|^2 eta_{ab}
//   - 1/2 (xi_i xi_a eta_{bi} + xi_i xi_b eta_{ai} - xi_a xi_b tr eta)
inline Eigen::Matrix3d sym_ric(const SymbolProbe& pr) {
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  const double x2 = detail::xi_norm_sq(pr), tr = detail::tr_eta(pr);
  for (int a = 0; a < pr.n; ++a)
    for (int b = 0; b < pr.n; ++b) {
      double v = 0.5 * x2 * pr.eta(a, b) + 0.5 * pr.xi(a) * pr.xi(b) * tr;
      for (int i = 0; i < pr.n; ++i)
        v -= 0.5 * pr.xi(i) * (pr.xi(a) * pr.eta(b, i) + pr.xi(b) * pr.eta(a, i));
      out(a, b) = v;
    }
  return out;
}

// sigma(D R) = |xi|^2 tr eta - eta(xi,xi)
inline double sym_scalar_curvature(const SymbolProbe& pr) {
  return detail::xi_norm_sq(pr) * detail::tr_eta(pr) - detail::eta_xi_xi(pr);
}

// sigma(D L_W g)_{ab} = -(xi_i xi_a eta_{bi} + xi_i xi_b eta_{ai}
//                         - xi_a xi_b tr eta)
inline Eigen::Matrix3d sym_lie_w_metric(const SymbolProbe& pr) {
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  const double tr = detail::tr_eta(pr);
  for (int a = 0; a < pr.n; ++a)
    for (int b = 0; b < pr.n; ++b) {
      double v = pr.xi(a) * pr.xi(b) * tr;
      for (int i = 0; i < pr.n; ++i)
        v -= pr.xi(i) * (pr.xi(a) * pr.eta(b, i) + pr.xi(b) * pr.eta(a, i));
      out(a, b) = v;
    }
  return out;
}

// sigma(D Delta psi) = -(1/4) sum_i sum_{j!=k} xi_i xi_j eta_{ik} e_j e_k psi
//                      - |xi|^2 s
inline SpinorValue sym_lap_spinor(const CliffordRep& rep, const SymbolProbe& pr) {
  SpinorValue out = -detail::xi_norm_sq(pr) * pr.s;
  for (int i = 0; i < pr.n; ++i)
    for (int j = 0; j < pr.n; ++j)
      for (int k = 0; k < pr.n; ++k) {
        if (j == k) continue;
        double c = pr.xi(i) * pr.xi(j) * pr.eta(i, k);
        if (c != 0.0)
          out -= 0.25 * c * (rep.gamma[j] * (rep.gamma[k] * pr.psi));
      }
  return out;
}

// sigma(D L^spin_W psi) = (1/8) sum_k sum_{i!=j}
//     (xi_i xi_k eta_{jk} - xi_j xi_k eta_{ik}) e_i e_j psi
// (half the magnitude of the displayed double-sum form, matching the
//  unordered-pair Kosmann normalization; the overall sign is the one
//  realized by the grid operators)
inline SpinorValue sym_kosmann_w(const CliffordRep& rep, const SymbolProbe& pr) {
  SpinorValue out = SpinorValue::Zero();
  for (int k = 0; k < pr.n; ++k)
    for (int i = 0; i < pr.n; ++i)
      for (int j = 0; j < pr.n; ++j) {
        if (i == j) continue;
        double c = pr.xi(i) * pr.xi(k) * pr.eta(j, k) -
                   pr.xi(j) * pr.xi(k) * pr.eta(i, k);
        if (c != 0.0)
          out += 0.125 * c * (rep.gamma[i] * (rep.gamma[j] * pr.psi));
      }
  return out;
}

// sigma(D L^spin_U psi) = -(1/16)|psi|^2 c(eta(xi,.) ^ xi) psi
//                         + (1/4) c(xi ^ u) psi,
// with u_a = Re<psi, e_a . xi . s>. The spinor-direction term expands to
// (1/4) Re<psi, e_a.xi.s> xi.e_a.psi - (1/4)|xi|^2 Re<psi,s> psi, matching
// the displayed half-coefficient form on the constraint Re<psi,s> = 0.
inline SpinorValue sym_kosmann_u(const CliffordRep& rep, const SymbolProbe& pr) {
  const double n2 = pr.psi.squaredNorm();
  SpinorValue out = -(n2 / 16.0) * detail::eta_xi_wedge_xi(rep, pr, pr.psi);
  double u[3] = {0, 0, 0}, xi[3] = {0, 0, 0};
  for (int a = 0; a < pr.n; ++a) {
    xi[a] = pr.xi(a);
    u[a] = re_inner(pr.psi, rep.gamma[a] * detail::clifford_xi(rep, pr, pr.s));
  }
  out += 0.25 * two_form_action(rep, xi, u, pr.psi);
  return out;
}

// sigma(D div U) = (1/4) sum_i sum_{j!=k} xi_i xi_j eta_{ik} Re<psi, e_j e_k psi>
//   + |xi|^2 Re<psi, s> + (1/4)|xi|^2 tr eta |psi|^2 - (1/4) eta(xi,xi) |psi|^2
inline double sym_div_u(const CliffordRep& rep, const SymbolProbe& pr) {
  const double n2 = pr.psi.squaredNorm();
  double out = detail::xi_norm_sq(pr) * re_inner(pr.psi, pr.s) +
               0.25 * detail::xi_norm_sq(pr) * detail::tr_eta(pr) * n2 -
               0.25 * detail::eta_xi_xi(pr) * n2;
  for (int i = 0; i < pr.n; ++i)
    for (int j = 0; j < pr.n; ++j)
      for (int k = 0; k < pr.n; ++k) {
        if (j == k) continue;
        double c = pr.xi(i) * pr.xi(j) * pr.eta(i, k);
        if (c != 0.0)
          out += 0.25 * c * re_inner(pr.psi, rep.gamma[j] * (rep.gamma[k] * pr.psi));
      }
  return out;
}

// sigma of the full gauged metric RHS: the DeTurck cancellation
// -2 sigma(D Ric) + sigma(D L_W g) = -|xi|^2 eta
inline Eigen::Matrix3d sym_gauged_metric(const SymbolProbe& pr) {
  return -detail::xi_norm_sq(pr) * pr.eta;
}

// sigma of the full gauged spinor RHS:
// sigma(D Delta psi) + sigma(D L^spin_W psi) - (2/tau) sigma(D L^spin_U psi)
inline SpinorValue sym_gauged_spinor(const CliffordRep& rep, const SymbolProbe& pr) {
  return sym_lap_spinor(rep, pr) + sym_kosmann_w(rep, pr) -
         (2.0 / pr.tau) * sym_kosmann_u(rep, pr);
}

// symbol of the remainder H = gauged spinor RHS - A(psi)^{kl} hat-nabla_k
// hat-nabla_l psi. The spinor direction cancels identically (that is the
// defining property of A(psi)); the metric direction survives because the
// spin connection of the evolving metric is second order in g, and comes out
// proportional to c(eta(xi,.) ^ xi) psi.
inline SpinorValue sym_lower_order_spinor(const CliffordRep& rep,
                                          const SymbolProbe& pr);

// ---------------------------------------------------------------------------
// The endomorphism A(psi) and its coercivity
// ---------------------------------------------------------------------------

// quadratic-form contraction A(psi)^{kl} xi_k xi_l applied to s:
//   |xi|^2 (s - (1/(2 tau)) Re<psi,s> psi)
//   + (1/(2 tau)) Re<psi, e_a . xi . s> xi . e_a . psi
// The 1/(2 tau) coefficients and the trace correction pair with the
// unordered-pair Kosmann normalization so that the gauged spinor RHS minus
// A(psi)^{kl} hat-nabla_k hat-nabla_l psi is of lower order in psi. The form
// stays coercive: the negative trace piece is dominated via Cauchy-Schwarz
// by the sum of squares below.
inline SpinorValue a_endomorphism(const CliffordRep& rep, const SymbolProbe& pr) {
  SpinorValue out = detail::xi_norm_sq(pr) *
                    (pr.s - (0.5 / pr.tau) * re_inner(pr.psi, pr.s) * pr.psi);
  for (int a = 0; a < pr.n; ++a) {
    double w = re_inner(pr.psi, rep.gamma[a] * detail::clifford_xi(rep, pr, pr.s));
    if (w != 0.0)
      out += (0.5 / pr.tau) * w * detail::clifford_xi(rep, pr, rep.gamma[a] * pr.psi);
  }
  return out;
}

// Re<s, A(psi)(xi) s> = |xi|^2 |s|^2 + (1/(2 tau)) (sum_a Re<psi, e_a.xi.s>^2
//                       - |xi|^2 Re<psi,s>^2) >= |xi|^2 |s|^2
inline double a_quadratic_form(const CliffordRep& rep, const SymbolProbe& pr) {
  return re_inner(pr.s, a_endomorphism(rep, pr));
}

inline SpinorValue sym_lower_order_spinor(const CliffordRep& rep,
                                          const SymbolProbe& pr) {
  const int n = pr.n;
  // M_{kl}: symbol of hat-nabla_k hat-nabla_l psi at the flat background;
  // the metric part comes from the derivative of the spin connection, with
  // the sign pinned by requiring sum_k M_{kk} = sigma(D Delta psi)
  SpinorValue M[3][3];
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      SpinorValue v = -pr.xi(k) * pr.xi(l) * pr.s;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double c = pr.xi(a) * pr.eta(l, b) - pr.xi(b) * pr.eta(l, a);
          if (c != 0.0)
            v -= 0.125 * pr.xi(k) * c * (rep.gamma[a] * (rep.gamma[b] * pr.psi));
        }
      M[k][l] = v;
    }
  // apply A(psi)^{kl} in frame indices
  SpinorValue aM = SpinorValue::Zero();
  for (int k = 0; k < n; ++k) {
    aM += M[k][k] - (0.5 / pr.tau) * re_inner(pr.psi, M[k][k]) * pr.psi;
    for (int l = 0; l < n; ++l)
      for (int c = 0; c < n; ++c) {
        double w = re_inner(pr.psi, rep.gamma[c] * (rep.gamma[l] * M[k][l]));
        if (w != 0.0)
          aM += (0.5 * w / pr.tau) * (rep.gamma[k] * (rep.gamma[c] * pr.psi));
      }
  }
  return sym_gauged_spinor(rep, pr) - aM;
}

// ---------------------------------------------------------------------------
// Parabolicity bookkeeping
// ---------------------------------------------------------------------------

struct ParabolicityReport {
  double metric_coeff = 1.0;  // principal coefficient of the metric block
  double f_coeff = 0.0;       // principal coefficient of the f block
  double spinor_lower = 1.0;  // coercivity lower bound of A(psi)
  Regime regime = Regime::fully_forward;
};

inline ParabolicityReport parabolicity_report(int n, const FlowConstants& k) {
  ParabolicityReport rep;
  rep.f_coeff = 1.0 - k.c / k.tau;  // coefficient of -Delta f in the f eq.
  rep.spinor_lower = 1.0;           // A(psi) >= |xi|^2 pointwise
  rep.regime = regime_classify(n, k).regime;
  return rep;
}

// ---------------------------------------------------------------------------
// Numeric probe
// ---------------------------------------------------------------------------

// Central-differences the actual grid operator around the flat background
// against the perturbation (eta, s) sin(2 pi N <xi, x>), projects the result
// back onto the sine mode, and divides by (2 pi N)^2. For a second-order
// operator the result converges (in eps and in N) to the closed-form symbol
// evaluated at xi.
inline SymbolValue numeric_symbol_probe(OperatorTag tag, const SymbolProbe& pr,
                                        int N, double eps, int res) {
  const int n = pr.n;
  Grid grid(n, res);
  CliffordRep rep = build_rep(n);
  const double omega2 = std::pow(2.0 * kPi * N, 2);

  // the sine carrier
  ScalarField wave(grid);
  {
    int idx[3];
    for (std::size_t p = 0; p < grid.points(); ++p) {
      detail::unflatten(grid, p, idx);
      double phase = 0.0;
      for (int i = 0; i < n; ++i) phase += pr.xi(i) * grid.coord(idx[i]);
      wave[p] = std::sin(2.0 * kPi * N * phase);
    }
  }
  auto project = [&](const double* values, std::size_t stride,
                     std::size_t count) {
    // 2 * mean(field * wave) extracts the sine coefficient
    (void)count;
    double acc = 0.0;
    for (std::size_t p = 0; p < grid.points(); ++p) acc += values[p * stride] * wave[p];
    return 2.0 * acc / double(grid.points()) / omega2;
  };

  Sym2Field g0(grid);
  for (int i = 0; i < n; ++i)
    for (std::size_t p = 0; p < grid.points(); ++p) g0.at(i, i, p) = 1.0;
  ScalarField f0(grid, 0.0);

  auto make_state = [&](double side) {
    FlowState st;
    st.g = g0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (pr.eta(i, j) != 0.0)
          for (std::size_t p = 0; p < grid.points(); ++p)
            st.g.at(i, j, p) += side * eps * pr.eta(i, j) * wave[p];
    st.g0 = g0;
    st.f = f0;
    SpinorField psi(grid);
    for (std::size_t p = 0; p < grid.points(); ++p) {
      SpinorValue v = pr.psi + side * eps * wave[p] * pr.s;
      spinor_set(psi, p, v);
    }
    st.psi = psi;
    st.consts = FlowConstants{pr.tau, 0.0, pr.psi.squaredNorm()};
    return st;
  };

  // evaluate the tagged operator on a state
  auto metric_op = [&](const FlowState& st) -> Sym2Field {
    GeometryCache geo(st.g);
    switch (tag) {
      case OperatorTag::Ric:
        return geo.ric();
      case OperatorTag::LieW: {
        GeometryCache geoB(st.g0);
        return lie_derivative_metric(geo, deturck_vector(geo, geoB));
      }
      case OperatorTag::GaugedMetric:
        return gauged_rhs(st, rep).g_dot;
      default:
        throw std::logic_error("metric_op: wrong tag");
    }
  };
  auto scalar_op = [&](const FlowState& st) -> ScalarField {
    GeometryCache geo(st.g);
    switch (tag) {
      case OperatorTag::R:
        return geo.scalar_curvature();
      case OperatorTag::DivU: {
        SpinorJet jet = covariant_derivative_spinor(st.psi, geo, rep);
        SpinorTensors t = spinor_tensors(jet, geo, rep, st.f);
        return divergence(geo, t.U);
      }
      default:
        throw std::logic_error("scalar_op: wrong tag");
    }
  };
  auto spinor_op = [&](const FlowState& st) -> SpinorField {
    GeometryCache geo(st.g);
    SpinorJet jet = covariant_derivative_spinor(st.psi, geo, rep);
    switch (tag) {
      case OperatorTag::KosmannU: {
        SpinorTensors t = spinor_tensors(jet, geo, rep, st.f);
        return kosmann_lie(t.U, jet, geo, rep);
      }
      case OperatorTag::KosmannW: {
        GeometryCache geoB(st.g0);
        return kosmann_lie(deturck_vector(geo, geoB), jet, geo, rep);
      }
      case OperatorTag::LapSpinor:
        return laplacian_spinor(jet, geo, rep);
      case OperatorTag::GaugedSpinor:
        return gauged_rhs(st, rep).psi_dot;
      case OperatorTag::LowerOrderSpinor:
        return lower_order_decomposition(st, rep).H;
      default:
        throw std::logic_error("spinor_op: wrong tag");
    }
  };

  FlowState plus = make_state(+1.0), minus = make_state(-1.0);
  SymbolValue out;
  switch (tag) {
    case OperatorTag::Ric:
    case OperatorTag::LieW:
    case OperatorTag::GaugedMetric: {
      Sym2Field d = metric_op(plus) - metric_op(minus);
      d *= 1.0 / (2.0 * eps);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          ScalarField comp(grid);
          for (std::size_t p = 0; p < grid.points(); ++p) comp[p] = d.at(i, j, p);
          out.metric(i, j) = project(&comp[0], 1, grid.points());
        }
      break;
    }
    case OperatorTag::R:
    case OperatorTag::DivU: {
      ScalarField d = scalar_op(plus) - scalar_op(minus);
      d *= 1.0 / (2.0 * eps);
      out.scalar = project(&d[0], 1, grid.points());
      break;
    }
    default: {
      SpinorField d = spinor_op(plus) - spinor_op(minus);
      d *= complexd(1.0 / (2.0 * eps));
      for (int c = 0; c < 2; ++c) {
        ScalarField re(grid), im(grid);
        for (std::size_t p = 0; p < grid.points(); ++p) {
          re[p] = d.at(c, p).real();
          im[p] = d.at(c, p).imag();
        }
        out.spinor(c) = complexd(project(&re[0], 1, grid.points()),
                                 project(&im[0], 1, grid.points()));
      }
      break;
    }
  }
  return out;
}

// closed-form counterpart of the numeric probe
inline SymbolValue closed_symbol(OperatorTag tag, const SymbolProbe& pr) {
  CliffordRep rep = build_rep(pr.n);
  SymbolValue out;
  switch (tag) {
    case OperatorTag::Ric:
      out.metric = sym_ric(pr);
      break;
    case OperatorTag::R:
      out.scalar = sym_scalar_curvature(pr);
      break;
    case OperatorTag::LieW:
      out.metric = sym_lie_w_metric(pr);
      break;
    case OperatorTag::KosmannU:
      out.spinor = sym_kosmann_u(rep, pr);
      break;
    case OperatorTag::KosmannW:
      out.spinor = sym_kosmann_w(rep, pr);
      break;
    case OperatorTag::LapSpinor:
      out.spinor = sym_lap_spinor(rep, pr);
      break;
    case OperatorTag::DivU:
      out.scalar = sym_div_u(rep, pr);
      break;
    case OperatorTag::GaugedMetric:
      out.metric = sym_gauged_metric(pr);
      break;
    case OperatorTag::GaugedSpinor:
      out.spinor = sym_gauged_spinor(rep, pr);
      break;
    case OperatorTag::LowerOrderSpinor:
      out.spinor = sym_lower_order_spinor(rep, pr);
      break;
  }
  return out;
}

}  // namespace spinflow
