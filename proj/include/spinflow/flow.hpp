#pragma once

// Right-hand sides of the spinorial Ricci flow and its DeTurck-gauged form,
// the lower-order decomposition of the gauged system, an explicit RK4
// integrator (gauged system only), and per-step monitoring of the
// monotonicity/conservation claims.

#include "spinflow/variation.hpp"

namespace spinflow {

struct FlowState {
  Sym2Field g;
  ScalarField f;
  SpinorField psi;
  double t = 0.0;
  FlowConstants consts{1.0, 0.0, 2.0};
  Sym2Field g0;  // gauge background
};

struct FlowRhs {
  Sym2Field g_dot;
  ScalarField f_dot;
  SpinorField psi_dot;  // derivative in the Bourguignon-Gauduchon sense
};

namespace detail {

inline void require_psi_floor(const SpinorField& psi, double c) {
  const double floor = 1e-8 * c;
  for (std::size_t p = 0; p < psi.points(); ++p)
    if (psi.norm_sq(p) < floor)
      throw std::domain_error("flow rhs: |psi|^2 below the division guard");
}

}  // namespace detail

// ungauged system:
//   dg/dt  = -2(Ric + L_{(1/2)grad f - V_f/tau} g - (2/tau) S - (lambda/2tau) g)
//   df/dt  = -Delta f - R + lambda n/2tau + (4/tau) Tr_g S + (2/tau) div V_f
//   dpsi/dt = Delta_f psi + (|grad psi|^2/|psi|^2) psi
inline FlowRhs ungauged_rhs(const FlowState& st, const CliffordRep& rep) {
  st.consts.validate();
  detail::require_psi_floor(st.psi, st.consts.c);
  const Grid& grid = st.g.grid();
  const int n = grid.n;
  const double tau = st.consts.tau, lambda = st.consts.lambda;
  GeometryCache geo(st.g);
  SpinorJet jet = covariant_derivative_spinor(st.psi, geo, rep);
  SpinorTensors t = spinor_tensors(jet, geo, rep, st.f);

  FlowRhs rhs{Sym2Field(grid), ScalarField(grid), SpinorField(grid)};

  VectorField X = gradient(geo, st.f);
  X *= 0.5;
  X -= (1.0 / tau) * t.Vf;
  rhs.g_dot = geo.ric() + lie_derivative_metric(geo, X);
  rhs.g_dot -= (2.0 / tau) * t.S;
  {
    Sym2Field lam = st.g;
    lam *= lambda / (2.0 * tau);
    rhs.g_dot -= lam;
  }
  rhs.g_dot *= -2.0;

  ScalarField trS = trace(geo, t.S);
  rhs.f_dot = -1.0 * laplacian(geo, st.f) - geo.scalar_curvature() +
              (4.0 / tau) * trS + (2.0 / tau) * divergence(geo, t.Vf);
  for (std::size_t p = 0; p < grid.points(); ++p)
    rhs.f_dot[p] += lambda * n / (2.0 * tau);

  rhs.psi_dot = laplacian_f_spinor(jet, geo, rep, st.f);
  ScalarField gn = grad_norm_sq(jet);
  for (std::size_t p = 0; p < grid.points(); ++p) {
    SpinorValue v = spinor_at(rhs.psi_dot, p) +
                    (gn[p] / st.psi.norm_sq(p)) * spinor_at(st.psi, p);
    spinor_set(rhs.psi_dot, p, v);
  }
  return rhs;
}

// gauged system:
//   dg/dt  = -2Ric + L_{W(g,g0)} g + (4/tau) S + (lambda/tau) g
//   df/dt  = -(1-|psi|^2/tau) Delta f - R + lambda n/2tau + (4/tau) Tr_g S
//            + (2/tau) div U + (1-|psi|^2/tau)|grad f|^2 + <grad f, W-(2/tau)U>
//   dpsi/dt = Delta_f psi + (|grad psi|^2/|psi|^2) psi
//             + (1-|psi|^2/tau) grad_{grad f} psi + L^spin_{W-(2/tau)U} psi
inline FlowRhs gauged_rhs(const FlowState& st, const CliffordRep& rep) {
  st.consts.validate();
  detail::require_psi_floor(st.psi, st.consts.c);
  const Grid& grid = st.g.grid();
  const int n = grid.n;
  const double tau = st.consts.tau, lambda = st.consts.lambda;
  GeometryCache geo(st.g), geo0(st.g0);
  SpinorJet jet = covariant_derivative_spinor(st.psi, geo, rep);
  SpinorTensors t = spinor_tensors(jet, geo, rep, st.f);
  VectorField W = deturck_vector(geo, geo0);

  FlowRhs rhs{Sym2Field(grid), ScalarField(grid), SpinorField(grid)};

  rhs.g_dot = lie_derivative_metric(geo, W) - 2.0 * geo.ric();
  rhs.g_dot += (4.0 / tau) * t.S;
  {
    Sym2Field lam = st.g;
    lam *= lambda / tau;
    rhs.g_dot += lam;
  }

  ScalarField n2 = norm_sq(st.psi);
  ScalarField lap_f = laplacian(geo, st.f);
  ScalarField gf2 = grad_inner(geo, st.f, st.f);
  ScalarField trS = trace(geo, t.S);
  VectorField Xg = W - (2.0 / tau) * t.U;  // W - (2/tau) U, contravariant
  VectorField gradf = gradient(geo, st.f);
  ScalarField cross = vector_inner(geo, gradf, Xg);
  ScalarField divU = divergence(geo, t.U);
  rhs.f_dot = ScalarField(grid);
  for (std::size_t p = 0; p < grid.points(); ++p) {
    const double coef = 1.0 - n2[p] / tau;
    rhs.f_dot[p] = -coef * lap_f[p] - geo.scalar_curvature()[p] +
                   lambda * n / (2.0 * tau) + (4.0 / tau) * trS[p] +
                   (2.0 / tau) * divU[p] + coef * gf2[p] + cross[p];
  }

  rhs.psi_dot = laplacian_f_spinor(jet, geo, rep, st.f);
  rhs.psi_dot += kosmann_lie(Xg, jet, geo, rep);
  SpinorField transport = directional_derivative(jet, gradf);
  ScalarField gn = grad_norm_sq(jet);
  for (std::size_t p = 0; p < grid.points(); ++p) {
    const double coef = 1.0 - n2[p] / tau;
    SpinorValue v = spinor_at(rhs.psi_dot, p) +
                    (gn[p] / n2[p]) * spinor_at(st.psi, p) +
                    coef * spinor_at(transport, p);
    spinor_set(rhs.psi_dot, p, v);
  }
  return rhs;
}

// ---------------------------------------------------------------------------
// Lower-order decomposition of the gauged system
// ---------------------------------------------------------------------------

// g^{kl} hat-nabla_k hat-nabla_l g, with hat-nabla the g0 covariant derivative
inline Sym2Field hat_laplacian_metric(const GeometryCache& geo,
                                      const GeometryCache& geo0) {
  const Grid& grid = geo.grid();
  const int n = grid.n;
  // first hat-derivative: (hat-nabla_k g)_{ij}
  ThreeTensorField d1(grid);
  for (int k = 0; k < n; ++k) {
    Sym2Field dk = partial_derivative(geo.g(), k, geo.scheme());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (std::size_t p = 0; p < grid.points(); ++p) {
          double v = dk.at(i, j, p);
          for (int m = 0; m < n; ++m)
            v -= geo0.christoffel().at(m, k, i, p) * geo.g().at(m, j, p) +
                 geo0.christoffel().at(m, k, j, p) * geo.g().at(i, m, p);
          d1.at(k, i, j, p) = v;
        }
  }
  // second hat-derivative contracted with g^{kl}
  Sym2Field out(grid);
  for (int l = 0; l < n; ++l) {
    ThreeTensorField dl = partial_derivative(d1, l, geo.scheme());
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (std::size_t p = 0; p < grid.points(); ++p) {
            double v = dl.at(k, i, j, p);
            for (int m = 0; m < n; ++m)
              v -= geo0.christoffel().at(m, l, k, p) * d1.at(m, i, j, p) +
                   geo0.christoffel().at(m, l, i, p) * d1.at(k, m, j, p) +
                   geo0.christoffel().at(m, l, j, p) * d1.at(k, i, m, p);
            out.at(i, j, p) += geo.g_inv().at(k, l, p) * v;
          }
  }
  return out;
}

// A(psi)^{kl} applied to hat-nabla_k hat-nabla_l psi, in frame indices:
//   A^{ab}(s) = delta_{ab} (s - (1/(2 tau)) Re<psi,s> psi)
//               + (1/(2 tau)) Re<psi, e_c . e_b . s> e_a . e_c . psi
// The Clifford order makes the quadratic form coercive (>= |xi|^2 |s|^2),
// and the 1/(2 tau) coefficients plus the trace correction are the ones for
// which the gauged spinor RHS minus this operator is first order in psi
// (they reproduce the symbol of the unordered-pair-normalized Kosmann term).
inline SpinorField a_hat_laplacian_spinor(const FlowState& st,
                                          const GeometryCache& geo,
                                          const GeometryCache& geo0,
                                          const CliffordRep& rep) {
  const Grid& grid = geo.grid();
  const int n = grid.n;
  SpinorJet jet = covariant_derivative_spinor(st.psi, geo, rep);
  std::array<std::array<SpinorMatrix, 3>, 3> gg;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) gg[a][b] = rep.gamma[a] * rep.gamma[b];

  // hat second covariant derivative (spin connection of g, tangent index
  // corrected with the g0 Christoffels), coordinate indices (k,l)
  std::vector<std::vector<SpinorField>> d2(n);
  for (int k = 0; k < n; ++k) {
    d2[k].resize(n, SpinorField(grid));
    for (int l = 0; l < n; ++l) {
      SpinorField dd = partial_derivative(jet.nabla_coord[l], k, geo.scheme());
      for (std::size_t p = 0; p < grid.points(); ++p) {
        SpinorValue v = spinor_at(dd, p);
        SpinorValue base = spinor_at(jet.nabla_coord[l], p);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            double w = geo.omega().at(k, a, b, p);
            if (w != 0.0) v += 0.25 * w * (gg[a][b] * base);
          }
        for (int m = 0; m < n; ++m)
          v -= geo0.christoffel().at(m, k, l, p) * spinor_at(jet.nabla_coord[m], p);
        spinor_set(d2[k][l], p, v);
      }
    }
  }

  SpinorField out(grid);
  const double tau = st.consts.tau;
  for (std::size_t p = 0; p < grid.points(); ++p) {
    SpinorValue psi = spinor_at(st.psi, p);
    SpinorValue acc = SpinorValue::Zero();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        // frame components of the hat second derivative
        SpinorValue s = SpinorValue::Zero();
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            s += geo.frame().at(a, k, p) * geo.frame().at(b, l, p) *
                 spinor_at(d2[k][l], p);
        if (a == b) acc += s - (0.5 / tau) * re_inner(psi, s) * psi;
        for (int c = 0; c < n; ++c) {
          double w = re_inner(psi, gg[c][b] * s);
          acc += (0.5 * w / tau) * (gg[a][c] * psi);
        }
      }
    spinor_set(out, p, acc);
  }
  return out;
}

struct LowerOrderParts {
  Sym2Field F;    // gauged metric RHS minus g^{kl} hat-nabla_k hat-nabla_l g
  ScalarField G;  // displayed first-order part of the gauged f equation
  SpinorField H;  // gauged spinor RHS minus A(psi)^{kl} hat-nabla_k hat-nabla_l psi
};

inline LowerOrderParts lower_order_decomposition(const FlowState& st,
                                                 const CliffordRep& rep) {
  GeometryCache geo(st.g), geo0(st.g0);
  FlowRhs rhs = gauged_rhs(st, rep);
  LowerOrderParts out{rhs.g_dot - hat_laplacian_metric(geo, geo0),
                      ScalarField(st.g.grid()),
                      rhs.psi_dot - a_hat_laplacian_spinor(st, geo, geo0, rep)};
  // G = gauged f RHS plus its top-order term (1 - |psi|^2/tau) Delta f
  ScalarField n2 = norm_sq(st.psi);
  ScalarField lap_f = laplacian(geo, st.f);
  out.G = rhs.f_dot;
  for (std::size_t p = 0; p < out.G.size(); ++p)
    out.G[p] += (1.0 - n2[p] / st.consts.tau) * lap_f[p];
  return out;
}

// ---------------------------------------------------------------------------
// Time stepping (gauged system only)
// ---------------------------------------------------------------------------

// component-space derivative: the spinor RHS is a BG-derivative, so stepping
// the raw components must subtract the frame-rotation generator (bg_rotation)
inline FlowRhs component_rhs(const FlowState& st, const CliffordRep& rep) {
  FlowRhs rhs = gauged_rhs(st, rep);
  rhs.psi_dot -= bg_rotation(st.g, rhs.g_dot, st.psi, rep);
  return rhs;
}

inline void require_marchable(const FlowState& st) {
  if (!(st.consts.c > st.consts.tau))
    throw std::domain_error(
        "step_rk4: time marching requires the fully forward parabolic regime "
        "c > tau (the f equation is backward parabolic for c < tau)");
}

inline FlowState step_rk4(const FlowState& st, double dt,
                          const CliffordRep& rep) {
  require_marchable(st);
  if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be > 0");

  auto advance = [&](const FlowRhs& k, double h) {
    FlowState out = st;
    out.g += h * k.g_dot;
    symmetrize(out.g);
    out.f += h * k.f_dot;
    out.psi += complexd(h) * k.psi_dot;
    out.t = st.t + h;
    return out;
  };

  FlowRhs k1 = component_rhs(st, rep);
  FlowRhs k2 = component_rhs(advance(k1, 0.5 * dt), rep);
  FlowRhs k3 = component_rhs(advance(k2, 0.5 * dt), rep);
  FlowRhs k4 = component_rhs(advance(k3, dt), rep);

  FlowState out = st;
  out.g += (dt / 6.0) * (k1.g_dot + 2.0 * k2.g_dot + 2.0 * k3.g_dot + k4.g_dot);
  symmetrize(out.g);
  out.f += (dt / 6.0) * (k1.f_dot + 2.0 * k2.f_dot + 2.0 * k3.f_dot + k4.f_dot);
  out.psi += complexd(dt / 6.0) *
             (k1.psi_dot + 2.0 * k2.psi_dot + 2.0 * k3.psi_dot + k4.psi_dot);
  out.t = st.t + dt;

  if (!std::isfinite(out.g.max_abs()) || !std::isfinite(out.f.max_abs()) ||
      !std::isfinite(out.psi.max_abs()))
    throw std::runtime_error("step_rk4: non-finite state after step");
  return out;
}

inline double default_dt(const Grid& g, double sigma = 0.1) {
  return sigma * g.h() * g.h();
}

// ---------------------------------------------------------------------------
// Monitoring
// ---------------------------------------------------------------------------

struct MonitorRecord {
  double t = 0.0;
  double W_lambda = 0.0;
  double dissipation = 0.0;   // RHS magnitude of the monotonicity formula
  double mass = 0.0;          // integral of dOmega
  double psi_norm_dev = 0.0;  // max | |psi|^2 - c |
  double regime_coeff = 0.0;  // 1 - c/tau
  bool accepted = true;
};

// int (2 tau |Ric + L_{(1/2)grad f - V_f/tau} g - (2/tau)S - (lambda/2tau)g|^2
//      + 8 |Delta_f psi + (|grad psi|^2/|psi|^2) psi|^2) dOmega
inline double dissipation_integral(const GeometryCache& geo, const ScalarField& f,
                                   const SpinorField& psi, const CliffordRep& rep,
                                   const FlowConstants& k) {
  const Grid& grid = geo.grid();
  SpinorJet jet = covariant_derivative_spinor(psi, geo, rep);
  SpinorTensors t = spinor_tensors(jet, geo, rep, f);

  VectorField X = gradient(geo, f);
  X *= 0.5;
  X -= (1.0 / k.tau) * t.Vf;
  Sym2Field mres = geo.ric() + lie_derivative_metric(geo, X);
  mres -= (2.0 / k.tau) * t.S;
  {
    Sym2Field lam = geo.g();
    lam *= k.lambda / (2.0 * k.tau);
    mres -= lam;
  }

  SpinorField sres = laplacian_f_spinor(jet, geo, rep, f);
  ScalarField gn = grad_norm_sq(jet);
  for (std::size_t p = 0; p < grid.points(); ++p) {
    SpinorValue v = spinor_at(sres, p) +
                    (gn[p] / psi.norm_sq(p)) * spinor_at(psi, p);
    spinor_set(sres, p, v);
  }

  ScalarField integrand = 2.0 * k.tau * tensor_inner(geo, mres, mres);
  for (std::size_t p = 0; p < grid.points(); ++p)
    integrand[p] += 8.0 * sres.norm_sq(p);
  return integrate(integrand, weighted_measure(geo.g(), f, k.tau));
}

inline MonitorRecord monitor(const FlowState& st, const CliffordRep& rep) {
  MonitorRecord r;
  r.t = st.t;
  GeometryCache geo(st.g);
  r.W_lambda = w_lambda(geo, st.f, st.psi, rep, st.consts);
  r.dissipation = dissipation_integral(geo, st.f, st.psi, rep, st.consts);
  ScalarField one(st.g.grid(), 1.0);
  r.mass = integrate(one, weighted_measure(st.g, st.f, st.consts.tau));
  for (std::size_t p = 0; p < st.psi.points(); ++p)
    r.psi_norm_dev =
        std::max(r.psi_norm_dev, std::abs(st.psi.norm_sq(p) - st.consts.c));
  r.regime_coeff = 1.0 - st.consts.c / st.consts.tau;
  return r;
}

// marches n_steps of the gauged system; the returned list has n_steps + 1
// records (initial state included). A step is rejected (accepted = false,
// run stops) if the state leaves the SPD cone, produces non-finite values,
// or lets |psi|^2 drift beyond 1e-3 c.
inline std::vector<MonitorRecord> run_with_monitors(FlowState st, double dt,
                                                    int n_steps,
                                                    const CliffordRep& rep) {
  require_marchable(st);
  std::vector<MonitorRecord> out;
  out.push_back(monitor(st, rep));
  for (int k = 0; k < n_steps; ++k) {
    MonitorRecord rec;
    try {
      st = step_rk4(st, dt, rep);
      rec = monitor(st, rep);
      if (rec.psi_norm_dev > 1e-3 * st.consts.c) rec.accepted = false;
    } catch (const std::exception&) {
      rec = out.back();
      rec.accepted = false;
    }
    out.push_back(rec);
    if (!rec.accepted) break;
  }
  return out;
}

}  // namespace spinflow
