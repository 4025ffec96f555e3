// spinflow — command-line laboratory for the weighted spinorial functional,
// its first variation, the coupled gauged flow, and the symbol calculus.
//
// Commands: verify, variation, flow, symbols, spectrum, convergence.
// Exit codes: 0 = all assertions pass, 1 = assertion failure (details in the
// report artifact), 2 = configuration or regime error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinflow/flow.hpp"
#include "spinflow/io.hpp"
#include "spinflow/symbols.hpp"

using namespace spinflow;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string command = "verify";
  int n = 2;
  int res = 64;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int kmax = 2;
  double amp = 0.05;
  double tau = 0.5;
  double lambda = 0.0;
  double c = 1.0;
  double dt = 0.0;  // 0 => parabolic default
  int steps = 200;
  std::string scheme = "spectral";
  std::string output_dir = ".";
};

// the published schema: every key optional, types fixed
const char* kSchemaKeys[] = {"command", "n",   "res",    "seed",  "seeds",
                             "kmax",    "amp", "tau",    "lambda", "c",
                             "dt",      "steps", "scheme", "output_dir"};

void apply_json(RunConfig& cfg, const json& j) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : kSchemaKeys) known = known || it.key() == k;
    if (!known) throw std::invalid_argument("unknown config key: " + it.key());
  }
  if (j.contains("command")) cfg.command = j.at("command").get<std::string>();
  if (j.contains("n")) cfg.n = j.at("n").get<int>();
  if (j.contains("res")) cfg.res = j.at("res").get<int>();
  if (j.contains("seed")) cfg.seeds = {j.at("seed").get<std::uint64_t>()};
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("kmax")) cfg.kmax = j.at("kmax").get<int>();
  if (j.contains("amp")) cfg.amp = j.at("amp").get<double>();
  if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
  if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
  if (j.contains("c")) cfg.c = j.at("c").get<double>();
  if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
  if (j.contains("steps")) cfg.steps = j.at("steps").get<int>();
  if (j.contains("scheme")) cfg.scheme = j.at("scheme").get<std::string>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
}

json to_json(const RunConfig& cfg) {
  return json{{"command", cfg.command}, {"n", cfg.n},       {"res", cfg.res},
              {"seeds", cfg.seeds},     {"kmax", cfg.kmax}, {"amp", cfg.amp},
              {"tau", cfg.tau},         {"lambda", cfg.lambda}, {"c", cfg.c},
              {"dt", cfg.dt},           {"steps", cfg.steps},
              {"scheme", cfg.scheme},   {"output_dir", cfg.output_dir}};
}

void validate(const RunConfig& cfg) {
  static const char* commands[] = {"verify", "variation", "flow",
                                   "symbols", "spectrum", "convergence"};
  bool ok = false;
  for (const char* c : commands) ok = ok || cfg.command == c;
  if (!ok) throw std::invalid_argument("unknown command: " + cfg.command);
  if (cfg.n != 2 && cfg.n != 3) throw std::invalid_argument("n must be 2 or 3");
  if (cfg.res < 8 || (cfg.res & (cfg.res - 1)) != 0)
    throw std::invalid_argument("res must be a power of two >= 8");
  if (cfg.seeds.empty()) throw std::invalid_argument("seeds must be nonempty");
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!(cfg.c > 0.0)) throw std::invalid_argument("c must be > 0");
  if (cfg.steps < 0) throw std::invalid_argument("steps must be >= 0");
  if (cfg.scheme != "spectral" && cfg.scheme != "fd4")
    throw std::invalid_argument("scheme must be spectral or fd4");
}

Scheme parse_scheme(const RunConfig& cfg) {
  return cfg.scheme == "fd4" ? Scheme::fd4 : Scheme::spectral;
}

// 64-bit FNV-1a over the canonical config dump; identifies every artifact
std::string config_hash(const RunConfig& cfg) {
  std::string s = to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_metadata(const RunConfig& cfg, const std::string& hash) {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&tt), "%Y-%m-%dT%H:%M:%SZ");
  json meta = {{"command", cfg.command},
               {"config_hash", hash},
               {"timestamp_utc", ts.str()}};
  std::ofstream os(std::filesystem::path(cfg.output_dir) /
                   (cfg.command + "_meta.json"));
  os << meta.dump(2) << '\n';
}

void write_report(const RunConfig& cfg, const json& body) {
  std::ofstream os(std::filesystem::path(cfg.output_dir) /
                   (cfg.command + "_report.json"));
  os << body.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Shared builders
// ---------------------------------------------------------------------------

Sym2Field flat_metric(const Grid& g) {
  Sym2Field id(g);
  for (int i = 0; i < g.n; ++i)
    for (std::size_t p = 0; p < id.points(); ++p) id.at(i, i, p) = 1.0;
  return id;
}

SpinorField constant_spinor(const Grid& g, const SpinorValue& v) {
  SpinorField psi(g);
  for (std::size_t p = 0; p < psi.points(); ++p) spinor_set(psi, p, v);
  return psi;
}

SpinorField phase_spinor(const Grid& g, double c, const ScalarField& theta) {
  SpinorField psi(g);
  for (std::size_t p = 0; p < psi.points(); ++p)
    spinor_set(psi, p,
               SpinorValue(std::sqrt(c) * std::exp(complexd(0.0, theta[p])), 0.0));
  return psi;
}

struct Corpus {
  GeometryCache geo;
  ScalarField f;
  SpinorField psi;
};

Corpus random_corpus(const Grid& g, std::uint64_t seed, const RunConfig& cfg) {
  return Corpus{GeometryCache(random_metric(g, seed, cfg.kmax, cfg.amp),
                              parse_scheme(cfg)),
                random_scalar(g, seed + 1000, cfg.kmax, 4.0 * cfg.amp),
                random_spinor(g, seed + 2000, cfg.kmax, 1.0)};
}

double field_gap(const SpinorField& a, const SpinorField& b) {
  return (a - b).max_abs();
}

struct Checker {
  json checks = json::array();
  bool all_pass = true;

  void add(const std::string& name, std::uint64_t seed, double residual,
           double tol) {
    bool pass = residual <= tol;
    all_pass = all_pass && pass;
    checks.push_back({{"name", name},
                      {"seed", seed},
                      {"residual", residual},
                      {"tolerance", tol},
                      {"pass", pass}});
  }
};

// ---------------------------------------------------------------------------
// verify: pointwise and integral identity suite
// ---------------------------------------------------------------------------

int cmd_verify(const RunConfig& cfg, const std::string& hash) {
  Grid g(cfg.n, cfg.res);
  CliffordRep rep = build_rep(cfg.n);
  Checker ck;

  // Clifford algebra properties (seed-independent)
  {
    double anti = 0.0, skew = 0.0;
    for (int a = 0; a < cfg.n; ++a) {
      for (int b = 0; b < cfg.n; ++b) {
        SpinorMatrix m = rep.gamma[a] * rep.gamma[b] + rep.gamma[b] * rep.gamma[a];
        if (a == b) m += 2.0 * SpinorMatrix::Identity();
        anti = std::max(anti, m.cwiseAbs().maxCoeff());
      }
      skew = std::max(skew,
                      (rep.gamma[a] + rep.gamma[a].adjoint()).cwiseAbs().maxCoeff());
    }
    ck.add("clifford_anticommutation", 0, anti, 1e-14);
    ck.add("clifford_antihermitian", 0, skew, 1e-14);
  }

  FlowConstants k{cfg.tau, cfg.lambda, cfg.c};
  for (std::uint64_t seed : cfg.seeds) {
    Corpus cp = random_corpus(g, seed, cfg);

    // Lichnerowicz: D_f^2 = -Delta_f + R_f/4
    {
      SpinorField lhs = dirac_f(dirac_f(cp.psi, cp.geo, rep, cp.f), cp.geo, rep, cp.f);
      SpinorField rhs = -1.0 * laplacian_f_spinor(cp.psi, cp.geo, rep, cp.f);
      ScalarField Rf = r_f(cp.geo, cp.f);
      for (std::size_t p = 0; p < g.points(); ++p)
        spinor_set(rhs, p, spinor_at(rhs, p) + 0.25 * Rf[p] * spinor_at(cp.psi, p));
      ck.add("lichnerowicz", seed, field_gap(lhs, rhs) / (1.0 + lhs.max_abs()), 1e-7);
    }

    // conjugation D_f = e^{f/2} D e^{-f/2}
    {
      SpinorField scaled(g);
      for (std::size_t p = 0; p < g.points(); ++p)
        spinor_set(scaled, p, std::exp(-0.5 * cp.f[p]) * spinor_at(cp.psi, p));
      SpinorField rhs = dirac(scaled, cp.geo, rep);
      for (std::size_t p = 0; p < g.points(); ++p)
        spinor_set(rhs, p, std::exp(0.5 * cp.f[p]) * spinor_at(rhs, p));
      ck.add("dirac_conjugation", seed,
             field_gap(dirac_f(cp.psi, cp.geo, rep, cp.f), rhs), 1e-8);
    }

    // divergence identity for the energy-momentum tensor
    ck.add("div_f_T", seed,
           div_f_T_identity_residual(cp.psi, cp.geo, rep, cp.f).max_abs(), 1e-6);

    // the two equivalent forms of the functional
    {
      double a = w_lambda(cp.geo, cp.f, cp.psi, rep, k);
      double b = w_lambda_dirac_form(cp.geo, cp.f, cp.psi, rep, k);
      ck.add("w_lambda_forms", seed, std::abs(a - b) / (1.0 + std::abs(a)), 1e-7);
    }
  }

  // restriction identities on a weighted-harmonic spinor over a flat metric
  {
    GeometryCache geo(flat_metric(g), parse_scheme(cfg));
    ScalarField f = random_scalar(g, cfg.seeds.front() + 7000, cfg.kmax, 0.4);
    SpinorValue chi0(complexd(0.6, -0.2), complexd(0.3, 0.7));
    SpinorField psi(g);
    for (std::size_t p = 0; p < g.points(); ++p)
      spinor_set(psi, p, std::exp(0.5 * f[p]) * chi0);
    ck.add("kernel_membership", 0, dirac_f(psi, geo, rep, f).max_abs(), 1e-9);

    auto [F, W] = classical_functionals(geo, f, cfg.tau);
    double w1 = w_lambda(geo, f, psi, rep, {cfg.tau, 1.0, 1.0});
    ck.add("restriction_W1", 0, std::abs(w1 + W) / (1.0 + std::abs(W)), 1e-9);
    double w0 = w_lambda(geo, f, psi, rep, {cfg.tau, 0.0, 1.0});
    double e0 = -cfg.tau * std::pow(4.0 * kPi * cfg.tau, -0.5 * cfg.n) * F;
    ck.add("restriction_W0", 0, std::abs(w0 - e0) / (1.0 + std::abs(e0)), 1e-9);
  }

  // W_0 at tau = 1 against the conformal spinor energy, general data
  {
    Corpus cp = random_corpus(g, cfg.seeds.front() + 8000, cfg);
    double w0 = w_lambda(cp.geo, cp.f, cp.psi, rep, {1.0, 0.0, 1.0});
    double E = bo_energy(cp.geo, cp.f, cp.psi, rep);
    double expect = std::pow(4.0 * kPi, -0.5 * cfg.n) * E;
    ck.add("restriction_E", 0, std::abs(w0 - expect) / (1.0 + std::abs(expect)),
           1e-9);
  }

  // critical configuration: all residuals vanish
  {
    GeometryCache geo(flat_metric(g), parse_scheme(cfg));
    ScalarField f(g, 0.3);
    SpinorField psi = constant_spinor(g, SpinorValue(std::sqrt(2.0 * cfg.tau), 0.0));
    FlowConstants kc{cfg.tau, 0.0, 2.0 * cfg.tau};
    ELReport el = el_residuals(geo, f, psi, rep, kc);
    double r = std::max({el.metric_residual.max_abs(), el.spinor_residual.max_abs(),
                         el.soliton_residual.max_abs()});
    ck.add("critical_point_EL", 0, r, 1e-10);
    CriticalIdentities ci = critical_identities(geo, f, psi, rep, kc);
    ck.add("critical_point_identities", 0,
           std::max(std::abs(ci.lhs1 - ci.rhs1), std::abs(ci.lhs2 - ci.rhs2)),
           1e-10);
  }

  write_report(cfg, json{{"config_hash", hash},
                         {"checks", ck.checks},
                         {"all_pass", ck.all_pass}});
  return ck.all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// variation: first-variation formula and integral evolution equations
// ---------------------------------------------------------------------------

int cmd_variation(const RunConfig& cfg, const std::string& hash) {
  Grid g(cfg.n, cfg.res);
  CliffordRep rep = build_rep(cfg.n);
  FlowConstants k{cfg.tau, cfg.lambda, cfg.c};
  Checker ck;
  json details = json::array();

  for (std::uint64_t seed : cfg.seeds) {
    Corpus cp = random_corpus(g, seed, cfg);
    VariationDirection dir =
        random_direction(g, seed + 5000, cfg.kmax, cfg.amp, 0.1 * cfg.amp);
    double formula = first_variation_rhs(cp.geo, cp.f, cp.psi, rep, k, dir);

    json errs = json::array();
    double rel_finest = 0.0;
    for (double eps : {4e-4, 2e-4, 1e-4}) {
      double num =
          w_lambda_central_difference(cp.geo.g(), cp.f, cp.psi, rep, k, dir, eps);
      double rel = std::abs(num - formula) / (1.0 + std::abs(formula));
      errs.push_back({{"eps", eps}, {"relative_error", rel}});
      rel_finest = rel;
    }
    ck.add("first_variation", seed, rel_finest, 1e-5);

    double worst = 0.0;
    json evo = json::array();
    for (const EvolutionResidual& r :
         integral_evolution_check(cp.geo.g(), cp.f, cp.psi, rep, k, dir)) {
      double rel = r.residual() / (1.0 + std::abs(r.formula));
      worst = std::max(worst, rel);
      evo.push_back({{"name", r.name}, {"relative_residual", rel}});
    }
    ck.add("integral_evolutions", seed, worst, 1e-6);
    details.push_back(
        {{"seed", seed}, {"eps_sweep", errs}, {"evolutions", evo}});
  }

  write_report(cfg, json{{"config_hash", hash},
                         {"checks", ck.checks},
                         {"details", details},
                         {"all_pass", ck.all_pass}});
  return ck.all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// flow: march the gauged system and stream monitor records to CSV
// ---------------------------------------------------------------------------

int cmd_flow(const RunConfig& cfg, const std::string& hash) {
  FlowConstants k{cfg.tau, cfg.lambda, cfg.c};
  RegimeReport regime = regime_classify(cfg.n, k);
  if (regime.regime != Regime::fully_forward) {
    std::cerr << "flow: refusing to march with c <= tau: the f equation is "
              << (regime.regime == Regime::degenerate ? "degenerate"
                                                      : "backward parabolic")
              << " in this regime\n";
    return 2;
  }

  Grid g(cfg.n, cfg.res);
  CliffordRep rep = build_rep(cfg.n);
  FlowState st;
  st.g = random_metric(g, cfg.seeds.front(), cfg.kmax, cfg.amp);
  st.f = random_scalar(g, cfg.seeds.front() + 1, cfg.kmax, cfg.amp);
  st.psi = phase_spinor(g, cfg.c,
                        random_scalar(g, cfg.seeds.front() + 2, cfg.kmax, cfg.amp));
  st.consts = k;
  st.g0 = flat_metric(g);

  double dt = cfg.dt > 0.0 ? cfg.dt : default_dt(g, 0.04);
  std::vector<MonitorRecord> recs = run_with_monitors(st, dt, cfg.steps, rep);

  std::filesystem::path dir(cfg.output_dir);
  {
    std::ofstream csv(dir / "flow_monitor.csv");
    csv << "# config_hash=" << hash << '\n';
    csv << "t,W_lambda,dissipation,mass,psi_norm_dev,accepted\n";
    csv << std::setprecision(17);
    for (const MonitorRecord& r : recs)
      csv << r.t << ',' << r.W_lambda << ',' << r.dissipation << ',' << r.mass
          << ',' << r.psi_norm_dev << ',' << (r.accepted ? 1 : 0) << '\n';
  }

  // march a copy to the recorded horizon for the checkpoint
  FlowState fin = st;
  bool all_ok = true;
  double w_prev = recs.front().W_lambda;
  double mass_drift = 0.0;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    all_ok = all_ok && recs[i].accepted;
    all_ok = all_ok && recs[i].W_lambda <= w_prev + 1e-8;
    w_prev = recs[i].W_lambda;
    mass_drift = std::max(mass_drift,
                          std::abs(recs[i].mass - recs.front().mass));
  }
  if (all_ok)
    for (int i = 0; i < cfg.steps; ++i) fin = step_rk4(fin, dt, rep);
  io::write_sym2((dir / "flow_final_g.field").string(), fin.g);
  io::write_scalar((dir / "flow_final_f.field").string(), fin.f);
  io::write_spinor((dir / "flow_final_psi.field").string(), fin.psi);

  write_report(cfg, json{{"config_hash", hash},
                         {"dt", dt},
                         {"steps_accepted", recs.size() - 1},
                         {"W_initial", recs.front().W_lambda},
                         {"W_final", recs.back().W_lambda},
                         {"monotone", all_ok},
                         {"measure_drift", mass_drift},
                         {"all_pass", all_ok}});
  return all_ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// symbols: principal-symbol comparisons, coercivity, parabolicity table
// ---------------------------------------------------------------------------

int cmd_symbols(const RunConfig& cfg, const std::string& hash) {
  CliffordRep rep = build_rep(cfg.n);
  Checker ck;

  SymbolProbe pr;
  pr.n = cfg.n;
  pr.tau = cfg.tau;
  pr.xi.setZero();
  pr.xi(0) = 1;
  pr.xi(1) = -1;
  pr.eta.setZero();
  pr.eta(0, 0) = 0.3;
  pr.eta(0, 1) = pr.eta(1, 0) = -0.45;
  pr.eta(1, 1) = 0.2;
  if (cfg.n == 3) {
    pr.eta(0, 2) = pr.eta(2, 0) = 0.15;
    pr.eta(1, 2) = pr.eta(2, 1) = 0.33;
    pr.eta(2, 2) = -0.25;
  }
  pr.psi = SpinorValue(complexd(1.1, 0.2), complexd(-0.4, 0.7));
  pr.s = SpinorValue(complexd(0.3, -0.6), complexd(0.8, 0.25));

  const struct {
    OperatorTag tag;
    const char* name;
  } tags[] = {{OperatorTag::Ric, "ricci"},
              {OperatorTag::R, "scalar_curvature"},
              {OperatorTag::LieW, "lie_deturck"},
              {OperatorTag::KosmannU, "kosmann_u"},
              {OperatorTag::KosmannW, "kosmann_w"},
              {OperatorTag::LapSpinor, "spinor_laplacian"},
              {OperatorTag::DivU, "div_u"},
              {OperatorTag::GaugedMetric, "gauged_metric"},
              {OperatorTag::GaugedSpinor, "gauged_spinor"},
              {OperatorTag::LowerOrderSpinor, "lower_order_spinor"}};

  json table = json::array();
  for (const auto& t : tags) {
    SymbolValue cf = closed_symbol(t.tag, pr);
    json rows = json::array();
    double worst = 0.0;
    for (int N : {8, 16, 32}) {
      SymbolValue num = numeric_symbol_probe(t.tag, pr, N, 1e-4, 4 * N);
      double gap = (num.metric - cf.metric).norm() +
                   std::abs(num.scalar - cf.scalar) +
                   (num.spinor - cf.spinor).norm();
      double scale = cf.metric.norm() + std::abs(cf.scalar) + cf.spinor.norm();
      double rel = gap / (1.0 + scale);
      worst = std::max(worst, rel);
      rows.push_back({{"N", N}, {"relative_error", rel}});
    }
    table.push_back({{"operator", t.name}, {"rows", rows}});
    ck.add(std::string("symbol_") + t.name, 0, worst, 5e-2);
  }

  // coercivity of the A(psi) quadratic form
  {
    std::mt19937_64 rng(cfg.seeds.front());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_margin = 1e30;
    for (int trial = 0; trial < 100; ++trial) {
      SymbolProbe q = pr;
      for (int i = 0; i < cfg.n; ++i) q.xi(i) = u(rng);
      q.psi = SpinorValue(complexd(u(rng), u(rng)), complexd(u(rng), u(rng)));
      q.s = SpinorValue(complexd(u(rng), u(rng)), complexd(u(rng), u(rng)));
      double floor = q.xi.squaredNorm() * q.s.squaredNorm();
      worst_margin = std::min(worst_margin, a_quadratic_form(rep, q) - floor);
    }
    ck.add("coercivity_violation", cfg.seeds.front(),
           std::max(0.0, -worst_margin), 1e-12);
  }

  // parabolicity truth table
  json regimes = json::array();
  for (auto [c, tau] : {std::pair{2.0, 1.0}, {1.0, 1.0}, {1.0, 2.0}}) {
    ParabolicityReport r = parabolicity_report(cfg.n, {tau, cfg.lambda, c});
    regimes.push_back(
        {{"c", c},
         {"tau", tau},
         {"f_coeff", r.f_coeff},
         {"regime", r.regime == Regime::fully_forward
                        ? "fully_forward"
                        : (r.regime == Regime::degenerate ? "degenerate"
                                                          : "backward_forward")}});
  }

  write_report(cfg, json{{"config_hash", hash},
                         {"checks", ck.checks},
                         {"symbol_table", table},
                         {"regimes", regimes},
                         {"all_pass", ck.all_pass}});
  return ck.all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// spectrum: lambda_1(D) sanity and the Friedrich bound
// ---------------------------------------------------------------------------

int cmd_spectrum(const RunConfig& cfg, const std::string& hash) {
  int res = std::min(cfg.res, cfg.n == 2 ? 32 : 8);  // dense assembly cap
  Grid g(cfg.n, res);
  CliffordRep rep = build_rep(cfg.n);
  Checker ck;

  ck.add("flat_harmonic_spinors", 0,
         dirac_lambda1(GeometryCache(flat_metric(g)), rep), 1e-10);

  {
    // rectangular torus with side lengths (1, 1/2, ...): least nonzero
    // |eigenvalue| is 2 pi, attained at the unit frequency of the long side
    Sym2Field gm(g);
    for (std::size_t p = 0; p < gm.points(); ++p) {
      gm.at(0, 0, p) = 1.0;
      for (int i = 1; i < cfg.n; ++i) gm.at(i, i, p) = 0.25;
    }
    std::vector<double> ev = dirac_spectrum(GeometryCache(gm), rep);
    double least = 1e30;
    for (double v : ev)
      if (std::abs(v) > 1.0) least = std::min(least, std::abs(v));
    ck.add("rectangular_gap", 0, std::abs(least - 2.0 * kPi), 1e-6);
  }

  double worst = 0.0;
  for (std::uint64_t seed : cfg.seeds) {
    GeometryCache geo(random_metric(g, seed, cfg.kmax, std::min(cfg.amp, 0.08)));
    ScalarField f = random_scalar(g, seed + 50, cfg.kmax, 0.3);
    auto [lhs, rhs] = friedrich_check(geo, f, rep);
    worst = std::max(worst, rhs - lhs);
  }
  ck.add("friedrich_violation", 0, std::max(0.0, worst), 1e-10);

  write_report(cfg, json{{"config_hash", hash},
                         {"checks", ck.checks},
                         {"all_pass", ck.all_pass}});
  return ck.all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// convergence: resolution and timestep refinement tables
// ---------------------------------------------------------------------------

int cmd_convergence(const RunConfig& cfg, const std::string& hash) {
  CliffordRep rep = build_rep(cfg.n);
  Checker ck;

  // resolution refinement of the Lichnerowicz residual: the curvature
  // products alias on coarse grids, so the residual decays spectrally under
  // refinement and reaches the roundoff floor once the products are resolved
  json res_table = json::array();
  std::vector<double> resid;
  for (int res : {16, 32, 64}) {
    if (cfg.n == 3 && res > 32) break;
    Grid g(cfg.n, res);
    Corpus cp = random_corpus(g, cfg.seeds.front(), cfg);
    SpinorField lhs =
        dirac_f(dirac_f(cp.psi, cp.geo, rep, cp.f), cp.geo, rep, cp.f);
    SpinorField rhs = -1.0 * laplacian_f_spinor(cp.psi, cp.geo, rep, cp.f);
    ScalarField Rf = r_f(cp.geo, cp.f);
    for (std::size_t p = 0; p < g.points(); ++p)
      spinor_set(rhs, p, spinor_at(rhs, p) + 0.25 * Rf[p] * spinor_at(cp.psi, p));
    double r = (lhs - rhs).max_abs();
    resid.push_back(r);
    res_table.push_back({{"res", res}, {"lichnerowicz_residual", r}});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < resid.size(); ++i)
    decreasing = decreasing && resid[i] <= resid[i - 1];
  ck.add("resolution_refinement", cfg.seeds.front(),
         decreasing ? resid.back() : resid.front(), 1e-7);

  // timestep refinement: RK4 self-convergence order on a short gauged run
  json dt_table = json::array();
  {
    Grid g(cfg.n, 16);
    FlowConstants k{1.0, 0.3, 1.5};
    FlowState st;
    st.g = random_metric(g, cfg.seeds.front(), 2, 0.05);
    st.f = random_scalar(g, cfg.seeds.front() + 1, 2, 0.05);
    st.psi = phase_spinor(g, k.c, random_scalar(g, cfg.seeds.front() + 2, 2, 0.05));
    st.consts = k;
    st.g0 = flat_metric(g);

    double T = 8.0 * default_dt(g, 0.05);
    auto march = [&](int nsteps) {
      FlowState s = st;
      double dt = T / nsteps;
      for (int i = 0; i < nsteps; ++i) s = step_rk4(s, dt, rep);
      return s;
    };
    FlowState a = march(8), b = march(16), c = march(32);
    double e1 = (a.g - b.g).max_abs() + field_gap(a.psi, b.psi);
    double e2 = (b.g - c.g).max_abs() + field_gap(b.psi, c.psi);
    double ratio = e1 / e2;
    dt_table.push_back({{"dt_coarse_error", e1},
                        {"dt_fine_error", e2},
                        {"error_ratio", ratio},
                        {"expected_ratio", 16.0}});
    // fourth order: halving dt shrinks the error by ~16
    ck.add("rk4_order_deficit", cfg.seeds.front(),
           std::abs(std::log2(ratio) - 4.0), 0.6);
  }

  write_report(cfg, json{{"config_hash", hash},
                         {"checks", ck.checks},
                         {"resolution_table", res_table},
                         {"timestep_table", dt_table},
                         {"all_pass", ck.all_pass}});
  return ck.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinflow: numerical laboratory for the weighted spinorial "
               "functional and its coupled flow"};
  std::string config_path, command_override, output_override;
  std::int64_t seed_override = -1;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--command", command_override,
                 "verify | variation | flow | symbols | spectrum | convergence");
  app.add_option("--output", output_override, "artifact output directory");
  app.add_option("--seed", seed_override, "single seed override");
  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw std::invalid_argument("cannot open config: " + config_path);
      json j;
      is >> j;
      apply_json(cfg, j);
    }
    if (!command_override.empty()) cfg.command = command_override;
    if (!output_override.empty()) cfg.output_dir = output_override;
    if (seed_override >= 0)
      cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
    validate(cfg);
    std::filesystem::create_directories(cfg.output_dir);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  }

  const std::string hash = config_hash(cfg);
  write_metadata(cfg, hash);

  try {
    int rc = 1;
    if (cfg.command == "verify") rc = cmd_verify(cfg, hash);
    else if (cfg.command == "variation") rc = cmd_variation(cfg, hash);
    else if (cfg.command == "flow") rc = cmd_flow(cfg, hash);
    else if (cfg.command == "symbols") rc = cmd_symbols(cfg, hash);
    else if (cfg.command == "spectrum") rc = cmd_spectrum(cfg, hash);
    else if (cfg.command == "convergence") rc = cmd_convergence(cfg, hash);
    if (rc != 2)
      std::cout << cfg.command << ": "
                << (rc == 0 ? "all checks passed" : "FAILURES (see report)")
                << "  [config " << hash << "]\n";
    return rc;
  } catch (const std::domain_error& e) {
    std::cerr << "regime error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
