#pragma once

// Uniform periodic lattice on the flat torus [0,1)^n with pseudo-spectral
// and fourth-order finite-difference calculus, quadrature, and seeded
// band-limited random field generation.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace spinflow {

using complexd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

struct Grid {
  int n = 2;    // spatial dimension, 2 or 3
  int res = 8;  // points per axis, power of two

  Grid() = default;
  Grid(int n_, int res_) : n(n_), res(res_) {
    if (n != 2 && n != 3) throw std::invalid_argument("Grid: n must be 2 or 3");
    if (res < 8 || (res & (res - 1)) != 0)
      throw std::invalid_argument("Grid: res must be a power of two >= 8");
  }

  double h() const { return 1.0 / res; }
  std::size_t points() const {
    std::size_t p = 1;
    for (int i = 0; i < n; ++i) p *= static_cast<std::size_t>(res);
    return p;
  }
  double cell_volume() const { return std::pow(h(), n); }

  // coordinate of lattice index along one axis
  double coord(int idx) const { return idx * h(); }

  bool operator==(const Grid& o) const { return n == o.n && res == o.res; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (a != b) throw std::invalid_argument("grid mismatch");
}

enum class Scheme { spectral, fd4 };

namespace detail {

// Cached FFTW plans. Plans are created with FFTW_UNALIGNED so they can be
// executed on any buffer of matching shape via fftw_execute_dft.
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans p;
    return p;
  }

  void execute(const Grid& g, complexd* data, int sign) {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto key = std::make_tuple(g.n, g.res, sign);
      auto it = plans_.find(key);
      if (it == plans_.end()) {
        std::vector<int> dims(g.n, g.res);
        std::vector<complexd> tmp(g.points());
        plan = fftw_plan_dft(g.n, dims.data(),
                             reinterpret_cast<fftw_complex*>(tmp.data()),
                             reinterpret_cast<fftw_complex*>(tmp.data()), sign,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
      } else {
        plan = it->second;
      }
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }

 private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline void fft_forward(const Grid& g, std::vector<complexd>& v) {
  FftPlans::instance().execute(g, v.data(), FFTW_FORWARD);
}
inline void fft_backward(const Grid& g, std::vector<complexd>& v) {
  FftPlans::instance().execute(g, v.data(), FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(g.points());
  for (auto& x : v) x *= scale;
}

// signed wavenumber for DFT bin j
inline int wavenumber(int j, int res) { return j <= res / 2 ? j : j - res; }

// decompose flat index into lattice coordinates (row-major)
inline void unflatten(const Grid& g, std::size_t p, int idx[3]) {
  if (g.n == 2) {
    idx[0] = static_cast<int>(p) / g.res;
    idx[1] = static_cast<int>(p) % g.res;
    idx[2] = 0;
  } else {
    idx[2] = static_cast<int>(p % g.res);
    std::size_t q = p / g.res;
    idx[1] = static_cast<int>(q % g.res);
    idx[0] = static_cast<int>(q / g.res);
  }
}

inline std::size_t flatten(const Grid& g, const int idx[3]) {
  std::size_t p = static_cast<std::size_t>(idx[0]);
  for (int i = 1; i < g.n; ++i) p = p * g.res + idx[i];
  return p;
}

// spectral derivative of a complex array, in place
inline void spectral_derivative(const Grid& g, std::vector<complexd>& v,
                                int axis) {
  fft_forward(g, v);
  const int N = g.res;
  int idx[3];
  for (std::size_t p = 0; p < v.size(); ++p) {
    unflatten(g, p, idx);
    int k = wavenumber(idx[axis], N);
    if (idx[axis] == N / 2) k = 0;  // Nyquist mode of an odd-order derivative
    v[p] *= complexd(0.0, 2.0 * kPi * k);
  }
  fft_backward(g, v);
}

// fourth-order central difference of a contiguous component, periodic
template <typename T>
inline void fd4_derivative(const Grid& g, const T* in, T* out, int axis) {
  const int N = g.res;
  const double c = 1.0 / (12.0 * g.h());
  int idx[3];
  for (std::size_t p = 0; p < g.points(); ++p) {
    unflatten(g, p, idx);
    int base = idx[axis];
    auto shifted = [&](int s) {
      int tmp[3] = {idx[0], idx[1], idx[2]};
      tmp[axis] = ((base + s) % N + N) % N;
      return flatten(g, tmp);
    };
    out[p] = c * (-in[shifted(2)] + 8.0 * in[shifted(1)] -
                  8.0 * in[shifted(-1)] + in[shifted(-2)]);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Field containers. Components are stored component-major (each component is
// a contiguous P-length array) so that derivative sweeps are whole-field
// transforms. Vector fields hold contravariant components X^i; Sym2 fields
// hold covariant components A_ij; 3-tensor fields hold covariant T_ijk.
// ---------------------------------------------------------------------------

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0)
      : grid_(g), v_(g.points(), fill) {}

  const Grid& grid() const { return grid_; }
  double& operator[](std::size_t p) { return v_[p]; }
  double operator[](std::size_t p) const { return v_[p]; }
  std::size_t size() const { return v_.size(); }
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  ScalarField& operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t p = 0; p < v_.size(); ++p) v_[p] += o.v_[p];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t p = 0; p < v_.size(); ++p) v_[p] -= o.v_[p];
    return *this;
  }
  ScalarField& operator*=(double s) {
    for (auto& x : v_) x *= s;
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  Grid grid_;
  std::vector<double> v_;
};

inline ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
inline ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
inline ScalarField operator*(double s, ScalarField a) { return a *= s; }

template <int Rank>
class TensorField {
 public:
  TensorField() = default;
  explicit TensorField(const Grid& g) : grid_(g) {
    ncomp_ = 1;
    for (int r = 0; r < Rank; ++r) ncomp_ *= g.n;
    v_.assign(static_cast<std::size_t>(ncomp_) * g.points(), 0.0);
  }

  const Grid& grid() const { return grid_; }
  int ncomp() const { return ncomp_; }
  std::size_t points() const { return grid_.points(); }

  double* comp(int c) { return v_.data() + static_cast<std::size_t>(c) * points(); }
  const double* comp(int c) const {
    return v_.data() + static_cast<std::size_t>(c) * points();
  }

  // rank-specific accessors
  double& at(int i, std::size_t p) {
    static_assert(Rank == 1);
    return v_[static_cast<std::size_t>(i) * points() + p];
  }
  double at(int i, std::size_t p) const {
    static_assert(Rank == 1);
    return v_[static_cast<std::size_t>(i) * points() + p];
  }
  double& at(int i, int j, std::size_t p) {
    static_assert(Rank == 2);
    return v_[static_cast<std::size_t>(i * grid_.n + j) * points() + p];
  }
  double at(int i, int j, std::size_t p) const {
    static_assert(Rank == 2);
    return v_[static_cast<std::size_t>(i * grid_.n + j) * points() + p];
  }
  double& at(int i, int j, int k, std::size_t p) {
    static_assert(Rank == 3);
    return v_[static_cast<std::size_t>((i * grid_.n + j) * grid_.n + k) * points() + p];
  }
  double at(int i, int j, int k, std::size_t p) const {
    static_assert(Rank == 3);
    return v_[static_cast<std::size_t>((i * grid_.n + j) * grid_.n + k) * points() + p];
  }

  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  TensorField& operator+=(const TensorField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t p = 0; p < v_.size(); ++p) v_[p] += o.v_[p];
    return *this;
  }
  TensorField& operator-=(const TensorField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t p = 0; p < v_.size(); ++p) v_[p] -= o.v_[p];
    return *this;
  }
  TensorField& operator*=(double s) {
    for (auto& x : v_) x *= s;
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  Grid grid_;
  int ncomp_ = 0;
  std::vector<double> v_;
};

using VectorField = TensorField<1>;
using Sym2Field = TensorField<2>;
using ThreeTensorField = TensorField<3>;

template <int R>
inline TensorField<R> operator+(TensorField<R> a, const TensorField<R>& b) { return a += b; }
template <int R>
inline TensorField<R> operator-(TensorField<R> a, const TensorField<R>& b) { return a -= b; }
template <int R>
inline TensorField<R> operator*(double s, TensorField<R> a) { return a *= s; }

inline void symmetrize(Sym2Field& a) {
  const int n = a.grid().n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (std::size_t p = 0; p < a.points(); ++p) {
        double m = 0.5 * (a.at(i, j, p) + a.at(j, i, p));
        a.at(i, j, p) = m;
        a.at(j, i, p) = m;
      }
}

// Complex 2^{floor(n/2)}-vector per point; rank 2 for n in {2,3}.
class SpinorField {
 public:
  static constexpr int rank = 2;

  SpinorField() = default;
  explicit SpinorField(const Grid& g)
      : grid_(g), v_(static_cast<std::size_t>(rank) * g.points(), complexd(0)) {}

  const Grid& grid() const { return grid_; }
  std::size_t points() const { return grid_.points(); }

  complexd& at(int c, std::size_t p) {
    return v_[static_cast<std::size_t>(c) * points() + p];
  }
  complexd at(int c, std::size_t p) const {
    return v_[static_cast<std::size_t>(c) * points() + p];
  }
  complexd* comp(int c) { return v_.data() + static_cast<std::size_t>(c) * points(); }
  const complexd* comp(int c) const {
    return v_.data() + static_cast<std::size_t>(c) * points();
  }
  std::vector<complexd>& data() { return v_; }
  const std::vector<complexd>& data() const { return v_; }

  double norm_sq(std::size_t p) const {
    double s = 0.0;
    for (int c = 0; c < rank; ++c) s += std::norm(at(c, p));
    return s;
  }

  SpinorField& operator+=(const SpinorField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t p = 0; p < v_.size(); ++p) v_[p] += o.v_[p];
    return *this;
  }
  SpinorField& operator-=(const SpinorField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t p = 0; p < v_.size(); ++p) v_[p] -= o.v_[p];
    return *this;
  }
  SpinorField& operator*=(complexd s) {
    for (auto& x : v_) x *= s;
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : v_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  Grid grid_;
  std::vector<complexd> v_;
};

inline SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
inline SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
inline SpinorField operator*(complexd s, SpinorField a) { return a *= s; }
inline SpinorField operator*(double s, SpinorField a) { return a *= complexd(s); }

// Positive density (4*pi*tau)^{-n/2} e^{-f} sqrt(det g) per point.
struct MeasureField {
  ScalarField density;
};

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

inline void partial_derivative_raw(const Grid& g, const double* in, double* out,
                                   int axis, Scheme scheme) {
  if (axis < 0 || axis >= g.n) throw std::invalid_argument("axis out of range");
  if (scheme == Scheme::spectral) {
    if (g.res % 2 != 0) throw std::invalid_argument("spectral scheme needs even res");
    std::vector<complexd> buf(g.points());
    for (std::size_t p = 0; p < buf.size(); ++p) buf[p] = in[p];
    detail::spectral_derivative(g, buf, axis);
    for (std::size_t p = 0; p < buf.size(); ++p) out[p] = buf[p].real();
  } else {
    detail::fd4_derivative(g, in, out, axis);
  }
}

inline void partial_derivative_raw(const Grid& g, const complexd* in,
                                   complexd* out, int axis, Scheme scheme) {
  if (axis < 0 || axis >= g.n) throw std::invalid_argument("axis out of range");
  if (scheme == Scheme::spectral) {
    std::vector<complexd> buf(in, in + g.points());
    detail::spectral_derivative(g, buf, axis);
    for (std::size_t p = 0; p < buf.size(); ++p) out[p] = buf[p];
  } else {
    detail::fd4_derivative(g, in, out, axis);
  }
}

inline ScalarField partial_derivative(const ScalarField& f, int axis,
                                      Scheme scheme = Scheme::spectral) {
  ScalarField out(f.grid());
  partial_derivative_raw(f.grid(), f.data().data(), out.data().data(), axis, scheme);
  return out;
}

template <int R>
inline TensorField<R> partial_derivative(const TensorField<R>& f, int axis,
                                         Scheme scheme = Scheme::spectral) {
  TensorField<R> out(f.grid());
  for (int c = 0; c < f.ncomp(); ++c)
    partial_derivative_raw(f.grid(), f.comp(c), out.comp(c), axis, scheme);
  return out;
}

inline SpinorField partial_derivative(const SpinorField& f, int axis,
                                      Scheme scheme = Scheme::spectral) {
  SpinorField out(f.grid());
  for (int c = 0; c < SpinorField::rank; ++c)
    partial_derivative_raw(f.grid(), f.comp(c), out.comp(c), axis, scheme);
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

// Rectangle rule against a weighted measure; spectrally accurate on smooth
// periodic integrands.
inline double integrate(const ScalarField& phi, const MeasureField& m) {
  require_same_grid(phi.grid(), m.density.grid());
  double s = 0.0;
  for (std::size_t p = 0; p < phi.size(); ++p) s += phi[p] * m.density[p];
  return s * phi.grid().cell_volume();
}

inline double integrate_flat(const ScalarField& phi) {
  double s = 0.0;
  for (std::size_t p = 0; p < phi.size(); ++p) s += phi[p];
  return s * phi.grid().cell_volume();
}

inline ScalarField metric_determinant(const Sym2Field& g) {
  const int n = g.grid().n;
  ScalarField det(g.grid());
  for (std::size_t p = 0; p < g.points(); ++p) {
    if (n == 2) {
      det[p] = g.at(0, 0, p) * g.at(1, 1, p) - g.at(0, 1, p) * g.at(1, 0, p);
    } else {
      det[p] = g.at(0, 0, p) * (g.at(1, 1, p) * g.at(2, 2, p) - g.at(1, 2, p) * g.at(2, 1, p)) -
               g.at(0, 1, p) * (g.at(1, 0, p) * g.at(2, 2, p) - g.at(1, 2, p) * g.at(2, 0, p)) +
               g.at(0, 2, p) * (g.at(1, 0, p) * g.at(2, 1, p) - g.at(1, 1, p) * g.at(2, 0, p));
    }
  }
  return det;
}

inline MeasureField weighted_measure(const Sym2Field& g, const ScalarField& f,
                                     double tau) {
  require_same_grid(g.grid(), f.grid());
  if (tau <= 0.0) throw std::invalid_argument("weighted_measure: tau must be positive");
  const int n = g.grid().n;
  ScalarField det = metric_determinant(g);
  const double norm = std::pow(4.0 * kPi * tau, -0.5 * n);
  MeasureField m{ScalarField(g.grid())};
  for (std::size_t p = 0; p < det.size(); ++p) {
    if (det[p] <= 0.0) throw std::domain_error("weighted_measure: metric not SPD");
    m.density[p] = norm * std::exp(-f[p]) * std::sqrt(det[p]);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Seeded band-limited random fields
// ---------------------------------------------------------------------------

namespace detail {

// Deterministic trigonometric polynomial with Fourier support in
// [-kmax,kmax]^n; sup norm bounded by amp via the l1 coefficient bound.
class BandLimited {
 public:
  BandLimited(const Grid& g, std::uint64_t seed, int kmax, double amp) : n_(g.n) {
    if (kmax < 1 || kmax >= g.res / 2)
      throw std::invalid_argument("random_band_limited: kmax must satisfy 1 <= kmax < res/2");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double l1 = 0.0;
    // half-lattice enumeration: first nonzero component positive
    int lim = kmax;
    int k[3] = {0, 0, 0};
    auto consider = [&](int k0, int k1, int k2) {
      int kk[3] = {k0, k1, k2};
      bool zero = true;
      for (int i = 0; i < n_; ++i)
        if (kk[i] != 0) { zero = false; break; }
      if (zero) return;
      for (int i = 0; i < n_; ++i) {
        if (kk[i] > 0) break;
        if (kk[i] < 0) return;
      }
      Mode m;
      for (int i = 0; i < 3; ++i) m.k[i] = kk[i];
      m.a = gauss(rng);
      m.b = gauss(rng);
      l1 += std::abs(m.a) + std::abs(m.b);
      modes_.push_back(m);
    };
    if (n_ == 2) {
      for (k[0] = -lim; k[0] <= lim; ++k[0])
        for (k[1] = -lim; k[1] <= lim; ++k[1]) consider(k[0], k[1], 0);
    } else {
      for (k[0] = -lim; k[0] <= lim; ++k[0])
        for (k[1] = -lim; k[1] <= lim; ++k[1])
          for (k[2] = -lim; k[2] <= lim; ++k[2]) consider(k[0], k[1], k[2]);
    }
    scale_ = (l1 > 0.0 && amp != 0.0) ? amp / l1 : 0.0;
  }

  double eval(const double x[3]) const {
    double s = 0.0;
    for (const auto& m : modes_) {
      double phase = 0.0;
      for (int i = 0; i < n_; ++i) phase += m.k[i] * x[i];
      phase *= 2.0 * kPi;
      s += m.a * std::cos(phase) + m.b * std::sin(phase);
    }
    return scale_ * s;
  }

 private:
  struct Mode {
    int k[3];
    double a, b;
  };
  int n_;
  double scale_ = 0.0;
  std::vector<Mode> modes_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline ScalarField sample_band_limited(const Grid& g, std::uint64_t seed,
                                       int kmax, double amp) {
  BandLimited bl(g, seed, kmax, amp);
  ScalarField out(g);
  int idx[3];
  double x[3];
  for (std::size_t p = 0; p < out.size(); ++p) {
    unflatten(g, p, idx);
    for (int i = 0; i < g.n; ++i) x[i] = g.coord(idx[i]);
    out[p] = bl.eval(x);
  }
  return out;
}

}  // namespace detail

inline ScalarField random_scalar(const Grid& g, std::uint64_t seed, int kmax,
                                 double amp) {
  return detail::sample_band_limited(g, detail::mix_seed(seed, 0x5ca1a8), kmax, amp);
}

inline VectorField random_vector(const Grid& g, std::uint64_t seed, int kmax,
                                 double amp) {
  VectorField out(g);
  for (int i = 0; i < g.n; ++i) {
    ScalarField c = detail::sample_band_limited(g, detail::mix_seed(seed, 0xec10 + i), kmax, amp);
    std::copy(c.data().begin(), c.data().end(), out.comp(i));
  }
  return out;
}

inline Sym2Field random_sym2(const Grid& g, std::uint64_t seed, int kmax,
                             double amp) {
  Sym2Field out(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = i; j < g.n; ++j) {
      ScalarField c = detail::sample_band_limited(
          g, detail::mix_seed(seed, 0x5702 + i * 8 + j), kmax, amp);
      std::copy(c.data().begin(), c.data().end(), out.comp(i * g.n + j));
      if (i != j) std::copy(c.data().begin(), c.data().end(), out.comp(j * g.n + i));
    }
  return out;
}

// delta + band-limited perturbation; min eigenvalue >= 1 - amp*n by the
// Gershgorin bound since every entry is bounded by amp.
inline Sym2Field random_metric(const Grid& g, std::uint64_t seed, int kmax,
                               double amp) {
  if (amp >= 1.0 / g.n)
    throw std::invalid_argument("random_metric: amp must be < 1/n for SPD");
  Sym2Field out = random_sym2(g, seed, kmax, amp);
  for (int i = 0; i < g.n; ++i)
    for (std::size_t p = 0; p < out.points(); ++p) out.at(i, i, p) += 1.0;
  return out;
}

inline SpinorField random_spinor(const Grid& g, std::uint64_t seed, int kmax,
                                 double amp) {
  SpinorField out(g);
  for (int c = 0; c < SpinorField::rank; ++c) {
    ScalarField re = detail::sample_band_limited(
        g, detail::mix_seed(seed, 0x59100 + 2 * c), kmax, amp);
    ScalarField im = detail::sample_band_limited(
        g, detail::mix_seed(seed, 0x59101 + 2 * c), kmax, amp);
    for (std::size_t p = 0; p < g.points(); ++p)
      out.at(c, p) = complexd(re[p], im[p]);
  }
  return out;
}

}  // namespace spinflow
