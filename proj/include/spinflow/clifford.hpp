#pragma once

// Matrix representation of the Clifford algebra with the conventions
// X.Y + Y.X = -2 g(X,Y) and skew-Hermitian generators (gamma_a^dag = -gamma_a),
// realized as gamma_a = i * Pauli_a for n in {2,3}. Spinor rank is 2 in both
// dimensions.

#include <Eigen/Dense>
#include <stdexcept>

#include "spinflow/grid.hpp"

namespace spinflow {

using SpinorValue = Eigen::Vector2cd;
using SpinorMatrix = Eigen::Matrix2cd;

struct CliffordRep {
  int n = 0;
  int m = 2;                       // 2^floor(n/2)
  std::array<SpinorMatrix, 3> gamma;

  const SpinorMatrix& operator[](int a) const { return gamma[a]; }
};

inline CliffordRep build_rep(int n) {
  if (n != 2 && n != 3) throw std::invalid_argument("build_rep: n must be 2 or 3");
  const complexd I(0.0, 1.0);
  SpinorMatrix sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, -I, I, 0;
  sz << 1, 0, 0, -1;
  CliffordRep rep;
  rep.n = n;
  rep.gamma[0] = I * sx;
  rep.gamma[1] = I * sy;
  rep.gamma[2] = I * sz;  // unused when n == 2
  return rep;
}

// (sum_a v_a gamma_a) psi, v in orthonormal-frame components
inline SpinorValue clifford_vector(const CliffordRep& rep, const double* v,
                                   const SpinorValue& psi) {
  SpinorValue out = v[0] * (rep.gamma[0] * psi);
  for (int a = 1; a < rep.n; ++a) out += v[a] * (rep.gamma[a] * psi);
  return out;
}

inline SpinorMatrix clifford_vector_matrix(const CliffordRep& rep, const double* v) {
  SpinorMatrix out = v[0] * rep.gamma[0];
  for (int a = 1; a < rep.n; ++a) out += v[a] * rep.gamma[a];
  return out;
}

// c(v ^ w) psi = 1/2 (v.(w.psi) - w.(v.psi))
inline SpinorValue two_form_action(const CliffordRep& rep, const double* v,
                                   const double* w, const SpinorValue& psi) {
  SpinorValue vw = clifford_vector(rep, v, clifford_vector(rep, w, psi));
  SpinorValue wv = clifford_vector(rep, w, clifford_vector(rep, v, psi));
  return 0.5 * (vw - wv);
}

inline complexd inner(const SpinorValue& a, const SpinorValue& b) {
  // Hermitian product, antilinear in the first slot: <a,b> = sum conj(a) b
  return a.dot(b);
}

inline double re_inner(const SpinorValue& a, const SpinorValue& b) {
  return inner(a, b).real();
}

}  // namespace spinflow
