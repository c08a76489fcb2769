// Copyright 2026 The ionsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Test-only reference implementations, built independently of the library's
// evolution/diagonalization paths: dense 2^N Hamiltonians from explicit
// Kronecker products, brute-force ground states, and exact propagation by
// repeated matrix exponentials.

#pragma once

#include <bit>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace ionsim_test {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

// Operator acting as m2 on qubit `ion` (bit `ion` of the index, ion 0 least
// significant), identity elsewhere.
inline CMat op_on(int n, int ion, const CMat& m2) {
  CMat out = CMat::Identity(1, 1);
  for (int j = 0; j < n; ++j)
    out = kron(j == ion ? m2 : CMat::Identity(2, 2), out);
  return out;
}

// Pauli matrices in the storage basis (sigma_x eigenbasis, bit 0 = |up>).
inline CMat pauli_x() {
  CMat m = CMat::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

inline CMat pauli_y() {
  CMat m = CMat::Zero(2, 2);
  m(0, 1) = Cplx(0, -1);
  m(1, 0) = Cplx(0, 1);
  return m;
}

// H = -(1/N) sum_{i<j} J_ij sx_i sx_j - B sum_i sy_i (kHz).
inline CMat dense_hamiltonian(const Eigen::MatrixXd& j_khz, double b_khz) {
  const int n = static_cast<int>(j_khz.rows());
  const int dim = 1 << n;
  CMat h = CMat::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j)
      h -= (j_khz(i, j) / n) * (op_on(n, i, pauli_x()) * op_on(n, j, pauli_x()));
    h -= b_khz * op_on(n, i, pauli_y());
  }
  return h;
}

// P(s) of the dense ground state, s = number of |up> spins.
inline std::vector<double> dense_ground_state_ps(const Eigen::MatrixXd& j_khz,
                                                 double b_khz) {
  const int n = static_cast<int>(j_khz.rows());
  Eigen::SelfAdjointEigenSolver<CMat> solver(dense_hamiltonian(j_khz, b_khz));
  const CVec gs = solver.eigenvectors().col(0);
  std::vector<double> p(n + 1, 0.0);
  for (int k = 0; k < (1 << n); ++k) {
    const int ups = n - std::popcount(static_cast<unsigned>(k));
    p[ups] += std::norm(gs[k]);
  }
  return p;
}

// Exact Schroedinger propagation of the ramp by stepwise matrix exponentials
// exp(-i 2 pi H(t) dt) with B frozen inside each small step.
inline CVec propagate_exact(const Eigen::MatrixXd& j_khz, const CVec& psi0,
                            double b0_khz, double b_final_khz, double tau_us,
                            double t_final_us, int n_steps) {
  CVec psi = psi0;
  const double dt_ms = t_final_us * 1e-3 / n_steps;
  for (int k = 0; k < n_steps; ++k) {
    const double t_us = (k + 0.5) * t_final_us / n_steps;
    const double b = std::max(b0_khz * std::exp(-t_us / tau_us), b_final_khz);
    Eigen::SelfAdjointEigenSolver<CMat> es(dense_hamiltonian(j_khz, b));
    CVec phases(es.eigenvalues().size());
    for (int i = 0; i < phases.size(); ++i)
      phases[i] = std::exp(Cplx(0, -2.0 * M_PI * es.eigenvalues()[i] * dt_ms));
    psi = es.eigenvectors() * phases.asDiagonal() *
          es.eigenvectors().adjoint() * psi;
  }
  return psi;
}

inline std::vector<double> ps_of(const CVec& psi, int n) {
  std::vector<double> p(n + 1, 0.0);
  for (int k = 0; k < psi.size(); ++k) {
    const int ups = n - std::popcount(static_cast<unsigned>(k));
    p[ups] += std::norm(psi[k]);
  }
  return p;
}

// Basis change from the storage (x) basis to the z basis, one qubit:
// |up_x> = (|up_z> + |dn_z>)/sqrt(2), |dn_x> = (|dn_z> - |up_z>)/sqrt(2).
inline CMat x_to_z_single() {
  CMat u(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  u(0, 0) = r;   // <up_z | up_x>
  u(0, 1) = -r;  // <up_z | dn_x>
  u(1, 0) = r;   // <dn_z | up_x>
  u(1, 1) = r;   // <dn_z | dn_x>
  return u;
}

inline CVec x_to_z(const CVec& psi_x, int n) {
  CMat u = CMat::Identity(1, 1);
  for (int j = 0; j < n; ++j) u = kron(x_to_z_single(), u);
  return u * psi_x;
}

}  // namespace ionsim_test
