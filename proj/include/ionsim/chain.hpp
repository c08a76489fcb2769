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
// Linear-chain statics: equilibrium positions, transverse normal modes,
// Lamb-Dicke parameters and the spin-spin coupling matrix generated by a
// detuned spin-dependent force.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ionsim/constants.hpp"

namespace ionsim {

struct TrapConfig {
  int n_ions = 1;
  double nu_x_khz = 4748.0;  // transverse COM frequency (ordinary, kHz)
  double nu_z_khz = 1002.0;  // axial COM frequency (ordinary, kHz)
  double ion_mass_amu = kYb171MassAmu;
  double delta_k_rad_per_m = default_delta_k();

  // Throws ConfigError unless n_ions >= 1 and nu_x > nu_z > 0.
  void validate() const;
};

// Dimensionless equilibrium coordinates, ascending, in units of the axial
// length scale.
struct ChainGeometry {
  std::vector<double> positions;
};

struct ModeData {
  std::vector<double> freq_khz;  // nu_m, sorted descending (m=0 is COM)
  Eigen::MatrixXd vectors;       // b(i, m), orthonormal columns
  Eigen::MatrixXd lamb_dicke;    // eta(i, m)

  int n_ions() const { return static_cast<int>(vectors.rows()); }
};

struct CouplingMatrix {
  Eigen::MatrixXd j_khz;    // symmetric, zero diagonal
  double mean_j_khz = 0.0;  // <J_ij> over i<j
  std::vector<std::string> warnings;

  int n_ions() const { return static_cast<int>(j_khz.rows()); }
};

struct CouplingOptions {
  // Hard error when the beatnote comes closer than this to any mode.
  double guard_band_khz = 1.0;
};

struct PowerLawFit {
  bool valid = false;
  double exponent = 0.0;   // alpha in J(r) = C / r^alpha
  double prefactor = 0.0;  // C
  std::string warning;
};

// Minimizes sum_i u_i^2/2 + sum_{i<j} 1/|u_i-u_j| by damped Newton iteration
// from a uniform-spacing start. Gradient max-norm at the solution < 1e-10.
ChainGeometry equilibrium_positions(int n_ions);

// Diagonalizes the dimensionless transverse coupling matrix
//   A_nm = delta_nm [ (nu_x/nu_z)^2 - sum_{p != n} 1/|u_n-u_p|^3 ]
//        + (1 - delta_nm) / |u_n-u_m|^3
// and returns nu_m = nu_z sqrt(lambda_m) (descending) with orthonormal mode
// vectors and eta(i,m) = b(i,m) dk sqrt(hbar / (2 M 2 pi nu_m)).
ModeData transverse_modes(const TrapConfig& cfg, const ChainGeometry& geom);

// J_ij = N Omega_i Omega_j sum_m eta_im eta_jm nu_m / (mu^2 - nu_m^2), kHz.
// `rabi_khz` is either a single uniform value or one value per ion.
CouplingMatrix coupling_matrix(const ModeData& modes,
                               const std::vector<double>& rabi_khz,
                               double mu_khz,
                               const CouplingOptions& opts = {});

// Log-log least squares of J_{0,r} against r = 1..N-1. Invalid (with a
// warning) when fewer than two points or any coupling is non-positive.
PowerLawFit fit_coupling_power_law(const CouplingMatrix& coupling);

// Power-law exponent versus detuning, for detunings above the COM mode.
std::vector<std::pair<double, PowerLawFit>> coupling_range_scan(
    const TrapConfig& cfg, const std::vector<double>& rabi_khz,
    const std::vector<double>& mu_list_khz, const CouplingOptions& opts = {});

}  // namespace ionsim
