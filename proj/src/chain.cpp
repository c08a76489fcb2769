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

#include "ionsim/chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

constexpr double kGradTol = 1e-11;
constexpr int kMaxNewtonIter = 10000;

Eigen::VectorXd chain_gradient(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd g = x;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = x[i] - x[j];
      g[i] -= (d > 0 ? 1.0 : -1.0) / (d * d);
    }
  }
  return g;
}

Eigen::MatrixXd chain_hessian(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = 2.0 / std::pow(std::abs(x[i] - x[j]), 3);
      h(i, i) += c;
      h(i, j) -= c;
    }
  }
  return h;
}

}  // namespace

void TrapConfig::validate() const {
  if (n_ions < 1) throw ConfigError("n_ions must be >= 1");
  if (!(nu_z_khz > 0.0)) throw ConfigError("nu_z must be positive");
  if (!(nu_x_khz > nu_z_khz))
    throw ConfigError("nu_x must exceed nu_z for a stable linear chain");
  if (!(ion_mass_amu > 0.0)) throw ConfigError("ion mass must be positive");
  if (!(delta_k_rad_per_m > 0.0)) throw ConfigError("delta_k must be positive");
}

ChainGeometry equilibrium_positions(int n_ions) {
  if (n_ions < 1) throw ConfigError("n_ions must be >= 1");
  if (n_ions == 1) return ChainGeometry{{0.0}};

  const int n = n_ions;
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.3 * (i - 0.5 * (n - 1));

  Eigen::VectorXd g = chain_gradient(x);
  int iter = 0;
  while (g.cwiseAbs().maxCoeff() > kGradTol) {
    if (++iter > kMaxNewtonIter)
      throw SolverError("equilibrium position solver did not converge for n=" +
                        std::to_string(n));
    Eigen::VectorXd step = chain_hessian(x).ldlt().solve(g);
    // Backtrack: the Coulomb terms blow up if a step reorders ions.
    double scale = 1.0;
    const double g0 = g.norm();
    for (int k = 0; k < 60; ++k) {
      Eigen::VectorXd trial = x - scale * step;
      bool ordered = true;
      for (int i = 0; i + 1 < n; ++i) ordered &= trial[i] < trial[i + 1];
      if (ordered) {
        Eigen::VectorXd gt = chain_gradient(trial);
        if (gt.norm() < g0) {
          x = trial;
          g = gt;
          break;
        }
      }
      scale *= 0.5;
      if (k == 59)
        throw SolverError("equilibrium position line search stalled");
    }
  }

  // The potential is mirror symmetric; remove the solver's tiny asymmetry
  // and re-polish so both invariants hold simultaneously.
  for (int i = 0; i < n / 2 + 1; ++i) {
    const double s = 0.5 * (x[i] - x[n - 1 - i]);
    x[i] = s;
    x[n - 1 - i] = -s;
  }
  for (int k = 0; k < 3; ++k) {
    g = chain_gradient(x);
    x -= chain_hessian(x).ldlt().solve(g);
  }
  g = chain_gradient(x);
  if (g.cwiseAbs().maxCoeff() > 1e-10)
    throw SolverError("equilibrium gradient above tolerance after polish");

  ChainGeometry geom;
  geom.positions.assign(x.data(), x.data() + n);
  std::sort(geom.positions.begin(), geom.positions.end());
  return geom;
}

ModeData transverse_modes(const TrapConfig& cfg, const ChainGeometry& geom) {
  cfg.validate();
  const int n = static_cast<int>(geom.positions.size());
  if (n != cfg.n_ions)
    throw ConfigError("geometry size does not match n_ions");

  const double aspect2 =
      (cfg.nu_x_khz / cfg.nu_z_khz) * (cfg.nu_x_khz / cfg.nu_z_khz);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = aspect2;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double inv3 =
          1.0 / std::pow(std::abs(geom.positions[i] - geom.positions[j]), 3);
      a(i, j) = inv3;
      diag -= inv3;
    }
    a(i, i) = diag;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    throw SolverError("transverse mode diagonalization failed");

  ModeData modes;
  modes.freq_khz.resize(n);
  modes.vectors.resize(n, n);
  // Eigen returns ascending eigenvalues; modes are reported descending.
  for (int m = 0; m < n; ++m) {
    const double lambda = solver.eigenvalues()[n - 1 - m];
    if (lambda <= 0.0) {
      std::ostringstream msg;
      msg << "chain unstable along x: mode eigenvalue " << lambda
          << " at aspect ratio nu_x/nu_z = " << cfg.nu_x_khz / cfg.nu_z_khz;
      throw StabilityError(msg.str());
    }
    modes.freq_khz[m] = cfg.nu_z_khz * std::sqrt(lambda);
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - m);
    // Sign convention: overall sum positive, else first entry positive.
    const double s = v.sum();
    if (s < -1e-9 || (std::abs(s) <= 1e-9 && v[0] < 0)) v = -v;
    modes.vectors.col(m) = v;
  }

  const double mass_kg = cfg.ion_mass_amu * kAmuKg;
  modes.lamb_dicke.resize(n, n);
  for (int m = 0; m < n; ++m) {
    const double omega = 2.0 * M_PI * modes.freq_khz[m] * 1e3;  // rad/s
    const double eta_scale =
        cfg.delta_k_rad_per_m * std::sqrt(kHbar / (2.0 * mass_kg * omega));
    modes.lamb_dicke.col(m) = modes.vectors.col(m) * eta_scale;
  }
  return modes;
}

CouplingMatrix coupling_matrix(const ModeData& modes,
                               const std::vector<double>& rabi_khz,
                               double mu_khz, const CouplingOptions& opts) {
  const int n = modes.n_ions();
  std::vector<double> omega(n);
  if (rabi_khz.size() == 1) {
    std::fill(omega.begin(), omega.end(), rabi_khz[0]);
  } else if (static_cast<int>(rabi_khz.size()) == n) {
    omega = rabi_khz;
  } else {
    throw ConfigError("rabi list must have 1 or n_ions entries");
  }
  for (double w : omega)
    if (!(w > 0.0)) throw ConfigError("Rabi frequencies must be positive");

  CouplingMatrix out;
  for (int m = 0; m < n; ++m) {
    const double gap = std::abs(mu_khz - modes.freq_khz[m]);
    if (gap < opts.guard_band_khz) {
      std::ostringstream msg;
      msg << "beatnote " << mu_khz << " kHz within guard band ("
          << opts.guard_band_khz << " kHz) of mode " << m + 1 << " at "
          << modes.freq_khz[m] << " kHz";
      throw ResonanceError(msg.str());
    }
    double max_eta_omega = 0.0;
    for (int i = 0; i < n; ++i)
      max_eta_omega = std::max(max_eta_omega,
                               std::abs(modes.lamb_dicke(i, m)) * omega[i]);
    if (gap < 4.0 * max_eta_omega) {
      std::ostringstream msg;
      msg << "detuning only " << gap << " kHz from mode " << m + 1
          << " (< 4 max eta*Omega = " << 4.0 * max_eta_omega
          << " kHz): adiabatic elimination of phonons is marginal";
      out.warnings.push_back(msg.str());
    }
  }

  out.j_khz = Eigen::MatrixXd::Zero(n, n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double jij = 0.0;
      for (int m = 0; m < n; ++m) {
        jij += modes.lamb_dicke(i, m) * modes.lamb_dicke(j, m) *
               modes.freq_khz[m] /
               (mu_khz * mu_khz - modes.freq_khz[m] * modes.freq_khz[m]);
      }
      jij *= n * omega[i] * omega[j];
      out.j_khz(i, j) = jij;
      out.j_khz(j, i) = jij;
      sum += jij;
    }
  }
  out.mean_j_khz = n > 1 ? sum / (0.5 * n * (n - 1)) : 0.0;
  return out;
}

PowerLawFit fit_coupling_power_law(const CouplingMatrix& coupling) {
  const int n = coupling.n_ions();
  PowerLawFit fit;
  if (n < 3) {
    fit.warning = "power-law fit needs at least two distances";
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int r = 1; r < n; ++r) {
    const double j = coupling.j_khz(0, r);
    if (j <= 0.0) {
      fit.warning = "non-positive coupling: power-law fit undefined";
      return fit;
    }
    const double lx = std::log(static_cast<double>(r));
    const double ly = std::log(j);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = n - 1.0;
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.valid = true;
  fit.exponent = -slope;
  fit.prefactor = std::exp((sy - slope * sx) / m);
  return fit;
}

std::vector<std::pair<double, PowerLawFit>> coupling_range_scan(
    const TrapConfig& cfg, const std::vector<double>& rabi_khz,
    const std::vector<double>& mu_list_khz, const CouplingOptions& opts) {
  cfg.validate();
  const ChainGeometry geom = equilibrium_positions(cfg.n_ions);
  const ModeData modes = transverse_modes(cfg, geom);
  std::vector<std::pair<double, PowerLawFit>> out;
  out.reserve(mu_list_khz.size());
  for (double mu : mu_list_khz) {
    if (mu <= modes.freq_khz[0])
      throw ConfigError("range scan requires detunings above the COM mode");
    out.emplace_back(mu, fit_coupling_power_law(
                             coupling_matrix(modes, rabi_khz, mu, opts)));
  }
  return out;
}

}  // namespace ionsim
